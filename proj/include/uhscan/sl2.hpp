#pragma once

// 2x2 real matrix kernel with the exact singular-value analysis the
// hyperbolicity tests rely on.
//
// Conventions used throughout the library:
//  * matrices act on column vectors (x, y);
//  * directions are points of the projective line, stored as an angle in
//    [0, pi): the direction of the vector (cos a, sin a);
//  * for a matrix of norm > 1, `contract_dir` is the direction most strongly
//    contracted (right singular direction of the smallest singular value) and
//    `expand_dir` is the image direction of the orthogonal one, i.e. the left
//    singular direction of the largest singular value.

#include "uhscan/common.hpp"

namespace uhscan {

struct Mat2 {
  // Row-major entries: [[a11, a12], [a21, a22]].
  double a11 = 1.0, a12 = 0.0;
  double a21 = 0.0, a22 = 1.0;

  double det() const { return a11 * a22 - a12 * a21; }
};

// Checked constructor: verifies |det - 1| <= 1e-9.  Internal code builds
// Mat2 directly where unimodularity is guaranteed by construction.
Mat2 make_unimodular(double a11, double a12, double a21, double a22);

// Direction on the projective line, angle normalized to [0, pi).
// Angles within 1e-12 of pi are wrapped to 0 so that near-boundary inputs
// have one canonical representative.
struct ProjPoint {
  double angle = 0.0;

  ProjPoint() = default;
  explicit ProjPoint(double a);

  double cos() const;
  double sin() const;
};

// Projective distance: min(|a-b|, pi-|a-b|), a metric on [0, pi).
double distance(const ProjPoint& p, const ProjPoint& q);

// Rotation by angle t (counterclockwise).
Mat2 rotation(double t);

// Singular decomposition of a determinant-one matrix with norm > 1:
//   input = sign * R(expand_dir) * diag(norm, 1/norm) * R(pi/2 - contract_dir)
// where R is `rotation`.  The orientation factor `sign` is needed because the
// two directions are only defined modulo pi: without it the right-hand side
// determines the matrix only up to global sign.
struct Svd2 {
  double norm = 1.0;          // largest singular value, >= 1
  ProjPoint contract_dir;     // most contracted input direction
  ProjPoint expand_dir;       // image of the orthogonal input direction
  int sign = 1;               // +1 or -1, orientation of the reconstruction
};

Mat2 reconstruct(const Svd2& s);

// Matrix product a*b; throws DeterminantDrift if |det - 1| > 1e-6.
Mat2 mul(const Mat2& a, const Mat2& b);

// Exact inverse of a determinant-one matrix (adjugate).
Mat2 inverse(const Mat2& a);

// Singular analysis; throws NearRotation when norm < 1 + tol_rot because the
// singular directions lose all significance there.
Svd2 svd2(const Mat2& a, double tol_rot = 1e-10);

// Operator norm (largest singular value) without the near-rotation guard.
double op_norm(const Mat2& a);

// Smallest singular value.
double op_norm_min(const Mat2& a);

// Induced action on the projective line.
ProjPoint proj_act(const Mat2& a, const ProjPoint& p);

}  // namespace uhscan
