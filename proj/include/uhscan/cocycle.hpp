#pragma once

// Transfer matrices and windowed cocycle products.
//
// The one-step matrix at energy E over potential value v is
//     A(E - v) = [[E - v, -1], [1, 0]],
// so that u(n+1) = (E - v(n)) u(n) - u(n-1) becomes
// (u(n+1), u(n)) = A * (u(n), u(n-1)).
//
// The n-step product over base site k follows the three-case convention
//     n >= 1 :  A(k+n-1) * ... * A(k)
//     n == 0 :  identity
//     n <= -1:  A(k+n)^{-1} * ... * A(k-1)^{-1}
// where A(j) abbreviates the one-step matrix at site j.
//
// Long products are held in a scaled form: a stored matrix together with
// log_scale, representing exp(log_scale) * matrix.  Whenever an entry of the
// running product exceeds 1e8 in magnitude the matrix is divided by its
// largest absolute entry and the logarithm is accumulated, so entries stay
// in a safe range at any depth.

#include "uhscan/potential.hpp"
#include "uhscan/sl2.hpp"

namespace uhscan {

// One-step transfer matrix (exact, determinant one by construction).
Mat2 transfer(double energy, double v);

// Scaled product accumulator.  left_multiply applies one more factor on the
// left; the represented matrix is exp(log_scale) * matrix at all times.
class ProductTracker {
 public:
  void left_multiply(const Mat2& a);

  const Mat2& matrix() const { return m_; }
  double log_scale() const { return log_; }
  long steps() const { return steps_; }

  // log of the operator norm of the represented product.
  double log_norm() const;

  // Singular analysis of the represented product (directions and norm of the
  // stored matrix; the scale shifts only the singular values).  Throws
  // NearRotation under the same condition as svd2 applied to the true
  // product.
  Svd2 scaled_svd(double tol_rot = 1e-10) const;

 private:
  Mat2 m_;
  double log_ = 0.0;
  long steps_ = 0;
};

// A finished windowed product exp(log_scale) * matrix ~ A_n(k).  The stored
// matrix has entries in [~1, 1e4] (finalize_tracker rescales into the log);
// its top singular channel and both singular directions are accurate, but
// its determinant is exp(-2 log_scale) only up to roundoff: for deep
// products the bottom singular channel lies below the double-precision
// noise floor, so matrix.det() must not be treated as meaningful.  The
// represented product has determinant one in exact arithmetic.
struct CocycleProduct {
  Mat2 matrix;
  double log_scale = 0.0;
  long base_site = 0;  // k
  long steps = 0;      // n (signed)

  double log_norm() const;
};

CocycleProduct finalize_tracker(const ProductTracker& t, long base_site,
                                long steps);

// Windowed product A_n(k) for the given energy and potential.
CocycleProduct product(const PotentialSource& src, double energy, long k,
                       long n);

// Composition law: A_m(k+n) * A_n(k) with matching sites required.
CocycleProduct compose(const CocycleProduct& outer, const CocycleProduct& inner);

// Solution of the difference equation u(n+1) + u(n-1) + v(n) u(n) = E u(n)
// on `range` with the pair (u(k0), u(k0-1)) = (w0, w1) prescribed at an
// anchor site k0 in the range.  Plain scalar recurrence; throws Overflow if
// a value passes 1e300 in magnitude.
Sequence solution_from_vector(const PotentialSource& src, double energy,
                              long k0, double w0, double w1, Interval range);

namespace detail {

// Per-step capture of the products A_1(k) ... A_depth(k) (dir = +1) or
// A_{-1}(k) ... A_{-depth}(k) (dir = -1): scaled matrices plus log scales.
// Entry j (1-based step count) lands at index j-1.
struct ProductTrail {
  std::vector<Mat2> matrices;
  std::vector<double> log_scales;

  double log_norm(size_t idx) const;
};

ProductTrail product_trail(const PotentialCache& v, double energy, long k,
                           int dir, int depth);

}  // namespace detail

}  // namespace uhscan
