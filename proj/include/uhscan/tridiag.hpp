#pragma once

// Finite sections of the Schrodinger operator, their spectra, and
// finitely-supported approximate eigenvectors.
//
// The operator acts by (H u)(n) = u(n+1) + u(n-1) + v(n) u(n); the finite
// section over an interval is the symmetric tridiagonal matrix with diagonal
// v(n) and unit off-diagonals (Dirichlet truncation).  Eigenvalues come from
// Sturm-sequence bisection, which is robust for any size used here.

#include <optional>

#include "uhscan/potential.hpp"

namespace uhscan {

struct FiniteSection {
  long first_index = 0;
  std::vector<double> diagonal;  // v(n) over the interval

  long size() const { return static_cast<long>(diagonal.size()); }
  Interval range() const {
    return {first_index, first_index + size() - 1};
  }
};

FiniteSection make_section(const PotentialSource& src, Interval range);

// All eigenvalues of section - shift*I, ascending, each to absolute accuracy
// 1e-10.
std::vector<double> eigenvalues(const FiniteSection& sec, double shift = 0.0);

// Finitely supported unit vector with its distance from being an
// eigenvector.  `defect` always equals ||(H - E) u|| recomputed from the
// stored vector, including the two boundary terms on each side.
struct WeylWitness {
  double energy = 0.0;
  Sequence vector;      // unit l2 norm
  double defect = 0.0;

  json to_json() const;
};

// ||(H - E) u|| for a unit vector u supported on its sequence range, with
// zero extension outside.  Throws std::invalid_argument unless the vector is
// unit to 1e-9.
double weyl_defect(const PotentialSource& src, double energy,
                   const Sequence& u);

// Smallest support length L <= max_length such that some length-L interval
// centered in center_range carries a unit vector with ||(H - E) u|| < eps.
// Intervals slide at stride max(1, L/4); the first success (smallest L,
// smallest center) is returned.  nullopt when no such interval exists, e.g.
// when E is far from the spectrum so that ||(H - E) u|| >= dist(E, spectrum)
// for every unit u.
std::optional<std::pair<long, WeylWitness>> min_support_length(
    const PotentialSource& src, double energy, double eps, long max_length,
    Interval center_range);

// Truncate a bounded solution of the difference equation (given on
// [-L-1, L+1]) to [-L, L], normalize, and package it as a Weyl witness.
// The defect picks up only the four boundary terms, so bounded solutions
// with large interior norm give small defects.  Throws DegenerateNorm when
// the truncated vector has norm < 1e-12, and std::invalid_argument when the
// input fails the difference equation in the interior.
WeylWitness approx_eigenvector_from_bounded_solution(
    const PotentialSource& src, double energy, const Sequence& u);

}  // namespace uhscan
