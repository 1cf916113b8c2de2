#include "uhscan/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uhscan {

namespace {

constexpr double kPivMin = 1e-290;

// Number of eigenvalues of the symmetric tridiagonal matrix
// tridiag(1, diag, 1) that are strictly below x (Sturm sequence via the
// LDL^T pivot recursion, with the usual tiny-pivot guard).
int count_below(const std::vector<double>& diag, double x) {
  int cnt = 0;
  double d = 1.0;
  for (size_t i = 0; i < diag.size(); ++i) {
    d = i == 0 ? diag[0] - x : (diag[i] - x) - 1.0 / d;
    if (std::fabs(d) < kPivMin) d = -kPivMin;
    if (d < 0.0) ++cnt;
  }
  return cnt;
}

}  // namespace

FiniteSection make_section(const PotentialSource& src, Interval range) {
  if (range.length() < 1)
    throw std::invalid_argument("make_section: empty range");
  FiniteSection sec;
  sec.first_index = range.lo;
  sec.diagonal.reserve(static_cast<size_t>(range.length()));
  for (long n = range.lo; n <= range.hi; ++n)
    sec.diagonal.push_back(src.sample(n));
  return sec;
}

std::vector<double> eigenvalues(const FiniteSection& sec, double shift) {
  std::vector<double> diag = sec.diagonal;
  for (double& d : diag) d -= shift;
  size_t n = diag.size();
  if (n == 0) return {};

  double lo = diag[0], hi = diag[0];
  for (double d : diag) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  lo -= 2.0;  // Gershgorin: off-diagonal row sums are at most 2
  hi += 2.0;

  std::vector<double> eig(n);
  for (size_t k = 0; k < n; ++k) {
    double a = lo, b = hi;
    while (b - a > 1e-10) {
      double mid = 0.5 * (a + b);
      if (count_below(diag, mid) <= static_cast<int>(k))
        a = mid;
      else
        b = mid;
    }
    eig[k] = 0.5 * (a + b);
  }
  return eig;
}

json WeylWitness::to_json() const {
  return json{{"energy", energy},
              {"support_first", vector.first},
              {"vector", vector.values},
              {"defect", defect}};
}

double weyl_defect(const PotentialSource& src, double energy,
                   const Sequence& u) {
  double nrm = l2_norm(u);
  if (std::fabs(nrm - 1.0) > 1e-9)
    throw std::invalid_argument("weyl_defect: vector norm " +
                                std::to_string(nrm) + " is not 1");
  double s = 0.0;
  for (long n = u.lo() - 1; n <= u.hi() + 1; ++n) {
    double r = u.at_or_zero(n + 1) + u.at_or_zero(n - 1) +
               (src.sample(n) - energy) * u.at_or_zero(n);
    s += r * r;
  }
  return std::sqrt(s);
}

namespace {

// Symmetric pentadiagonal matrix, bandwidth 2: diagonal dd, first and second
// off-diagonals e1, e2.  This is the shape of M^T M for the tridiagonal map
// M = section of (H - E).
struct Penta {
  std::vector<double> dd, e1, e2;

  size_t size() const { return dd.size(); }
};

Penta normal_matrix(const detail::PotentialCache& v, double energy,
                    Interval range) {
  Penta p;
  auto n = static_cast<size_t>(range.length());
  p.dd.resize(n);
  p.e1.assign(n > 0 ? n - 1 : 0, 0.0);
  p.e2.assign(n > 1 ? n - 2 : 0, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double a = v(range.lo + static_cast<long>(i)) - energy;
    p.dd[i] = a * a + 2.0;
    if (i + 1 < n) {
      double b = v(range.lo + static_cast<long>(i) + 1) - energy;
      p.e1[i] = a + b;
    }
    if (i + 2 < n) p.e2[i] = 1.0;
  }
  return p;
}

// Banded LDL^T of (p - t*I); returns the inertia (number of negative
// pivots) and, when `keep` is set, the factors for solving.
struct BandFactors {
  std::vector<double> d, l1, l2;
};

int band_inertia(const Penta& p, double t, BandFactors* keep) {
  size_t n = p.size();
  std::vector<double> d(n), l1(n, 0.0), l2(n, 0.0);
  int neg = 0;
  for (size_t i = 0; i < n; ++i) {
    double di = p.dd[i] - t;
    if (i >= 1) di -= l1[i - 1] * l1[i - 1] * d[i - 1];
    if (i >= 2) di -= l2[i - 2] * l2[i - 2] * d[i - 2];
    if (std::fabs(di) < kPivMin) di = -kPivMin;
    d[i] = di;
    if (di < 0.0) ++neg;
    if (i + 1 < n) {
      double num = p.e1[i];
      if (i >= 1) num -= l2[i - 1] * l1[i - 1] * d[i - 1];
      l1[i] = num / di;
    }
    if (i + 2 < n) l2[i] = p.e2[i] / di;
  }
  if (keep) {
    keep->d = std::move(d);
    keep->l1 = std::move(l1);
    keep->l2 = std::move(l2);
  }
  return neg;
}

void band_solve(const BandFactors& f, std::vector<double>& x) {
  size_t n = f.d.size();
  for (size_t i = 1; i < n; ++i) {
    x[i] -= f.l1[i - 1] * x[i - 1];
    if (i >= 2) x[i] -= f.l2[i - 2] * x[i - 2];
  }
  for (size_t i = 0; i < n; ++i) x[i] /= f.d[i];
  for (size_t i = n; i-- > 1;) {
    x[i - 1] -= f.l1[i - 1] * x[i];
    if (i + 1 < n) x[i - 1] -= f.l2[i - 1] * x[i + 1];
  }
}

// Smallest eigenvalue of the pentadiagonal matrix by inertia bisection.
double band_lambda_min(const Penta& p, double upper) {
  double a = 0.0, b = upper;
  // (H-E)^T (H-E) is positive semidefinite, so 0 is a lower bound.
  while (b - a > 1e-12 + 1e-12 * std::fabs(b)) {
    double mid = 0.5 * (a + b);
    if (band_inertia(p, mid, nullptr) >= 1)
      b = mid;
    else
      a = mid;
  }
  return 0.5 * (a + b);
}

// Eigenvector for the smallest eigenvalue via shifted inverse iteration.
std::vector<double> band_ground_vector(const Penta& p, double lambda_min) {
  size_t n = p.size();
  double shift = lambda_min - std::max(1e-12, 1e-8 * std::fabs(lambda_min));
  BandFactors f;
  band_inertia(p, shift, &f);
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i)
    x[i] = (i % 2 == 0) ? 1.0 : -1.0;  // deterministic start, both parities
  for (int it = 0; it < 4; ++it) {
    band_solve(f, x);
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) {
      // Shift landed on the eigenvalue to working precision; restart from a
      // shifted pattern.
      for (size_t i = 0; i < n; ++i) x[i] = (i % 3 == 0) ? 1.0 : 0.5;
      continue;
    }
    for (double& v : x) v /= nrm;
  }
  return x;
}

}  // namespace

std::optional<std::pair<long, WeylWitness>> min_support_length(
    const PotentialSource& src, double energy, double eps, long max_length,
    Interval center_range) {
  if (!(eps > 0.0))
    throw std::invalid_argument("min_support_length: eps must be positive");
  if (max_length < 1)
    throw std::invalid_argument("min_support_length: max_length must be >= 1");

  detail::PotentialCache cache(
      src, {center_range.lo - max_length - 2, center_range.hi + max_length + 2});

  double vb = src.bound;
  double sigma_upper = (std::fabs(energy) + vb + 2.0);
  sigma_upper = sigma_upper * sigma_upper + 1.0;

  for (long len = 1; len <= max_length; ++len) {
    long stride = std::max(1L, len / 4);
    for (long c = center_range.lo; c <= center_range.hi; c += stride) {
      Interval support{c - len / 2, c - len / 2 + len - 1};
      Penta p = normal_matrix(cache, energy, support);
      double lmin = band_lambda_min(p, sigma_upper);
      if (!(std::sqrt(std::max(lmin, 0.0)) < eps)) continue;

      std::vector<double> x = band_ground_vector(p, lmin);
      WeylWitness w;
      w.energy = energy;
      w.vector.first = support.lo;
      w.vector.values = std::move(x);
      double nrm = l2_norm(w.vector);
      if (!(nrm > 0.0)) continue;
      for (double& v : w.vector.values) v /= nrm;
      w.defect = weyl_defect(src, energy, w.vector);
      if (w.defect < eps) return std::make_pair(len, std::move(w));
    }
  }
  return std::nullopt;
}

WeylWitness approx_eigenvector_from_bounded_solution(const PotentialSource& src,
                                                     double energy,
                                                     const Sequence& u) {
  if (u.size() < 5 || u.lo() != -u.hi())
    throw std::invalid_argument(
        "bounded solution must live on a symmetric range [-L-1, L+1]");
  double scale = 0.0;
  for (double v : u.values) scale = std::max(scale, std::fabs(v));
  for (long n = u.lo() + 1; n <= u.hi() - 1; ++n) {
    double r = u.at(n + 1) + u.at(n - 1) + (src.sample(n) - energy) * u.at(n);
    if (std::fabs(r) > 1e-9 * (1.0 + scale))
      throw std::invalid_argument(
          "input does not satisfy the difference equation at site " +
          std::to_string(n));
  }

  long big_l = u.hi() - 1;
  Sequence hat;
  hat.first = -big_l;
  hat.values.assign(static_cast<size_t>(2 * big_l + 1), 0.0);
  for (long n = -big_l; n <= big_l; ++n) hat.at(n) = u.at(n);
  double nrm = l2_norm(hat);
  if (nrm < 1e-12)
    throw DegenerateNorm("truncated solution has norm below 1e-12");
  for (double& v : hat.values) v /= nrm;

  WeylWitness w;
  w.energy = energy;
  w.vector = std::move(hat);
  w.defect = weyl_defect(src, energy, w.vector);
  return w;
}

}  // namespace uhscan
