#include "uhscan/cocycle.hpp"

#include <cmath>

namespace uhscan {

namespace {

// Entry magnitude that triggers renormalization of a running product.
constexpr double kRenormThreshold = 1e8;

double max_abs_entry(const Mat2& m) {
  return std::max(std::max(std::fabs(m.a11), std::fabs(m.a12)),
                  std::max(std::fabs(m.a21), std::fabs(m.a22)));
}

Mat2 scale_entries(const Mat2& m, double f) {
  return {f * m.a11, f * m.a12, f * m.a21, f * m.a22};
}

// Unchecked product; tracker determinants drift below 1 by design once a
// renormalization has happened.
Mat2 raw_mul(const Mat2& a, const Mat2& b) {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
          a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}

}  // namespace

Mat2 transfer(double energy, double v) {
  return {energy - v, -1.0, 1.0, 0.0};
}

void ProductTracker::left_multiply(const Mat2& a) {
  m_ = raw_mul(a, m_);
  ++steps_;
  double t = max_abs_entry(m_);
  if (t > kRenormThreshold) {
    m_ = scale_entries(m_, 1.0 / t);
    log_ += std::log(t);
  }
}

double ProductTracker::log_norm() const { return log_ + std::log(op_norm(m_)); }

// tol_rot value that disables the near-rotation guard for internal calls
// where it has already been applied to the true (scaled) norm.
constexpr double kNoRotGuard = -1e18;

Svd2 ProductTracker::scaled_svd(double tol_rot) const {
  // Near-rotation must be judged on the true norm, scale included.
  double log_true = log_norm();
  if (!(log_true >= std::log1p(tol_rot)))
    throw NearRotation("scaled product norm exp(" + std::to_string(log_true) +
                       ") too close to 1 for singular directions");
  return svd2(m_, kNoRotGuard);
}

double CocycleProduct::log_norm() const {
  return log_scale + std::log(op_norm(matrix));
}

// Entry cap for finalized products, kept well below kRenormThreshold so two
// stored matrices can be raw-multiplied without losing accuracy.
constexpr double kStoreCap = 1e4;

CocycleProduct finalize_tracker(const ProductTracker& t, long base_site,
                                long steps) {
  // The determinant is deliberately left alone.  Once entries reach ~1e4
  // the floating-point determinant of a represented-det-one product is pure
  // cancellation noise (~eps * top^2), so any "repair" based on it would
  // inject garbage into the bottom singular channel.  The stored matrix
  // carries the top channel and both singular directions accurately; the
  // bottom channel of a deep product sits below the double-precision noise
  // floor and must not be read back from the entries.
  Mat2 m = t.matrix();
  double log = t.log_scale();
  double top = max_abs_entry(m);
  if (!std::isfinite(top) || !(top > 0.0))
    throw Overflow("cocycle product collapsed or left the representable range");
  if (top > kStoreCap) {
    m = scale_entries(m, 1.0 / top);
    log += std::log(top);
  }
  return {m, log, base_site, steps};
}

CocycleProduct product(const PotentialSource& src, double energy, long k,
                       long n) {
  ProductTracker t;
  if (n >= 0) {
    for (long j = 0; j < n; ++j)
      t.left_multiply(transfer(energy, src.sample(k + j)));
  } else {
    for (long j = 1; j <= -n; ++j)
      t.left_multiply(inverse(transfer(energy, src.sample(k - j))));
  }
  return finalize_tracker(t, k, n);
}

CocycleProduct compose(const CocycleProduct& outer,
                       const CocycleProduct& inner) {
  if (outer.base_site != inner.base_site + inner.steps)
    throw std::invalid_argument(
        "compose: outer product must start where the inner one ends");
  ProductTracker t;
  t.left_multiply(inner.matrix);
  t.left_multiply(outer.matrix);
  CocycleProduct out =
      finalize_tracker(t, inner.base_site, inner.steps + outer.steps);
  out.log_scale += inner.log_scale + outer.log_scale;
  return out;
}

Sequence solution_from_vector(const PotentialSource& src, double energy,
                              long k0, double w0, double w1, Interval range) {
  if (!range.contains(k0))
    throw std::invalid_argument("solution anchor site outside range");
  Sequence u;
  u.first = range.lo;
  u.values.assign(static_cast<size_t>(range.length()), 0.0);

  auto check = [](double x) {
    if (std::fabs(x) > 1e300)
      throw Overflow("solution value exceeded 1e300");
    return x;
  };

  // Seed the pair (u(k0), u(k0-1)); when k0-1 precedes the range the second
  // component only feeds the recurrence.
  u.at(k0) = check(w0);
  double below = w1;
  if (range.contains(k0 - 1)) u.at(k0 - 1) = check(w1);

  // Forward sweep from the anchor.
  double prev = below, cur = w0;
  for (long n = k0; n < range.hi; ++n) {
    double next = check((energy - src.sample(n)) * cur - prev);
    u.at(n + 1) = next;
    prev = cur;
    cur = next;
  }
  // Backward sweep below the anchor.
  prev = w0;
  cur = below;
  for (long n = k0 - 1; n > range.lo; --n) {
    double lower = check((energy - src.sample(n)) * cur - prev);
    u.at(n - 1) = lower;
    prev = cur;
    cur = lower;
  }
  return u;
}

namespace detail {

double ProductTrail::log_norm(size_t idx) const {
  return log_scales[idx] + std::log(op_norm(matrices[idx]));
}

ProductTrail product_trail(const PotentialCache& v, double energy, long k,
                           int dir, int depth) {
  ProductTrail trail;
  trail.matrices.reserve(static_cast<size_t>(depth));
  trail.log_scales.reserve(static_cast<size_t>(depth));
  ProductTracker t;
  for (int j = 1; j <= depth; ++j) {
    Mat2 step = dir > 0 ? transfer(energy, v(k + j - 1))
                        : inverse(transfer(energy, v(k - j)));
    t.left_multiply(step);
    trail.matrices.push_back(t.matrix());
    trail.log_scales.push_back(t.log_scale());
  }
  return trail;
}

}  // namespace detail

}  // namespace uhscan
