#include "uhscan/potential.hpp"

#include <cmath>

namespace uhscan {

double PotentialSource::sample(long n) const {
  double v = sample_fn(n);
  // Tiny slack: trig-based samplers can land a rounding error outside the
  // nominal bound.
  if (!(std::fabs(v) <= bound * (1.0 + 1e-12) + 1e-300))
    throw PotentialBoundViolation(
        "sample " + std::to_string(v) + " at site " + std::to_string(n) +
        " exceeds declared bound " + std::to_string(bound));
  return v;
}

namespace detail {

PotentialCache::PotentialCache(const PotentialSource& src, Interval window)
    : src_(&src), window_(window) {
  values_.reserve(static_cast<size_t>(window.length()));
  for (long n = window.lo; n <= window.hi; ++n)
    values_.push_back(src.sample(n));
}

}  // namespace detail

}  // namespace uhscan
