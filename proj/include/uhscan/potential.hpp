#pragma once

// Potential sources: bounded real functions on the integer lattice, sampled
// on demand.  A source carries its sup-norm bound and a JSON descriptor that
// records how it was built (model family, parameters, shift, seed) so every
// report can echo full provenance.

#include <functional>
#include <nlohmann/json.hpp>

#include "uhscan/common.hpp"

namespace uhscan {

using json = nlohmann::ordered_json;

struct PotentialSource {
  // Deterministic: repeated calls with the same n return the same value.
  std::function<double(long)> sample_fn;
  double bound = 0.0;
  json descriptor;

  // Bound-checked sample; throws PotentialBoundViolation when the value
  // escapes [-bound, bound] (allowing a hair of rounding slack).
  double sample(long n) const;
};

namespace detail {

// Dense cache of samples over a window, for inner loops that revisit the
// same sites many times.  Falls back to the source outside the window.
class PotentialCache {
 public:
  PotentialCache(const PotentialSource& src, Interval window);

  double operator()(long n) const {
    if (n >= window_.lo && n <= window_.hi)
      return values_[static_cast<size_t>(n - window_.lo)];
    return src_->sample(n);
  }

 private:
  const PotentialSource* src_;
  Interval window_;
  std::vector<double> values_;
};

}  // namespace detail

}  // namespace uhscan
