#pragma once

// Shared error types and small utility structs used across the library.
//
// All numerical-consistency failures are reported through exceptions derived
// from std::runtime_error so callers can distinguish "the computation told us
// something is wrong" (these types) from precondition misuse
// (std::invalid_argument) and I/O trouble (std::system_error / runtime_error
// raised by the serialization layer).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace uhscan {

// A matrix product drifted measurably away from determinant one.
struct DeterminantDrift : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Singular-value analysis was requested for a matrix whose norm is too close
// to 1 for the singular directions to be meaningful.
struct NearRotation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A section estimate could not be formed because some window product is
// numerically a rotation.
struct DirectionsUndefined : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A potential source returned a sample outside its declared bound.
struct PotentialBoundViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A scalar recurrence left the representable range.
struct Overflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A vector that must be normalized has numerically zero norm.
struct DegenerateNorm : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stable and unstable directions coincide to working precision; no basis of
// solutions can be built from them.
struct DegenerateDirections : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two reports that must share an energy grid do not.
struct GridMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two independent tests reached contradictory conclusions at the same energy.
// This is never swallowed: it indicates a defect in the library itself.
struct ConsistencyViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Closed integer interval [lo, hi] of lattice sites.
struct Interval {
  long lo = 0;
  long hi = 0;

  long length() const { return hi - lo + 1; }
  bool contains(long n) const { return lo <= n && n <= hi; }
  bool contains(const Interval& other) const {
    return lo <= other.lo && other.hi <= hi;
  }
};

inline bool operator==(const Interval& a, const Interval& b) {
  return a.lo == b.lo && a.hi == b.hi;
}

// Real sequence supported on a contiguous index range.  Used for solutions of
// the difference equation and for finitely supported test vectors.
struct Sequence {
  long first = 0;
  std::vector<double> values;

  long lo() const { return first; }
  long hi() const { return first + static_cast<long>(values.size()) - 1; }
  long size() const { return static_cast<long>(values.size()); }
  bool covers(long n) const { return n >= lo() && n <= hi(); }

  double at(long n) const { return values[static_cast<size_t>(n - first)]; }
  double& at(long n) { return values[static_cast<size_t>(n - first)]; }

  // Value with zero extension outside the support.
  double at_or_zero(long n) const { return covers(n) ? at(n) : 0.0; }
};

double l2_norm(const Sequence& u);

}  // namespace uhscan
