#pragma once

// Potential model families and the shift dynamics on them.
//
// Families: constant, periodic, almost_mathieu (v(n) = 2 c cos(2 pi (n a +
// th))), sturmian (v(n) = c when (n a + th) mod 1 lands in [1-a, 1)),
// random_iid (uniform on [-bound, bound], per-site hashed so access is
// random-access deterministic), and file-backed.

#include "uhscan/potential.hpp"

namespace uhscan {

struct HullSpec {
  std::string family;     // one of the families above
  json params;            // family-specific parameters
  double bound = 0.0;     // sup-norm bound of every sample of the family

  static HullSpec constant(double value);
  static HullSpec periodic(std::vector<double> cycle);
  static HullSpec almost_mathieu(double coupling, double frequency,
                                 double phase);
  static HullSpec sturmian(double coupling, double frequency, double phase);
  static HullSpec random_iid(double bound, std::uint64_t seed);
  static HullSpec from_file(const std::string& path);

  static HullSpec from_json(const json& j);
  json to_json() const;
};

// Instantiate the sampler for a hull point.
PotentialSource make_source(const HullSpec& spec);

// The shift: (T^m v)(n) = v(n + m).  Exact on samples; descriptor records
// the accumulated offset.
PotentialSource shift_source(const PotentialSource& src, long m);

// Finitely many points of the hull of the model, used for phase-independence
// experiments.  For quasi-periodic families these are `count` distinct
// phases th_j = th + j / (2 count); for periodic/random/file sources they
// are integer shifts.  Element 0 is the designated base point.
std::vector<PotentialSource> hull_samples(const HullSpec& spec, int count);

}  // namespace uhscan
