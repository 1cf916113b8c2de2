#pragma once

// Uniform hyperbolicity detection for the transfer cocycle at a fixed energy.
//
// Two independent tests are provided.
//
// certify(): attempts to build a hyperbolicity certificate over a site
// window.  It fits uniform exponential growth log||A_n(k)|| >= log c + n log
// lambda to the worst-case norm profile, estimates the contracting /
// expanding direction fields from deep products, and then re-verifies
// equivariance of the fields, contraction along them, a uniform angular gap,
// and an invariant-cone inequality.  Success is strong evidence the energy
// lies in the resolvent set.
//
// bounded_witness_search(): hunts for the opposite situation - a site and a
// unit vector whose entire forward and backward orbit under the cocycle
// stays small.  A witness with small max log norm is evidence the energy
// lies in the spectrum; no bounded orbit exists when the cocycle is
// uniformly hyperbolic.

#include <optional>
#include <variant>

#include "uhscan/cocycle.hpp"

namespace uhscan {

// Result of the exponential growth fit over a window.
struct GrowthFit {
  bool pass = false;
  double log_lambda = 0.0;  // fitted uniform rate, > 0 when pass
  double log_c = 0.0;       // largest constant with the bound holding on all
                            // sampled depths
  long worst_site = 0;      // site attaining the binding worst-case norm
  // Worst-case profile g(n) = min over sites of log||A_n(k)||, n = 1..depth.
  std::vector<double> profile;
};

// growth_test fits the largest lambda such that the worst-case profile grows
// at least linearly with slope log lambda over the deeper half of the
// window.  The fitted slope is the minimum over all half-depth chords
//     (g(n) - g(n - depth/2)) / (depth/2),   depth/2 < n <= depth,
// which is stable under depth refinement and is not fooled by bounded
// oscillation of the norms.  pass requires log lambda > tol_growth.
GrowthFit growth_test(const PotentialSource& src, double energy,
                      Interval window, int depth, double tol_growth = 1e-3);

// Direction field estimates at one site: s from the contraction direction of
// the forward product at full depth, u from the backward product, plus the
// Cauchy increments between depth-1 and depth estimates (these decay like
// lambda^{-2 depth} under uniform hyperbolicity).
struct SectionPair {
  ProjPoint u;   // unstable direction at the site
  ProjPoint s;   // stable direction at the site
  double u_resid = 0.0;  // distance between depth-1 and depth estimates
  double s_resid = 0.0;
};

// Estimate both direction fields at every site of the window.  Throws
// DirectionsUndefined (carrying the site in the message) when a window
// product is numerically a rotation.
std::vector<SectionPair> estimate_sections(const PotentialSource& src,
                                           double energy, Interval window,
                                           int depth);

struct UHCertificate {
  double energy = 0.0;
  Interval window;
  int depth = 0;

  double lambda = 1.0;      // certified growth rate, > 1
  double c_const = 0.0;     // growth constant, log c + n log lambda <= g(n)
  double gap_gamma = 0.0;   // minimum angular gap between u and s
  double beta = 0.0;        // min over sites of ||A_depth(k)|| (may be inf)
  double log_beta = 0.0;    //   ... its log, always finite
  bool cone_ok = false;     // tan(gap/2) > 2 / (beta - 1/beta)

  double max_section_resid = 0.0;   // worst Cauchy increment of the fields
  double max_invariance_err = 0.0;  // worst one-step equivariance defect
  double log_c_contract = 0.0;      // measured constant in the contraction
                                    // bound along the fields, taken over the
                                    // fp-measurable block depth (~18/log
                                    // lambda capped at depth)

  std::vector<SectionPair> sections;      // per site, window.lo .. window.hi
  std::vector<double> worst_log_norms;    // g(n), n = 1..depth

  json model;  // descriptor of the potential the certificate refers to
};

// Why certification failed, serializable as
//   {"reason": ..., "first_violation_site": ..., "details": {...}}.
struct FailureReport {
  enum class Reason { growth, directions_undefined, gap, invariance, cone };

  Reason reason = Reason::growth;
  long first_violation_site = 0;
  json details;

  json to_json() const;
};

const char* to_string(FailureReport::Reason r);

using CertifyResult = std::variant<UHCertificate, FailureReport>;

// Full certification pipeline; checks run in the order growth, section
// existence, gap, equivariance + contraction, cone, and the first failed
// check is reported.
CertifyResult certify(const PotentialSource& src, double energy,
                      Interval window, int depth, double tol_growth = 1e-3,
                      double inv_tol = 1e-6);

// A bounded-orbit candidate: at `site`, the unit vector in direction `dir`
// satisfies log||A_n(site) v|| <= max_log_norm for all |n| <= depth.
struct BoundedWitness {
  long site = 0;
  ProjPoint dir;
  double max_log_norm = 0.0;
  int depth = 0;

  json to_json() const;
};

// Minimize, over sites of `site_range` (subsampled at stride
// max(1, length/256)) and over a uniform `angle_grid` of directions refined
// by golden-section search to 1e-10, the maximum of log||A_n(k) v|| over
// |n| <= depth.  Deterministic; independent of thread count.
BoundedWitness bounded_witness_search(const PotentialSource& src,
                                      double energy, Interval site_range,
                                      int depth, int angle_grid = 1024);

}  // namespace uhscan
