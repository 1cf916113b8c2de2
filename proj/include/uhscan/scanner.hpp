#pragma once

// Energy-axis scanning: run both hyperbolicity tests at every grid energy,
// classify each point as resolvent / spectrum / inconclusive, refine near
// label changes, and assemble band intervals.

#include "uhscan/green.hpp"
#include "uhscan/models.hpp"
#include "uhscan/tridiag.hpp"

namespace uhscan {

struct ScanSettings {
  int depth = 64;
  long window_halfwidth = 256;       // site window [-w, w]
  double tol_growth = 1e-3;
  double inv_tol = 1e-6;
  int angle_grid = 1024;
  double witness_poly_bound = 4.0;   // spectrum accepts max log norm <=
                                     // log(poly_bound * depth)
  int refine_factor = 64;            // grid refinement near label changes
  int parallelism = 0;               // 0 = hardware concurrency

  Interval window() const { return {-window_halfwidth, window_halfwidth}; }
  double witness_threshold() const;

  json to_json() const;
  static ScanSettings from_json(const json& j);
};

enum class EnergyLabel { resolvent, spectrum, inconclusive };

const char* to_string(EnergyLabel l);

struct EnergyResult {
  double energy = 0.0;
  EnergyLabel label = EnergyLabel::inconclusive;

  double lambda = 0.0;            // certified growth rate (0 when absent)
  double gap = 0.0;               // certified angular gap (0 when absent)
  double witness_log_norm = 0.0;  // best bounded-orbit value found
  double decay_rate = 0.0;        // kernel decay at resolvent energies
                                  // (0 when not computed)
  std::string note;               // failure reason / propagated error text

  json to_json() const;
};

// Run certify() and bounded_witness_search() at one energy.  A certificate
// labels the point resolvent; otherwise a bounded orbit labels it spectrum;
// neither yields inconclusive with the certification failure recorded in
// `note`.  Both passing is possible near a band edge, where hyperbolicity
// is genuine but lambda^depth still fits under the polynomial orbit bound;
// the certificate wins there.  ConsistencyViolation is reserved for a true
// contradiction: a measured orbit below the growth floor implied by the
// certificate's own constants.
EnergyResult classify_energy(const PotentialSource& src, double energy,
                             const ScanSettings& settings);

struct SpectrumReport {
  json model;
  ScanSettings settings;
  double e_lo = 0.0, e_hi = 0.0;
  double grid_step = 0.0;

  std::vector<EnergyResult> results;          // ascending energy
  std::vector<std::pair<double, double>> bands;  // maximal spectrum runs

  std::string to_csv() const;
  json to_json() const;

  // Distance from E to the nearest band (0 inside one, +inf with no bands).
  double band_distance(double energy) const;
};

// Scan [e_lo, e_hi] at grid_step, then refine around every label change at
// grid_step / refine_factor.  Per-energy errors other than
// ConsistencyViolation are recorded as inconclusive with the reason noted;
// ConsistencyViolation always propagates.  Output is deterministic and
// independent of settings.parallelism.
SpectrumReport scan(const PotentialSource& src, double e_lo, double e_hi,
                    double grid_step, const ScanSettings& settings);

// Check that every spectrum-labeled energy of `probe` lies within eps of a
// band of `reference`.  Reports must share grid and settings, else
// GridMismatch.  Returns the violating energies (empty = pass).
std::vector<double> inclusion_check(const SpectrumReport& reference,
                                    const SpectrumReport& probe, double eps);

// Compare finite-section eigenvalues against the scanned bands: the largest
// distance from an eigenvalue of the centered size-`section_size` section to
// the nearest band, after discarding the `exclude_worst` largest distances
// (finite sections may carry a few boundary-localized eigenvalues inside
// gaps).
double section_consistency(const PotentialSource& src,
                           const SpectrumReport& report, long section_size,
                           int exclude_worst = 0);

}  // namespace uhscan
