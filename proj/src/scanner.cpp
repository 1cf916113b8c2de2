#include "uhscan/scanner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>

#include "uhscan/parallel.hpp"

namespace uhscan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string shortest_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace

double ScanSettings::witness_threshold() const {
  return std::log(witness_poly_bound * depth);
}

// parallelism is deliberately not serialized: it is an execution detail and
// reports must be byte-identical for any thread count.
json ScanSettings::to_json() const {
  return json{{"depth", depth},
              {"window_halfwidth", window_halfwidth},
              {"tol_growth", tol_growth},
              {"inv_tol", inv_tol},
              {"angle_grid", angle_grid},
              {"witness_poly_bound", witness_poly_bound},
              {"refine_factor", refine_factor}};
}

ScanSettings ScanSettings::from_json(const json& j) {
  ScanSettings s;
  s.depth = j.value("depth", s.depth);
  s.window_halfwidth = j.value("window_halfwidth", s.window_halfwidth);
  s.tol_growth = j.value("tol_growth", s.tol_growth);
  s.inv_tol = j.value("inv_tol", s.inv_tol);
  s.angle_grid = j.value("angle_grid", s.angle_grid);
  s.witness_poly_bound = j.value("witness_poly_bound", s.witness_poly_bound);
  s.refine_factor = j.value("refine_factor", s.refine_factor);
  s.parallelism = j.value("parallelism", s.parallelism);
  return s;
}

const char* to_string(EnergyLabel l) {
  switch (l) {
    case EnergyLabel::resolvent: return "resolvent";
    case EnergyLabel::spectrum: return "spectrum";
    case EnergyLabel::inconclusive: return "inconclusive";
  }
  return "?";
}

json EnergyResult::to_json() const {
  return json{{"E", energy},
              {"label", to_string(label)},
              {"lambda", lambda},
              {"gap", gap},
              {"witness_log_norm", witness_log_norm},
              {"decay_rate", decay_rate},
              {"note", note}};
}

EnergyResult classify_energy(const PotentialSource& src, double energy,
                             const ScanSettings& settings) {
  EnergyResult res;
  res.energy = energy;

  CertifyResult cr = certify(src, energy, settings.window(), settings.depth,
                             settings.tol_growth, settings.inv_tol);
  BoundedWitness w = bounded_witness_search(
      src, energy, settings.window(), settings.depth, settings.angle_grid);
  res.witness_log_norm = w.max_log_norm;

  bool cert_ok = std::holds_alternative<UHCertificate>(cr);
  bool wit_ok = w.max_log_norm <= settings.witness_threshold();

  if (cert_ok && wit_ok) {
    // Near a band edge hyperbolicity is genuine but weak: lambda^depth can
    // stay under the polynomial bound, so an orbit really is that flat over
    // this depth and both tests passing is not by itself contradictory; the
    // certificate is the stronger evidence and wins.  It IS contradictory
    // when the certificate's own constants put every orbit above the
    // measured witness: any unit vector has a component >= 1/2 along one of
    // the two fields, and that component alone reaches
    // (1/2) sin(gap)^2 c lambda^depth at full depth.
    const auto& cert = std::get<UHCertificate>(cr);
    double floor_log = std::log(0.5) +
                       2.0 * std::log(std::sin(cert.gap_gamma)) +
                       std::log(cert.c_const) +
                       settings.depth * std::log(cert.lambda) - 1.0;
    if (w.max_log_norm < floor_log)
      throw ConsistencyViolation(
          "bounded orbit " + std::to_string(w.max_log_norm) +
          " below the certified growth floor " + std::to_string(floor_log) +
          " at E = " + std::to_string(energy));
  }

  if (cert_ok) {
    const auto& cert = std::get<UHCertificate>(cr);
    res.label = EnergyLabel::resolvent;
    if (wit_ok) res.note = "weak hyperbolicity: orbit bound also held";
    res.lambda = cert.lambda;
    res.gap = cert.gap_gamma;
    // A certified energy admits an exponentially decaying kernel; record its
    // decay rate when the window leaves room for the margin.
    long margin = settings.depth;
    Interval kw{settings.window().lo + margin, settings.window().hi - margin};
    if (kw.length() >= 16 && kw.contains(0)) {
      try {
        GreenKernel g = build_kernel(src, cert, kw);
        res.decay_rate = g.decay_rate;
      } catch (const ConsistencyViolation&) {
        throw;
      } catch (const std::exception& e) {
        res.note = std::string("kernel: ") + e.what();
      }
    }
  } else {
    const auto& fail = std::get<FailureReport>(cr);
    res.label = wit_ok ? EnergyLabel::spectrum : EnergyLabel::inconclusive;
    if (!wit_ok)
      res.note = std::string("certify: ") + to_string(fail.reason) +
                 " at site " + std::to_string(fail.first_violation_site);
  }
  return res;
}

std::string SpectrumReport::to_csv() const {
  std::string out = "# settings: " + settings.to_json().dump() +
                    " model: " + model.dump() + "\n";
  out += "E,label,lambda,gap,witness_log_norm,decay_rate\n";
  for (const EnergyResult& r : results) {
    out += shortest_double(r.energy);
    out += ',';
    out += to_string(r.label);
    out += ',';
    out += shortest_double(r.lambda);
    out += ',';
    out += shortest_double(r.gap);
    out += ',';
    out += shortest_double(r.witness_log_norm);
    out += ',';
    out += shortest_double(r.decay_rate);
    out += '\n';
  }
  return out;
}

json SpectrumReport::to_json() const {
  json jr = json::array();
  for (const EnergyResult& r : results) jr.push_back(r.to_json());
  json jb = json::array();
  for (auto& [lo, hi] : bands) jb.push_back(json::array({lo, hi}));
  return json{{"model", model},       {"settings", settings.to_json()},
              {"e_lo", e_lo},         {"e_hi", e_hi},
              {"grid_step", grid_step}, {"results", jr},
              {"bands", jb}};
}

double SpectrumReport::band_distance(double energy) const {
  if (bands.empty()) return kInf;
  double best = kInf;
  for (auto& [lo, hi] : bands) {
    double d = energy < lo ? lo - energy : (energy > hi ? energy - hi : 0.0);
    best = std::min(best, d);
  }
  return best;
}

namespace {

EnergyResult classify_or_note(const PotentialSource& src, double energy,
                              const ScanSettings& settings) {
  try {
    return classify_energy(src, energy, settings);
  } catch (const ConsistencyViolation&) {
    throw;  // a library defect; never downgraded
  } catch (const std::exception& e) {
    EnergyResult r;
    r.energy = energy;
    r.label = EnergyLabel::inconclusive;
    r.note = std::string("error: ") + e.what();
    return r;
  }
}

}  // namespace

SpectrumReport scan(const PotentialSource& src, double e_lo, double e_hi,
                    double grid_step, const ScanSettings& settings) {
  if (!(grid_step > 0.0))
    throw std::invalid_argument("scan: grid_step must be positive");
  if (!(e_lo <= e_hi))
    throw std::invalid_argument("scan: energy range is empty");

  SpectrumReport rep;
  rep.model = src.descriptor;
  rep.settings = settings;
  rep.e_lo = e_lo;
  rep.e_hi = e_hi;
  rep.grid_step = grid_step;

  auto count =
      static_cast<size_t>(std::floor((e_hi - e_lo) / grid_step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (size_t i = 0; i < count; ++i)
    grid[i] = e_lo + static_cast<double>(i) * grid_step;

  std::vector<EnergyResult> coarse(count);
  parallel_for_index(count, settings.parallelism, [&](size_t i) {
    coarse[i] = classify_or_note(src, grid[i], settings);
  });

  // Refine around label changes on a grid finer by refine_factor.
  std::vector<double> fine;
  if (settings.refine_factor > 1) {
    double fs = grid_step / settings.refine_factor;
    for (size_t i = 0; i + 1 < count; ++i) {
      if (coarse[i].label == coarse[i + 1].label) continue;
      for (int j = 1; j < settings.refine_factor; ++j)
        fine.push_back(grid[i] + fs * j);
    }
  }
  std::vector<EnergyResult> refined(fine.size());
  parallel_for_index(fine.size(), settings.parallelism, [&](size_t i) {
    refined[i] = classify_or_note(src, fine[i], settings);
  });

  rep.results = std::move(coarse);
  rep.results.insert(rep.results.end(), refined.begin(), refined.end());
  std::sort(rep.results.begin(), rep.results.end(),
            [](const EnergyResult& a, const EnergyResult& b) {
              return a.energy < b.energy;
            });

  // Maximal runs of spectrum labels become bands.
  bool in_band = false;
  double band_lo = 0.0, band_hi = 0.0;
  for (const EnergyResult& r : rep.results) {
    if (r.label == EnergyLabel::spectrum) {
      if (!in_band) {
        in_band = true;
        band_lo = r.energy;
      }
      band_hi = r.energy;
    } else if (in_band) {
      rep.bands.emplace_back(band_lo, band_hi);
      in_band = false;
    }
  }
  if (in_band) rep.bands.emplace_back(band_lo, band_hi);
  return rep;
}

std::vector<double> inclusion_check(const SpectrumReport& reference,
                                    const SpectrumReport& probe, double eps) {
  if (reference.e_lo != probe.e_lo || reference.e_hi != probe.e_hi ||
      reference.grid_step != probe.grid_step)
    throw GridMismatch("inclusion_check: reports use different energy grids");
  if (reference.settings.to_json() != probe.settings.to_json())
    throw GridMismatch("inclusion_check: reports use different settings");

  std::vector<double> violations;
  for (const EnergyResult& r : probe.results) {
    if (r.label != EnergyLabel::spectrum) continue;
    if (reference.band_distance(r.energy) > eps)
      violations.push_back(r.energy);
  }
  return violations;
}

double section_consistency(const PotentialSource& src,
                           const SpectrumReport& report, long section_size,
                           int exclude_worst) {
  if (section_size < 1)
    throw std::invalid_argument("section_consistency: empty section");
  Interval range{-section_size / 2, -section_size / 2 + section_size - 1};
  std::vector<double> eig = eigenvalues(make_section(src, range));
  std::vector<double> dist;
  dist.reserve(eig.size());
  for (double e : eig) dist.push_back(report.band_distance(e));
  std::sort(dist.begin(), dist.end(), std::greater<double>());
  auto skip = static_cast<size_t>(std::max(exclude_worst, 0));
  if (skip >= dist.size()) return 0.0;
  return dist[skip];
}

}  // namespace uhscan
