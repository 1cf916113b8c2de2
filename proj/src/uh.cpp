#include "uhscan/uh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace uhscan {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Direction data at one site extracted from a product trail: the contraction
// direction at full depth, the previous-depth estimate for the Cauchy
// residual, and per-step data needed by the contraction checks.
struct TrailAnalysis {
  ProjPoint dir;        // contraction direction at full depth
  double resid = 0.0;   // distance(depth-1 estimate, depth estimate)
  double log_norm_depth = 0.0;
};

TrailAnalysis analyze_trail(const detail::ProductTrail& trail) {
  size_t d = trail.matrices.size();
  auto dir_at = [&](size_t idx) {
    double log_true = trail.log_norm(idx);
    if (!(log_true >= std::log1p(1e-10)))
      throw NearRotation("window product at step " + std::to_string(idx + 1) +
                         " is numerically a rotation");
    return svd2(trail.matrices[idx], -1e18).contract_dir;
  };
  TrailAnalysis out;
  ProjPoint prev = dir_at(d - 2);
  out.dir = dir_at(d - 1);
  out.resid = distance(prev, out.dir);
  out.log_norm_depth = trail.log_norm(d - 1);
  return out;
}

// log || exp(log_scale) * M * unit(theta) ||
double log_apply_norm(const Mat2& m, double log_scale, const ProjPoint& p) {
  double c = p.cos(), s = p.sin();
  double x = m.a11 * c + m.a12 * s;
  double y = m.a21 * c + m.a22 * s;
  return log_scale + 0.5 * std::log(x * x + y * y);
}

// Minimal half-depth chord slope of a concave-ish growth profile g(n),
// n = 1..depth (index n-1), plus the n attaining it.  This is the uniform
// growth rate estimator: any bounded oscillation of log||A_n|| cancels out
// of a chord of length depth/2, while a genuinely sub-exponential profile
// drives some chord slope to zero.
std::pair<double, int> min_chord_slope(const std::vector<double>& g) {
  int depth = static_cast<int>(g.size());
  int n0 = depth / 2;
  double best = kInf;
  int best_n = depth;
  for (int n = n0 + 1; n <= depth; ++n) {
    double lo = g[static_cast<size_t>(n - n0 - 1)];  // g at step n - n0
    double slope = (g[static_cast<size_t>(n - 1)] - lo) / n0;
    if (slope < best) {
      best = slope;
      best_n = n;
    }
  }
  return {best, best_n};
}

}  // namespace

GrowthFit growth_test(const PotentialSource& src, double energy,
                      Interval window, int depth, double tol_growth) {
  if (depth < 2) throw std::invalid_argument("growth_test: depth must be >= 2");
  if (window.length() < 1)
    throw std::invalid_argument("growth_test: empty window");

  detail::PotentialCache cache(src, {window.lo, window.hi + depth});

  GrowthFit fit;
  fit.profile.assign(static_cast<size_t>(depth), kInf);
  std::vector<long> argmin(static_cast<size_t>(depth), window.lo);

  for (long k = window.lo; k <= window.hi; ++k) {
    ProductTracker t;
    for (int j = 1; j <= depth; ++j) {
      t.left_multiply(transfer(energy, cache(k + j - 1)));
      double ln = t.log_norm();
      auto idx = static_cast<size_t>(j - 1);
      if (ln < fit.profile[idx]) {
        fit.profile[idx] = ln;
        argmin[idx] = k;
      }
    }
  }

  auto [slope, chord_n] = min_chord_slope(fit.profile);
  fit.log_lambda = slope;
  fit.worst_site = argmin[static_cast<size_t>(chord_n - 1)];
  fit.pass = slope > tol_growth;

  // Largest constant keeping log c + n log lambda below the whole profile.
  double log_c = kInf;
  for (int n = 1; n <= depth; ++n)
    log_c = std::min(log_c, fit.profile[static_cast<size_t>(n - 1)] - n * slope);
  fit.log_c = log_c;
  return fit;
}

namespace {

// Section estimation that reports the failing site instead of throwing, for
// use inside certify().
struct SectionsOutcome {
  std::vector<SectionPair> sections;
  bool ok = true;
  long bad_site = 0;
  std::string error;
};

SectionsOutcome sections_over_window(const detail::PotentialCache& cache,
                                     double energy, Interval window,
                                     int depth, int contract_depth,
                                     std::vector<double>* contract_fwd,
                                     std::vector<double>* contract_bwd,
                                     std::vector<double>* fwd_depth_logs) {
  SectionsOutcome out;
  out.sections.reserve(static_cast<size_t>(window.length()));
  for (long k = window.lo; k <= window.hi; ++k) {
    detail::ProductTrail fwd =
        detail::product_trail(cache, energy, k, +1, depth);
    detail::ProductTrail bwd =
        detail::product_trail(cache, energy, k, -1, depth);
    try {
      TrailAnalysis fa = analyze_trail(fwd);
      TrailAnalysis ba = analyze_trail(bwd);
      SectionPair p;
      p.s = fa.dir;
      p.s_resid = fa.resid;
      p.u = ba.dir;
      p.u_resid = ba.resid;
      out.sections.push_back(p);
      if (fwd_depth_logs) fwd_depth_logs->push_back(fa.log_norm_depth);
      if (contract_fwd) {
        // Contraction of the stable direction under forward products and of
        // the unstable direction under backward products, up to the
        // fp-measurable block length chosen by the caller.
        for (int n = 1; n <= contract_depth; ++n) {
          auto i = static_cast<size_t>(n - 1);
          contract_fwd->push_back(
              log_apply_norm(fwd.matrices[i], fwd.log_scales[i], p.s));
          contract_bwd->push_back(
              log_apply_norm(bwd.matrices[i], bwd.log_scales[i], p.u));
        }
      }
    } catch (const NearRotation& e) {
      out.ok = false;
      out.bad_site = k;
      out.error = e.what();
      return out;
    }
  }
  return out;
}

}  // namespace

std::vector<SectionPair> estimate_sections(const PotentialSource& src,
                                           double energy, Interval window,
                                           int depth) {
  if (depth < 2)
    throw std::invalid_argument("estimate_sections: depth must be >= 2");
  detail::PotentialCache cache(src, {window.lo - depth, window.hi + depth});
  SectionsOutcome out = sections_over_window(cache, energy, window, depth,
                                             depth, nullptr, nullptr, nullptr);
  if (!out.ok)
    throw DirectionsUndefined("sections undefined at site " +
                              std::to_string(out.bad_site) + ": " + out.error);
  return out.sections;
}

const char* to_string(FailureReport::Reason r) {
  switch (r) {
    case FailureReport::Reason::growth: return "growth";
    case FailureReport::Reason::directions_undefined:
      return "directions_undefined";
    case FailureReport::Reason::gap: return "gap";
    case FailureReport::Reason::invariance: return "invariance";
    case FailureReport::Reason::cone: return "cone";
  }
  return "?";
}

json FailureReport::to_json() const {
  return json{{"reason", to_string(reason)},
              {"first_violation_site", first_violation_site},
              {"details", details}};
}

CertifyResult certify(const PotentialSource& src, double energy,
                      Interval window, int depth, double tol_growth,
                      double inv_tol) {
  if (depth < 2) throw std::invalid_argument("certify: depth must be >= 2");
  if (window.length() < 2)
    throw std::invalid_argument("certify: window too small");

  GrowthFit fit = growth_test(src, energy, window, depth, tol_growth);
  if (!fit.pass) {
    FailureReport f;
    f.reason = FailureReport::Reason::growth;
    f.first_violation_site = fit.worst_site;
    f.details = json{{"log_lambda", fit.log_lambda}, {"tol", tol_growth}};
    return f;
  }

  // Depth at which direction contraction is still measurable in doubles.
  // The true log||A_n s|| is about -n log lambda, while its floating-point
  // evaluation bottoms out on a noise floor near log||A_n|| + log(eps), so
  // past n ~ 18/log lambda every computed value is roundoff (and typically
  // spuriously positive).  Contraction over one such block at every site,
  // chained through the equivariant fields, gives contraction at all depths,
  // so nothing is lost by stopping at the measurable length.
  int contract_depth = depth;
  if (fit.log_lambda * depth > 15.0)
    contract_depth = std::max(1, static_cast<int>(15.0 / fit.log_lambda));

  detail::PotentialCache cache(src, {window.lo - depth, window.hi + depth});
  std::vector<double> contract_fwd, contract_bwd, fwd_logs;
  contract_fwd.reserve(static_cast<size_t>(window.length()) * contract_depth);
  contract_bwd.reserve(static_cast<size_t>(window.length()) * contract_depth);
  SectionsOutcome so = sections_over_window(cache, energy, window, depth,
                                            contract_depth, &contract_fwd,
                                            &contract_bwd, &fwd_logs);
  if (!so.ok) {
    FailureReport f;
    f.reason = FailureReport::Reason::directions_undefined;
    f.first_violation_site = so.bad_site;
    f.details = json{{"error", so.error}};
    return f;
  }

  UHCertificate cert;
  cert.energy = energy;
  cert.window = window;
  cert.depth = depth;
  cert.lambda = std::exp(fit.log_lambda);
  cert.c_const = std::exp(fit.log_c);
  cert.worst_log_norms = fit.profile;
  cert.sections = std::move(so.sections);
  cert.model = src.descriptor;

  // Angular gap between the two direction fields.
  double gap = kInf;
  long gap_site = window.lo;
  for (size_t i = 0; i < cert.sections.size(); ++i) {
    double d = distance(cert.sections[i].u, cert.sections[i].s);
    if (d < gap) {
      gap = d;
      gap_site = window.lo + static_cast<long>(i);
    }
    cert.max_section_resid = std::max(
        cert.max_section_resid,
        std::max(cert.sections[i].u_resid, cert.sections[i].s_resid));
  }
  cert.gap_gamma = gap;
  if (!(gap > 0.0)) {
    FailureReport f;
    f.reason = FailureReport::Reason::gap;
    f.first_violation_site = gap_site;
    f.details = json{{"gap", gap}};
    return f;
  }

  // One-step equivariance of both fields.
  for (long k = window.lo; k < window.hi; ++k) {
    auto i = static_cast<size_t>(k - window.lo);
    Mat2 a = transfer(energy, cache(k));
    double eu = distance(proj_act(a, cert.sections[i].u), cert.sections[i + 1].u);
    double es = distance(proj_act(a, cert.sections[i].s), cert.sections[i + 1].s);
    double e = std::max(eu, es);
    cert.max_invariance_err = std::max(cert.max_invariance_err, e);
    if (e > inv_tol) {
      FailureReport f;
      f.reason = FailureReport::Reason::invariance;
      f.first_violation_site = k;
      f.details = json{{"check", "equivariance"},
                       {"error", e},
                       {"tol", inv_tol}};
      return f;
    }
  }

  // Contraction along the fields: at the block depth the stable direction
  // must have genuinely shrunk forward and the unstable one backward.  The
  // measured constant in ||A_n s|| <= C lambda^{-n} is recorded as a
  // diagnostic (no sharp a-priori value for C exists at finite depth).
  double log_c_contract = -kInf;
  for (long k = window.lo; k <= window.hi; ++k) {
    auto base = static_cast<size_t>(k - window.lo) *
                static_cast<size_t>(contract_depth);
    for (int n = 1; n <= contract_depth; ++n) {
      double lf = contract_fwd[base + static_cast<size_t>(n - 1)];
      double lb = contract_bwd[base + static_cast<size_t>(n - 1)];
      log_c_contract =
          std::max(log_c_contract,
                   std::max(lf, lb) + static_cast<double>(n) * fit.log_lambda);
    }
    double deep_f = contract_fwd[base + static_cast<size_t>(contract_depth - 1)];
    double deep_b = contract_bwd[base + static_cast<size_t>(contract_depth - 1)];
    if (!(deep_f < 0.0) || !(deep_b < 0.0)) {
      FailureReport f;
      f.reason = FailureReport::Reason::invariance;
      f.first_violation_site = k;
      f.details = json{{"check", "contraction"},
                       {"forward_log", deep_f},
                       {"backward_log", deep_b}};
      return f;
    }
  }
  cert.log_c_contract = log_c_contract;

  // Invariant-cone inequality: with beta the worst full-depth expansion,
  // tan(gap/2) must exceed 2 / (beta - 1/beta).
  double log_beta = kInf;
  for (double l : fwd_logs) log_beta = std::min(log_beta, l);
  cert.log_beta = log_beta;
  cert.beta = std::exp(log_beta);  // may saturate to inf; log_beta is exact
  double rhs;
  if (log_beta > 300.0)
    rhs = 2.0 * std::exp(-log_beta);
  else if (log_beta <= 0.0)
    rhs = kInf;
  else
    rhs = 2.0 / (std::exp(log_beta) - std::exp(-log_beta));
  cert.cone_ok = std::tan(0.5 * gap) > rhs;
  if (!cert.cone_ok) {
    FailureReport f;
    f.reason = FailureReport::Reason::cone;
    f.first_violation_site = gap_site;
    f.details = json{{"tan_half_gap", std::tan(0.5 * gap)},
                     {"rhs", rhs},
                     {"log_beta", log_beta}};
    return f;
  }
  return cert;
}

json BoundedWitness::to_json() const {
  return json{{"site", site},
              {"angle", dir.angle},
              {"max_log_norm", max_log_norm},
              {"depth", depth}};
}

namespace {

// Per-matrix data for the orbit-norm minimization at one site:
// || exp(l) M u(theta) ||^2 = exp(2(l - L)) * (a + b cos 2theta + c sin 2theta)
// up to the common factor exp(2L).
struct OrbitTerm {
  double wa, wb, wc;
};

void push_term(std::vector<OrbitTerm>& terms, const Mat2& m, double l,
               double log_ref) {
  double w = 2.0 * (l - log_ref) < -745.0 ? 0.0 : std::exp(2.0 * (l - log_ref));
  double s11 = m.a11 * m.a11, s21 = m.a21 * m.a21;
  double s12 = m.a12 * m.a12, s22 = m.a22 * m.a22;
  double a = 0.5 * (s11 + s21 + s12 + s22);
  double b = 0.5 * (s11 + s21 - s12 - s22);
  double c = m.a11 * m.a12 + m.a21 * m.a22;
  terms.push_back({w * a, w * b, w * c});
}

struct SiteOrbit {
  std::vector<OrbitTerm> terms;  // sorted by typical magnitude, descending
  double log_ref = 0.0;          // common log offset L

  // Exact scaled squared max over the orbit at direction theta.
  double scaled_max(double cos2t, double sin2t) const {
    double m = 0.0;
    for (const OrbitTerm& t : terms) {
      double v = t.wa + t.wb * cos2t + t.wc * sin2t;
      if (v > m) m = v;
    }
    return m;
  }

  double log_value(double theta) const {
    double m = scaled_max(std::cos(2.0 * theta), std::sin(2.0 * theta));
    // The n = 0 term pins the orbit max at >= 1, so the log is >= 0; the
    // clamp keeps that exact when the scaled identity term underflows.
    return std::max(log_ref + 0.5 * std::log(std::max(m, 1e-300)), 0.0);
  }
};

SiteOrbit build_site_orbit(const detail::PotentialCache& cache, double energy,
                           long k, int depth) {
  detail::ProductTrail fwd = detail::product_trail(cache, energy, k, +1, depth);
  detail::ProductTrail bwd = detail::product_trail(cache, energy, k, -1, depth);
  double log_ref = 0.0;  // identity term has log 0
  for (int n = 0; n < depth; ++n) {
    log_ref = std::max(log_ref, fwd.log_scales[static_cast<size_t>(n)] +
                                    std::log(op_norm(
                                        fwd.matrices[static_cast<size_t>(n)])));
    log_ref = std::max(log_ref, bwd.log_scales[static_cast<size_t>(n)] +
                                    std::log(op_norm(
                                        bwd.matrices[static_cast<size_t>(n)])));
  }
  SiteOrbit orbit;
  orbit.log_ref = log_ref;
  orbit.terms.reserve(static_cast<size_t>(2 * depth + 1));
  push_term(orbit.terms, Mat2{}, 0.0, log_ref);
  for (int n = 0; n < depth; ++n) {
    auto i = static_cast<size_t>(n);
    push_term(orbit.terms, fwd.matrices[i], fwd.log_scales[i], log_ref);
    push_term(orbit.terms, bwd.matrices[i], bwd.log_scales[i], log_ref);
  }
  // Big terms first so the pruned sweep can bail out quickly.
  std::sort(orbit.terms.begin(), orbit.terms.end(),
            [](const OrbitTerm& x, const OrbitTerm& y) { return x.wa > y.wa; });
  return orbit;
}

}  // namespace

BoundedWitness bounded_witness_search(const PotentialSource& src,
                                      double energy, Interval site_range,
                                      int depth, int angle_grid) {
  if (depth < 1)
    throw std::invalid_argument("bounded_witness_search: depth must be >= 1");
  if (angle_grid < 4)
    throw std::invalid_argument("bounded_witness_search: angle grid too small");

  long stride = std::max(1L, site_range.length() / 256);
  detail::PotentialCache cache(
      src, {site_range.lo - depth, site_range.hi + depth});

  std::vector<double> cos2(static_cast<size_t>(angle_grid));
  std::vector<double> sin2(static_cast<size_t>(angle_grid));
  for (int j = 0; j < angle_grid; ++j) {
    double th = kPi * j / angle_grid;
    cos2[static_cast<size_t>(j)] = std::cos(2.0 * th);
    sin2[static_cast<size_t>(j)] = std::sin(2.0 * th);
  }

  double best_log = kInf;
  long best_site = site_range.lo;
  int best_j = 0;

  for (long k = site_range.lo; k <= site_range.hi; k += stride) {
    SiteOrbit orbit = build_site_orbit(cache, energy, k, depth);
    // Scaled prune threshold local to this site's log offset.
    double tt = 2.0 * (best_log - orbit.log_ref);
    double prune = tt > 700.0 ? kInf : std::exp(std::max(tt, -660.0));
    for (int j = 0; j < angle_grid; ++j) {
      double c2 = cos2[static_cast<size_t>(j)];
      double s2 = sin2[static_cast<size_t>(j)];
      double m = 0.0;
      bool pruned = false;
      for (const OrbitTerm& t : orbit.terms) {
        double v = t.wa + t.wb * c2 + t.wc * s2;
        if (v > m) {
          m = v;
          if (m > prune) {
            pruned = true;
            break;
          }
        }
      }
      if (pruned) continue;
      double cand = std::max(
          orbit.log_ref + 0.5 * std::log(std::max(m, 1e-300)), 0.0);
      if (cand < best_log) {
        best_log = cand;
        best_site = k;
        best_j = j;
        tt = 2.0 * (best_log - orbit.log_ref);
        prune = tt > 700.0 ? kInf : std::exp(std::max(tt, -660.0));
      }
    }
  }

  // Golden-section refinement around the winning grid angle.
  SiteOrbit orbit = build_site_orbit(cache, energy, best_site, depth);
  double lo = kPi * best_j / angle_grid - kPi / angle_grid;
  double hi = kPi * best_j / angle_grid + kPi / angle_grid;
  const double inv_gold = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_gold * (hi - lo);
  double x2 = lo + inv_gold * (hi - lo);
  double f1 = orbit.log_value(x1);
  double f2 = orbit.log_value(x2);
  while (hi - lo > 1e-10) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_gold * (hi - lo);
      f1 = orbit.log_value(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_gold * (hi - lo);
      f2 = orbit.log_value(x2);
    }
  }
  double theta = 0.5 * (lo + hi);
  double refined = orbit.log_value(theta);

  BoundedWitness w;
  w.depth = depth;
  if (refined <= best_log) {
    w.site = best_site;
    w.dir = ProjPoint(theta);
    w.max_log_norm = refined;
  } else {
    w.site = best_site;
    w.dir = ProjPoint(kPi * best_j / angle_grid);
    w.max_log_norm = best_log;
  }
  return w;
}

}  // namespace uhscan
