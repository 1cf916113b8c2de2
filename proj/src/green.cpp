#include "uhscan/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uhscan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Grow a solution of the three-term recurrence in log-magnitude form from
// the anchored pair (x(k0), x(k0-1)); dir = +1 extends upward to range.hi,
// dir = -1 downward to range.lo.  The running pair is rescaled whenever it
// leaves [1e-200, 1e200], so arbitrarily strong growth or decay is safe.
ScaledSeq grow_scaled(const detail::PotentialCache& v, double energy,
                      Interval range, long k0, double x_k0, double x_k0m1,
                      int dir) {
  ScaledSeq seq;
  seq.first = range.lo;
  auto n = static_cast<size_t>(range.length());
  seq.log_abs.assign(n, -kInf);
  seq.sign.assign(n, 0);

  auto store = [&](long site, double value, double offset) {
    if (!seq.covers(site)) return;
    auto i = static_cast<size_t>(site - seq.first);
    if (value == 0.0) {
      seq.log_abs[i] = -kInf;
      seq.sign[i] = 0;
    } else {
      seq.log_abs[i] = offset + std::log(std::fabs(value));
      seq.sign[i] = value > 0.0 ? 1 : -1;
    }
  };

  double offset = 0.0;
  store(k0, x_k0, offset);
  store(k0 - 1, x_k0m1, offset);
  auto rescale = [&](double& prev, double& cur) {
    double mag = std::max(std::fabs(prev), std::fabs(cur));
    if (mag > 1e200 || (mag < 1e-200 && mag > 0.0)) {
      prev /= mag;
      cur /= mag;
      offset += std::log(mag);
    }
  };
  if (dir > 0) {
    double prev = x_k0m1, cur = x_k0;  // x(site-1), x(site)
    for (long site = k0; site < range.hi; ++site) {
      double next = (energy - v(site)) * cur - prev;
      prev = cur;
      cur = next;
      rescale(prev, cur);
      store(site + 1, cur, offset);
    }
  } else {
    double prev = x_k0, cur = x_k0m1;  // x(site+1), x(site)
    for (long site = k0 - 1; site > range.lo; --site) {
      double next = (energy - v(site)) * cur - prev;
      prev = cur;
      cur = next;
      rescale(prev, cur);
      store(site - 1, cur, offset);
    }
  }
  return seq;
}

double ScaledSeq_value(const ScaledSeq& s, long n) {
  int sg = s.sign_at(n);
  if (sg == 0) return 0.0;
  return sg * std::exp(s.log_at(n));
}

// Wronskian W(n) = r(n) l(n-1) - r(n-1) l(n) in log-safe form.
struct LogSigned {
  double log = -kInf;
  int sign = 0;
};

LogSigned wronskian_at(const ScaledSeq& l, const ScaledSeq& r, long n) {
  double t1 = r.log_at(n) + l.log_at(n - 1);
  int s1 = r.sign_at(n) * l.sign_at(n - 1);
  double t2 = r.log_at(n - 1) + l.log_at(n);
  int s2 = r.sign_at(n - 1) * l.sign_at(n);
  double top = std::max(t1, t2);
  if (top == -kInf) return {};
  double w = (s1 != 0 ? s1 * std::exp(t1 - top) : 0.0) -
             (s2 != 0 ? s2 * std::exp(t2 - top) : 0.0);
  if (w == 0.0) return {};
  return {top + std::log(std::fabs(w)), w > 0.0 ? 1 : -1};
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace

double ScaledSeq::value(long n) const { return ScaledSeq_value(*this, n); }

double GreenKernel::entry(long p, long q) const {
  long a = std::min(p, q), b = std::max(p, q);
  int sg = u_left.sign_at(a) * u_right.sign_at(b);
  if (sg == 0) return 0.0;
  return sg * std::exp(u_left.log_at(a) + u_right.log_at(b));
}

json GreenKernel::header_json() const {
  return json{{"energy", energy},
              {"window", {window.lo, window.hi}},
              {"decay_rate", decay_rate},
              {"decay_const", decay_const},
              {"fit_residual", fit_residual},
              {"wronskian_drift", wronskian_drift},
              {"model", model}};
}

GreenKernel build_kernel(const PotentialSource& src, const UHCertificate& cert,
                         Interval window) {
  if (window.length() < 8)
    throw std::invalid_argument("build_kernel: window too small");
  if (!window.contains(0))
    throw std::invalid_argument(
        "build_kernel: window must contain the normalization site 0");
  if (cert.window.lo > window.lo - cert.depth ||
      cert.window.hi < window.hi + cert.depth)
    throw std::invalid_argument(
        "build_kernel: certificate window must cover the kernel window with "
        "margin >= depth");

  auto section_at = [&](long site) -> const SectionPair& {
    return cert.sections[static_cast<size_t>(site - cert.window.lo)];
  };
  if (distance(section_at(0).u, section_at(0).s) < 1e-8)
    throw DegenerateDirections(
        "stable and unstable directions coincide at site 0");

  detail::PotentialCache cache(src, {window.lo - 2, window.hi + 2});
  Interval padded{window.lo - 1, window.hi + 1};

  // Left-decaying solution: seeded in the unstable direction at the left
  // edge, grown forward; its backward orbit contracts, so it is the solution
  // that dies out to the left.
  ProjPoint ul = section_at(window.lo).u;
  ScaledSeq left = grow_scaled(cache, cert.energy, padded, window.lo, ul.cos(),
                               ul.sin(), +1);
  // Right-decaying solution: seeded in the stable direction at the right
  // edge, grown backward.
  ProjPoint sr = section_at(window.hi + 1).s;
  ScaledSeq right = grow_scaled(cache, cert.energy, padded, window.hi + 1,
                                sr.cos(), sr.sin(), -1);

  // Normalize the Wronskian to 1 at site 0 by rescaling the right solution.
  LogSigned w0 = wronskian_at(left, right, 0);
  if (w0.sign == 0)
    throw DegenerateDirections(
        "solutions are numerically proportional; Wronskian vanished");
  for (double& lg : right.log_abs) lg -= w0.log;
  if (w0.sign < 0)
    for (int& sg : right.sign) sg = -sg;

  GreenKernel g;
  g.energy = cert.energy;
  g.window = window;
  g.model = cert.model;
  g.u_left = std::move(left);
  g.u_right = std::move(right);

  double drift = 0.0;
  for (long n = window.lo; n <= window.hi + 1; ++n) {
    LogSigned w = wronskian_at(g.u_left, g.u_right, n);
    double val = w.sign == 0 ? 0.0 : w.sign * std::exp(w.log);
    drift = std::max(drift, std::fabs(val - 1.0));
  }
  g.wronskian_drift = drift;
  if (!(drift <= 1e-6))
    throw ConsistencyViolation("Wronskian drifted by " +
                               std::to_string(drift) +
                               " across the kernel window");

  // Off-diagonal decay fit over all pairs in the middle half of the window.
  long mid = (window.lo + window.hi) / 2;
  long quarter = window.length() / 4;
  long flo = std::max(window.lo, mid - quarter);
  long fhi = std::min(window.hi, mid + quarter);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  long cnt = 0;
  for (long p = flo; p <= fhi; ++p) {
    for (long q = p; q <= fhi; ++q) {
      if (g.u_left.sign_at(p) == 0 || g.u_right.sign_at(q) == 0) continue;
      double y = g.u_left.log_at(p) + g.u_right.log_at(q);
      double x = static_cast<double>(q - p);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++cnt;
    }
  }
  if (cnt < 4)
    throw ConsistencyViolation("too few kernel samples for the decay fit");
  double denom = cnt * sxx - sx * sx;
  double slope = (cnt * sxy - sx * sy) / denom;
  double inter = (sy - slope * sx) / cnt;
  g.decay_rate = std::exp(slope);
  // Inflate the constant so the envelope holds on every sampled pair.
  double max_resid = 0.0;
  for (long p = flo; p <= fhi; ++p) {
    for (long q = p; q <= fhi; ++q) {
      if (g.u_left.sign_at(p) == 0 || g.u_right.sign_at(q) == 0) continue;
      double y = g.u_left.log_at(p) + g.u_right.log_at(q);
      double r = y - (inter + slope * static_cast<double>(q - p));
      max_resid = std::max(max_resid, std::fabs(r));
    }
  }
  g.fit_residual = max_resid / std::log(10.0);
  g.decay_const = std::exp(inter + max_resid);
  return g;
}

std::vector<double> apply(const GreenKernel& g, const std::vector<double>& x) {
  auto n = static_cast<size_t>(g.window.length());
  if (x.size() != n)
    throw std::invalid_argument("apply: vector length must match the window");
  std::vector<double> y(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    long p = g.window.lo + static_cast<long>(i);
    double acc = 0.0;
    for (size_t j = 0; j < n; ++j) {
      if (x[j] == 0.0) continue;
      acc += g.entry(p, g.window.lo + static_cast<long>(j)) * x[j];
    }
    y[i] = acc;
  }
  return y;
}

double verify_inverse(const PotentialSource& src, const GreenKernel& g,
                      int trials, unsigned seed) {
  auto n = static_cast<size_t>(g.window.length());
  long third = g.window.length() / 3;
  long ilo = g.window.lo + third;
  long ihi = g.window.hi - third;
  detail::PotentialCache cache(src, {g.window.lo - 1, g.window.hi + 1});

  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> x(n);
    double nrm = 0.0;
    for (size_t i = 0; i < n; ++i) {
      std::uint64_t h = mix64((static_cast<std::uint64_t>(seed) << 32) ^
                              (static_cast<std::uint64_t>(t) << 20) ^ i);
      x[i] = 2.0 * (static_cast<double>(h >> 11) * 0x1.0p-53) - 1.0;
      nrm += x[i] * x[i];
    }
    nrm = std::sqrt(nrm);
    for (double& v : x) v /= nrm;

    std::vector<double> y = uhscan::apply(g, x);
    auto at = [&](long p) -> double {
      if (p < g.window.lo || p > g.window.hi) return 0.0;
      return y[static_cast<size_t>(p - g.window.lo)];
    };
    double err2 = 0.0;
    for (long p = ilo; p <= ihi; ++p) {
      double hy = at(p + 1) + at(p - 1) + (cache(p) - g.energy) * at(p);
      double r = hy - x[static_cast<size_t>(p - g.window.lo)];
      err2 += r * r;
    }
    worst = std::max(worst, std::sqrt(err2));
  }
  return worst;
}

double operator_norm_bound(const GreenKernel& g) {
  double best = 0.0;
  for (long p = g.window.lo; p <= g.window.hi; ++p) {
    double row = 0.0;
    for (long q = g.window.lo; q <= g.window.hi; ++q)
      row += std::fabs(g.entry(p, q));
    best = std::max(best, row);
  }
  return best;
}

}  // namespace uhscan
