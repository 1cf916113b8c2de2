#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <variant>
#include <vector>

#include "uhscan/green.hpp"
#include "uhscan/models.hpp"

using namespace uhscan;

namespace {

UHCertificate certified(const PotentialSource& src, double energy,
                        Interval window, int depth) {
  CertifyResult r = certify(src, energy, window, depth);
  REQUIRE(std::holds_alternative<UHCertificate>(r));
  return std::get<UHCertificate>(r);
}

// Independent oracle: column q of the inverse of the (H - E) section over
// `range` with Dirichlet ends, by the Thomas algorithm.  Valid as an oracle
// for the infinite-lattice kernel because far off the spectrum the
// truncation error decays exponentially in the distance to the ends.
std::vector<double> direct_column(const PotentialSource& src, double energy,
                                  Interval range, long q) {
  auto n = static_cast<size_t>(range.length());
  std::vector<double> d(n), rhs(n, 0.0), c(n, 0.0);
  for (size_t i = 0; i < n; ++i)
    d[i] = src.sample(range.lo + static_cast<long>(i)) - energy;
  rhs[static_cast<size_t>(q - range.lo)] = 1.0;
  for (size_t i = 1; i < n; ++i) {
    c[i - 1] = 1.0 / d[i - 1];
    d[i] -= c[i - 1];
    rhs[i] -= c[i - 1] * rhs[i - 1];
  }
  // After elimination row i reads d[i] x_i + x_{i+1} = rhs[i].
  for (size_t i = n; i-- > 0;) {
    if (i + 1 < n) rhs[i] -= rhs[i + 1];
    rhs[i] /= d[i];
  }
  return rhs;
}

}  // namespace

TEST_CASE("free kernel at E = 3 reproduces the closed form") {
  PotentialSource src = make_source(HullSpec::constant(0.0));
  UHCertificate cert = certified(src, 3.0, {-80, 80}, 20);
  GreenKernel g = build_kernel(src, cert, {-40, 40});

  const double diag = -0.44721359549995794;  // -1 / sqrt 5
  const double rate = 0.38196601125010515;   // 2 / (3 + sqrt 5)
  for (long n : {-35L, -10L, 0L, 7L, 35L})
    CHECK(g.entry(n, n) == doctest::Approx(diag).epsilon(1e-10));
  CHECK(g.decay_rate == doctest::Approx(rate).epsilon(1e-10));
  CHECK(g.decay_const == doctest::Approx(-diag).epsilon(1e-9));
  CHECK(g.fit_residual < 1e-9);
  CHECK(g.wronskian_drift < 1e-10);

  // Full closed form on a patch: G(p,q) = diag * rate^{|p-q|}.
  for (long p = -12; p <= 12; p += 3)
    for (long q = -12; q <= 12; q += 3) {
      double expect = diag * std::pow(rate, std::labs(p - q));
      CHECK(g.entry(p, q) == doctest::Approx(expect).epsilon(1e-9));
      CHECK(g.entry(p, q) == g.entry(q, p));
    }

  CHECK(verify_inverse(src, g) <= 1e-8);
  // Row sums of the exact kernel telescope to 1/(E - 2) = 1.
  CHECK(operator_norm_bound(g) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("free kernel far off the spectrum stays finite in log form") {
  PotentialSource src = make_source(HullSpec::constant(0.0));
  UHCertificate cert = certified(src, 10.0, {-50, 50}, 12);
  GreenKernel g = build_kernel(src, cert, {-26, 26});

  const double diag = -0.10206207261596575;  // -1 / sqrt 96
  const double rate = 0.1010205144336438;    // 2 / (10 + sqrt 96)
  CHECK(g.entry(0, 0) == doctest::Approx(diag).epsilon(1e-9));
  CHECK(g.decay_rate == doctest::Approx(rate).epsilon(1e-9));
  // Corner entry underflows to ~1e-61 but the log form keeps it exact.
  double corner = g.entry(-26, 26);
  CHECK(corner != 0.0);
  CHECK(std::log(std::fabs(corner)) ==
        doctest::Approx(std::log(-diag) + 52.0 * std::log(rate)).epsilon(1e-9));
  CHECK(verify_inverse(src, g) <= 1e-8);
}

TEST_CASE("random potential kernel agrees with a direct solve") {
  PotentialSource src = make_source(HullSpec::random_iid(1.0, 3));
  UHCertificate cert = certified(src, 5.0, {-60, 60}, 16);
  GreenKernel g = build_kernel(src, cert, {-30, 30});

  CHECK(g.wronskian_drift <= 1e-6);
  CHECK(g.decay_rate < 0.55);
  CHECK(g.decay_rate > 0.0);
  CHECK(verify_inverse(src, g) <= 1e-8);

  Interval big{-60, 60};
  for (long q : {-7L, 0L, 7L}) {
    std::vector<double> col = direct_column(src, 5.0, big, q);
    for (long p = -10; p <= 10; ++p) {
      double expect = col[static_cast<size_t>(p - big.lo)];
      CHECK(g.entry(p, q) == doctest::Approx(expect).epsilon(1e-8));
    }
  }

  // Envelope discipline on the fitted patch.
  for (long p = -15; p <= 15; ++p)
    for (long q = p; q <= 15; ++q)
      CHECK(std::fabs(g.entry(p, q)) <=
            g.decay_const * std::pow(g.decay_rate, q - p) * (1.0 + 1e-9));
}

TEST_CASE("kernel application matches entry-wise evaluation") {
  PotentialSource src = make_source(HullSpec::constant(0.0));
  UHCertificate cert = certified(src, 3.0, {-30, 30}, 10);
  GreenKernel g = build_kernel(src, cert, {-10, 10});

  std::vector<double> e(21, 0.0);
  e[13] = 1.0;  // basis vector at site 3
  std::vector<double> y = uhscan::apply(g, e);
  for (long p = -10; p <= 10; ++p)
    CHECK(y[static_cast<size_t>(p + 10)] == g.entry(p, 3));
  CHECK_THROWS_AS(uhscan::apply(g, std::vector<double>(5, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("kernel construction validates its inputs") {
  PotentialSource src = make_source(HullSpec::constant(0.0));
  UHCertificate cert = certified(src, 3.0, {-30, 30}, 10);
  CHECK_THROWS_AS(build_kernel(src, cert, {-2, 2}), std::invalid_argument);
  CHECK_THROWS_AS(build_kernel(src, cert, {5, 25}), std::invalid_argument);
  CHECK_THROWS_AS(build_kernel(src, cert, {-25, 25}), std::invalid_argument);
}

TEST_CASE("corrupted section data cannot slip through") {
  PotentialSource src = make_source(HullSpec::constant(0.0));
  UHCertificate cert = certified(src, 3.0, {-40, 40}, 12);

  UHCertificate merged = cert;
  auto at0 = static_cast<size_t>(0 - merged.window.lo);
  merged.sections[at0].s = merged.sections[at0].u;
  CHECK_THROWS_AS(build_kernel(src, merged, {-20, 20}),
                  DegenerateDirections);

  // Seeding the right solution in the unstable direction makes it
  // proportional to the left one, so the Wronskian degenerates: either it
  // vanishes outright or the normalized values are cancellation noise and
  // the drift check refuses.  (A small rotation of an edge seed, by
  // contrast, is undetectable in principle: the grown pair still solves the
  // recurrence exactly, so every Wronskian-based invariant holds, and the
  // contamination decays like lambda^{-2n} into the interior.)
  UHCertificate skewed = cert;
  auto edge = static_cast<size_t>(21 - skewed.window.lo);
  skewed.sections[edge].s = skewed.sections[edge].u;
  CHECK_THROWS(build_kernel(src, skewed, {-20, 20}));
}

TEST_CASE("scaled sequences expose signed log values") {
  PotentialSource src = make_source(HullSpec::constant(0.0));
  UHCertificate cert = certified(src, 3.0, {-30, 30}, 10);
  GreenKernel g = build_kernel(src, cert, {-10, 10});

  // u_left solves the recurrence: check it through plain values.
  for (long n = -9; n <= 9; ++n) {
    double r = g.unstable(n + 1) + g.unstable(n - 1) - 3.0 * g.unstable(n);
    CHECK(r == doctest::Approx(0.0).epsilon(1e-12).scale(
                   std::fabs(g.unstable(n + 1))));
    double r2 = g.stable(n + 1) + g.stable(n - 1) - 3.0 * g.stable(n);
    CHECK(r2 == doctest::Approx(0.0).epsilon(1e-12).scale(
                    std::fabs(g.stable(n - 1))));
  }

  json h = g.header_json();
  CHECK(h.contains("energy"));
  CHECK(h.contains("decay_rate"));
  CHECK(h.contains("wronskian_drift"));
  CHECK(h["window"][0].get<long>() == -10);
  CHECK(h["window"][1].get<long>() == 10);
}
