#include <doctest.h>

#include <cmath>

#include "uhscan/models.hpp"
#include "uhscan/uh.hpp"

using namespace uhscan;

namespace {

PotentialSource free_potential() { return make_source(HullSpec::constant(0.0)); }

// Frozen values for the free cocycle at E = 3 (top eigenvalue
// (3 + sqrt 5)/2, eigendirections (lambda, 1)).
constexpr double kLam3 = 2.6180339887498948;       // (3 + sqrt 5) / 2
constexpr double kLogLam3 = 0.96242365011920689;   // log of the above
constexpr double kUAngle3 = 0.36486382811348318;   // atan(1 / lambda)
constexpr double kSAngle3 = 1.2059324986814134;    // atan(lambda)
constexpr double kGap3 = 0.84106867056793026;      // difference of the two

}  // namespace

TEST_CASE("growth fit at a strongly hyperbolic energy nails the rate") {
  PotentialSource src = free_potential();
  GrowthFit fit = growth_test(src, 3.0, {-64, 64}, 30);
  CHECK(fit.pass);
  CHECK(std::exp(fit.log_lambda) == doctest::Approx(kLam3).epsilon(1e-2));
  // First profile entry is the one-step norm, an independent hand value.
  CHECK(fit.profile[0] == doctest::Approx(std::log(3.302775637731995)));
  // The fitted line is a true minorant of the whole profile.
  for (size_t n = 1; n <= fit.profile.size(); ++n)
    CHECK(fit.log_c + static_cast<double>(n) * fit.log_lambda <=
          fit.profile[n - 1] + 1e-9);
}

TEST_CASE("growth fit is stable under depth refinement") {
  PotentialSource src = free_potential();
  GrowthFit a = growth_test(src, 2.3, {-32, 32}, 24);
  GrowthFit b = growth_test(src, 2.3, {-32, 32}, 48);
  CHECK(a.pass);
  CHECK(b.pass);
  CHECK(a.log_lambda == doctest::Approx(b.log_lambda).epsilon(1e-3));
}

TEST_CASE("growth fit rejects elliptic energies at any depth") {
  PotentialSource src = free_potential();
  for (int depth : {24, 64}) {
    GrowthFit fit = growth_test(src, 1.0, {-32, 32}, depth);
    CHECK_FALSE(fit.pass);
    CHECK(fit.log_lambda <= 1e-3);
  }
}

TEST_CASE("growth fit accepts the parabolic edge only at small depth") {
  // At E = 2 the norms grow linearly; a finite-depth fit cannot tell a slow
  // exponential from that, so the growth stage passes, and the later
  // certificate stages are the ones that must catch it.
  PotentialSource src = free_potential();
  GrowthFit fit = growth_test(src, 2.0, {-32, 32}, 64);
  CHECK(fit.pass);
}

TEST_CASE("section estimates converge to the free eigendirections") {
  PotentialSource src = free_potential();
  auto secs = estimate_sections(src, 3.0, {-8, 8}, 30);
  REQUIRE(secs.size() == 17);
  for (const SectionPair& p : secs) {
    CHECK(distance(p.u, ProjPoint(kUAngle3)) < 1e-9);
    CHECK(distance(p.s, ProjPoint(kSAngle3)) < 1e-9);
    CHECK(p.u_resid < 1e-9);
    CHECK(p.s_resid < 1e-9);
  }
}

TEST_CASE("section estimates fail loudly when a window product rotates") {
  // At E = 1 the free one-step matrix has order 6, so the 63-step product
  // is minus the identity: directions are undefined.
  PotentialSource src = free_potential();
  CHECK_THROWS_AS(estimate_sections(src, 1.0, {-4, 4}, 64),
                  DirectionsUndefined);
}

TEST_CASE("certification succeeds off the free spectrum with tight data") {
  PotentialSource src = free_potential();
  CertifyResult r = certify(src, 3.0, {-64, 64}, 30);
  REQUIRE(std::holds_alternative<UHCertificate>(r));
  const auto& cert = std::get<UHCertificate>(r);
  CHECK(cert.lambda == doctest::Approx(kLam3).epsilon(1e-2));
  CHECK(cert.gap_gamma == doctest::Approx(kGap3).epsilon(1e-9));
  CHECK(cert.cone_ok);
  CHECK(cert.c_const > 0.0);
  CHECK(cert.max_invariance_err <= 1e-6);
  CHECK(cert.max_section_resid < 1e-9);
  // beta is the worst full-depth expansion: lambda^depth up to a constant.
  CHECK(cert.log_beta == doctest::Approx(30.0 * kLogLam3).epsilon(0.05));
  CHECK(cert.sections.size() == 129);
  // Growth line stays below the worst-case profile.
  for (size_t n = 1; n <= cert.worst_log_norms.size(); ++n)
    CHECK(std::log(cert.c_const) +
              static_cast<double>(n) * std::log(cert.lambda) <=
          cert.worst_log_norms[n - 1] + 1e-9);
}

TEST_CASE("certification rejects the spectrum interior via growth") {
  PotentialSource src = free_potential();
  CertifyResult r = certify(src, 0.5, {-32, 32}, 32);
  REQUIRE(std::holds_alternative<FailureReport>(r));
  CHECK(std::get<FailureReport>(r).reason == FailureReport::Reason::growth);
}

TEST_CASE("certification rejects the parabolic band edge after growth") {
  PotentialSource src = free_potential();
  CertifyResult r = certify(src, 2.0, {-32, 32}, 64);
  REQUIRE(std::holds_alternative<FailureReport>(r));
  const auto& f = std::get<FailureReport>(r);
  // Growth alone is fooled at this depth (see above); the section stages
  // are not.
  CHECK(f.reason != FailureReport::Reason::growth);
}

TEST_CASE("failure reports serialize with the documented shape") {
  PotentialSource src = free_potential();
  CertifyResult r = certify(src, 1.5, {-16, 16}, 16);
  REQUIRE(std::holds_alternative<FailureReport>(r));
  json j = std::get<FailureReport>(r).to_json();
  CHECK(j.contains("reason"));
  CHECK(j.contains("first_violation_site"));
  CHECK(j.contains("details"));
  std::string reason = j["reason"].get<std::string>();
  CHECK((reason == "growth" || reason == "directions_undefined" ||
         reason == "gap" || reason == "invariance" || reason == "cone"));
}

TEST_CASE("bounded witness at an elliptic energy is tight") {
  // At E = 1 the free matrix has order 6; the direction pi/4 keeps the whole
  // orbit inside the closed unit ball, so the min-max is exactly log 1 = 0.
  PotentialSource src = free_potential();
  BoundedWitness w = bounded_witness_search(src, 1.0, {-256, 256}, 100);
  CHECK(w.max_log_norm <= std::log(2.0));
  CHECK(w.max_log_norm >= 0.0);
  CHECK(w.max_log_norm < 1e-9);
  CHECK(w.depth == 100);
}

TEST_CASE("bounded witness explodes off the spectrum") {
  PotentialSource src = free_potential();
  BoundedWitness w = bounded_witness_search(src, 3.0, {-256, 256}, 100);
  // Best possible direction still inherits about half the full growth.
  CHECK(w.max_log_norm >= 40.0);
}

TEST_CASE("bounded witness at the parabolic edge finds the eigendirection") {
  PotentialSource src = free_potential();
  BoundedWitness w = bounded_witness_search(src, 2.0, {-64, 64}, 64);
  // (1, 1) is fixed by every step, so the orbit never leaves norm 1.
  CHECK(w.max_log_norm < 1e-9);
  CHECK(distance(w.dir, ProjPoint(std::atan(1.0))) < 1e-6);
}

TEST_CASE("witness JSON carries site, angle, value and depth") {
  PotentialSource src = free_potential();
  BoundedWitness w = bounded_witness_search(src, 1.0, {-8, 8}, 12);
  json j = w.to_json();
  CHECK(j.contains("site"));
  CHECK(j.contains("angle"));
  CHECK(j.contains("max_log_norm"));
  CHECK(j["depth"].get<int>() == 12);
}

TEST_CASE("dichotomy: certification and bounded orbits never co-exist") {
  PotentialSource src = free_potential();
  int resolvent = 0, spectrum = 0;
  for (double e = -3.5; e <= 3.51; e += 0.25) {
    if (std::fabs(std::fabs(e) - 2.0) < 0.06) continue;  // parabolic fringe
    bool cert_ok = std::holds_alternative<UHCertificate>(
        certify(src, e, {-48, 48}, 48));
    BoundedWitness w = bounded_witness_search(src, e, {-48, 48}, 48);
    bool wit_ok = w.max_log_norm <= std::log(2.0 * 48.0);
    CHECK(cert_ok != wit_ok);
    resolvent += cert_ok ? 1 : 0;
    spectrum += wit_ok ? 1 : 0;
  }
  CHECK(resolvent > 0);
  CHECK(spectrum > 0);
}

TEST_CASE("witness search validates its inputs") {
  PotentialSource src = free_potential();
  CHECK_THROWS_AS(bounded_witness_search(src, 1.0, {-8, 8}, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(bounded_witness_search(src, 1.0, {-8, 8}, 16, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(certify(src, 1.0, {-8, 8}, 1), std::invalid_argument);
}
