#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "uhscan/models.hpp"

using namespace uhscan;

TEST_CASE("constant potential") {
  PotentialSource src = make_source(HullSpec::constant(-1.25));
  CHECK(src.bound == 1.25);
  CHECK(src.sample(0) == -1.25);
  CHECK(src.sample(-1000000) == -1.25);
  CHECK(src.descriptor["family"] == "constant");
  CHECK(src.descriptor["shift"] == 0);
}

TEST_CASE("periodic potential wraps correctly at negative sites") {
  PotentialSource src = make_source(HullSpec::periodic({1.0, 0.0, -0.5}));
  CHECK(src.bound == 1.0);
  for (long n = -9; n <= 9; ++n) {
    long r = ((n % 3) + 3) % 3;
    double expect = r == 0 ? 1.0 : (r == 1 ? 0.0 : -0.5);
    CHECK(src.sample(n) == expect);
  }
  CHECK_THROWS_AS(HullSpec::periodic({}), std::invalid_argument);
}

TEST_CASE("almost-Mathieu samples match the hand-computed cosine values") {
  double alpha = (std::sqrt(5.0) - 1.0) / 2.0;
  PotentialSource src = make_source(HullSpec::almost_mathieu(1.0, alpha, 0.0));
  CHECK(src.bound == 2.0);
  CHECK(src.sample(0) == 2.0);
  CHECK(src.sample(1) == doctest::Approx(-1.4747377561566398).epsilon(1e-12));
  CHECK(src.sample(2) == doctest::Approx(0.1748514494339208).epsilon(1e-12));
  CHECK(src.sample(3) == doctest::Approx(1.2168777219577233).epsilon(1e-12));
  for (long n = -50; n <= 50; ++n) CHECK(std::fabs(src.sample(n)) <= 2.0);
}

TEST_CASE("sturmian samples spell the Fibonacci word") {
  double alpha = (std::sqrt(5.0) - 1.0) / 2.0;
  PotentialSource src = make_source(HullSpec::sturmian(1.0, alpha, 0.0));
  CHECK(src.bound == 1.0);
  const int expect[13] = {1, 0, 1, 1, 0, 1, 0, 1, 1, 0, 1, 1, 0};
  for (int n = 1; n <= 13; ++n)
    CHECK(src.sample(n) == static_cast<double>(expect[n - 1]));
}

TEST_CASE("hashed random potential is deterministic and balanced") {
  PotentialSource a = make_source(HullSpec::random_iid(1.5, 42));
  PotentialSource b = make_source(HullSpec::random_iid(1.5, 42));
  PotentialSource c = make_source(HullSpec::random_iid(1.5, 43));
  double mean = 0.0;
  bool differs = false;
  for (long n = -5000; n < 5000; ++n) {
    double v = a.sample(n);
    CHECK(v == b.sample(n));
    CHECK(std::fabs(v) <= 1.5);
    differs = differs || v != c.sample(n);
    mean += v;
  }
  mean /= 10000.0;
  CHECK(differs);
  CHECK(std::fabs(mean) < 0.05);
}

TEST_CASE("shifting a source relabels sites exactly") {
  PotentialSource src = make_source(HullSpec::random_iid(2.0, 7));
  PotentialSource moved = shift_source(src, 5);
  PotentialSource back = shift_source(moved, -5);
  for (long n = -20; n <= 20; ++n) {
    CHECK(moved.sample(n) == src.sample(n + 5));
    CHECK(back.sample(n) == src.sample(n));
  }
  CHECK(moved.descriptor["shift"] == 5);
  CHECK(back.descriptor["shift"] == 0);
}

TEST_CASE("file-backed potential round trip") {
  const char* path = "uhscan_test_potential.json";
  {
    std::ofstream out(path);
    out << R"({"first_index": -2, "bound": 1.5, )"
           R"("values": [0.5, -1.5, 0.0, 1.0, 0.25]})";
  }
  HullSpec spec = HullSpec::from_file(path);
  PotentialSource src = make_source(spec);
  CHECK(src.bound == 1.5);
  CHECK(src.sample(-2) == 0.5);
  CHECK(src.sample(-1) == -1.5);
  CHECK(src.sample(2) == 0.25);
  CHECK_THROWS_AS(src.sample(3), std::out_of_range);
  CHECK_THROWS_AS(src.sample(-3), std::out_of_range);
  std::remove(path);

  {
    std::ofstream out(path);
    out << R"({"first_index": 0, "bound": 0.5, "values": [0.1, 0.9]})";
  }
  CHECK_THROWS_AS(HullSpec::from_file(path), PotentialBoundViolation);
  std::remove(path);

  CHECK_THROWS_AS(HullSpec::from_file("no_such_file.json"),
                  std::runtime_error);
}

TEST_CASE("hull specs survive a JSON round trip") {
  double alpha = (std::sqrt(5.0) - 1.0) / 2.0;
  std::vector<HullSpec> specs = {
      HullSpec::constant(0.3), HullSpec::periodic({1.0, -1.0, 0.5}),
      HullSpec::almost_mathieu(0.9, alpha, 0.125),
      HullSpec::sturmian(2.0, alpha, 0.0), HullSpec::random_iid(1.0, 77)};
  for (const HullSpec& s : specs) {
    HullSpec r = HullSpec::from_json(s.to_json());
    CHECK(r.family == s.family);
    CHECK(r.bound == s.bound);
    PotentialSource ps = make_source(s), pr = make_source(r);
    for (long n = -40; n <= 40; ++n) CHECK(ps.sample(n) == pr.sample(n));
  }
  CHECK_THROWS_AS(HullSpec::from_json(json{{"family", "nope"}}),
                  std::invalid_argument);
}

TEST_CASE("sources detect bound violations at sampling time") {
  PotentialSource lying;
  lying.bound = 0.5;
  lying.sample_fn = [](long n) { return n == 3 ? 0.75 : 0.0; };
  CHECK(lying.sample(0) == 0.0);
  CHECK_THROWS_AS(lying.sample(3), PotentialBoundViolation);
}

TEST_CASE("hull samples: quasi-periodic families vary the phase") {
  double alpha = (std::sqrt(5.0) - 1.0) / 2.0;
  auto hull = hull_samples(HullSpec::almost_mathieu(1.0, alpha, 0.0), 8);
  REQUIRE(hull.size() == 8);
  std::set<double> at_zero;
  for (int j = 0; j < 8; ++j) {
    CHECK(hull[static_cast<size_t>(j)].descriptor["hull_index"] == j);
    at_zero.insert(hull[static_cast<size_t>(j)].sample(0));
  }
  CHECK(at_zero.size() == 8);  // all phases genuinely distinct
  CHECK(hull[0].sample(0) == 2.0);  // base point keeps the given phase
}

TEST_CASE("hull samples: periodic and random families use shifts") {
  auto per = hull_samples(HullSpec::periodic({1.0, 0.0}), 4);
  REQUIRE(per.size() == 4);
  CHECK(per[0].sample(0) == 1.0);
  CHECK(per[1].sample(0) == 0.0);  // shifted by one
  CHECK(per[2].sample(0) == 1.0);
  CHECK(per[3].sample(1) == 1.0);

  auto rnd = hull_samples(HullSpec::random_iid(1.0, 9), 3);
  PotentialSource base = make_source(HullSpec::random_iid(1.0, 9));
  for (long n = -10; n <= 10; ++n) {
    CHECK(rnd[0].sample(n) == base.sample(n));
    CHECK(rnd[1].sample(n) == base.sample(n + 64));
    CHECK(rnd[2].sample(n) == base.sample(n + 128));
  }

  CHECK_THROWS_AS(hull_samples(HullSpec::constant(0.0), 0),
                  std::invalid_argument);
}
