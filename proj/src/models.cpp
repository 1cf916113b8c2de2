#include "uhscan/models.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace uhscan {

namespace {

// Per-site hash: finalizer of the splitmix64 generator applied to a
// seed-offset site index, mapped to a uniform double in [0, 1).  Random
// access, so shifted copies of the same potential agree sample-for-sample.
double hash_uniform(std::uint64_t seed, long n) {
  std::uint64_t z = seed + static_cast<std::uint64_t>(n) * 0x9E3779B97F4A7C15ull;
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double frac(double x) {
  double f = x - std::floor(x);
  return f < 1.0 ? f : 0.0;
}

}  // namespace

HullSpec HullSpec::constant(double value) {
  HullSpec s;
  s.family = "constant";
  s.params = json{{"value", value}};
  s.bound = std::fabs(value);
  return s;
}

HullSpec HullSpec::periodic(std::vector<double> cycle) {
  if (cycle.empty())
    throw std::invalid_argument("periodic potential needs a nonempty cycle");
  HullSpec s;
  s.family = "periodic";
  s.bound = 0.0;
  for (double v : cycle) s.bound = std::max(s.bound, std::fabs(v));
  s.params = json{{"cycle", cycle}};
  return s;
}

HullSpec HullSpec::almost_mathieu(double coupling, double frequency,
                                  double phase) {
  HullSpec s;
  s.family = "almost_mathieu";
  s.params = json{{"coupling", coupling},
                  {"frequency", frequency},
                  {"phase", phase}};
  s.bound = 2.0 * std::fabs(coupling);
  return s;
}

HullSpec HullSpec::sturmian(double coupling, double frequency, double phase) {
  HullSpec s;
  s.family = "sturmian";
  s.params = json{{"coupling", coupling},
                  {"frequency", frequency},
                  {"phase", phase}};
  s.bound = std::fabs(coupling);
  return s;
}

HullSpec HullSpec::random_iid(double bound, std::uint64_t seed) {
  HullSpec s;
  s.family = "random_iid";
  s.params = json{{"bound", bound},
                  {"seed", seed},
                  {"generator", "splitmix64-persite"}};
  s.bound = std::fabs(bound);
  return s;
}

HullSpec HullSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open potential file: " + path);
  json j;
  in >> j;
  if (!j.contains("first_index") || !j.contains("bound") ||
      !j.contains("values"))
    throw std::invalid_argument(
        "potential file needs first_index, bound and values: " + path);
  HullSpec s;
  s.family = "file";
  s.params = json{{"path", path},
                  {"first_index", j["first_index"].get<long>()},
                  {"values", j["values"]}};
  s.bound = j["bound"].get<double>();
  for (double v : j["values"].get<std::vector<double>>())
    if (std::fabs(v) > s.bound)
      throw PotentialBoundViolation("file value " + std::to_string(v) +
                                    " exceeds declared bound");
  return s;
}

HullSpec HullSpec::from_json(const json& j) {
  std::string family = j.at("family").get<std::string>();
  const json& p = j.contains("params") ? j.at("params") : json::object();
  if (family == "constant") return constant(p.at("value").get<double>());
  if (family == "periodic")
    return periodic(p.at("cycle").get<std::vector<double>>());
  if (family == "almost_mathieu")
    return almost_mathieu(p.at("coupling").get<double>(),
                          p.at("frequency").get<double>(),
                          p.value("phase", 0.0));
  if (family == "sturmian")
    return sturmian(p.at("coupling").get<double>(),
                    p.at("frequency").get<double>(), p.value("phase", 0.0));
  if (family == "random_iid")
    return random_iid(p.at("bound").get<double>(),
                      p.value("seed", std::uint64_t{1}));
  if (family == "file") return from_file(p.at("path").get<std::string>());
  throw std::invalid_argument("unknown potential family: " + family);
}

json HullSpec::to_json() const {
  return json{{"family", family}, {"params", params}, {"bound", bound}};
}

PotentialSource make_source(const HullSpec& spec) {
  PotentialSource src;
  src.bound = spec.bound;
  src.descriptor = spec.to_json();
  src.descriptor["shift"] = 0;

  if (spec.family == "constant") {
    double v = spec.params.at("value").get<double>();
    src.sample_fn = [v](long) { return v; };
  } else if (spec.family == "periodic") {
    auto cycle = spec.params.at("cycle").get<std::vector<double>>();
    auto q = static_cast<long>(cycle.size());
    src.sample_fn = [cycle, q](long n) {
      long r = ((n % q) + q) % q;
      return cycle[static_cast<size_t>(r)];
    };
  } else if (spec.family == "almost_mathieu") {
    double c = spec.params.at("coupling").get<double>();
    double a = spec.params.at("frequency").get<double>();
    double th = spec.params.value("phase", 0.0);
    src.sample_fn = [c, a, th](long n) {
      return 2.0 * c *
             std::cos(2.0 * std::numbers::pi *
                      frac(static_cast<double>(n) * a + th));
    };
  } else if (spec.family == "sturmian") {
    double c = spec.params.at("coupling").get<double>();
    double a = spec.params.at("frequency").get<double>();
    double th = spec.params.value("phase", 0.0);
    src.sample_fn = [c, a, th](long n) {
      return frac(static_cast<double>(n) * a + th) >= 1.0 - a ? c : 0.0;
    };
  } else if (spec.family == "random_iid") {
    double b = spec.params.at("bound").get<double>();
    auto seed = spec.params.value("seed", std::uint64_t{1});
    src.sample_fn = [b, seed](long n) {
      return b * (2.0 * hash_uniform(seed, n) - 1.0);
    };
  } else if (spec.family == "file") {
    long first = spec.params.at("first_index").get<long>();
    auto values = spec.params.at("values").get<std::vector<double>>();
    auto last = first + static_cast<long>(values.size()) - 1;
    src.sample_fn = [values, first, last](long n) -> double {
      if (n < first || n > last)
        throw std::out_of_range("site " + std::to_string(n) +
                                " outside file potential range [" +
                                std::to_string(first) + ", " +
                                std::to_string(last) + "]");
      return values[static_cast<size_t>(n - first)];
    };
  } else {
    throw std::invalid_argument("unknown potential family: " + spec.family);
  }
  return src;
}

PotentialSource shift_source(const PotentialSource& src, long m) {
  PotentialSource out;
  out.bound = src.bound;
  out.descriptor = src.descriptor;
  long prior = out.descriptor.value("shift", 0L);
  out.descriptor["shift"] = prior + m;
  auto fn = src.sample_fn;
  out.sample_fn = [fn, m](long n) { return fn(n + m); };
  return out;
}

std::vector<PotentialSource> hull_samples(const HullSpec& spec, int count) {
  if (count < 1)
    throw std::invalid_argument("hull_samples: count must be >= 1");
  std::vector<PotentialSource> out;
  out.reserve(static_cast<size_t>(count));

  if (spec.family == "almost_mathieu" || spec.family == "sturmian") {
    // Distinct phases: steps of 1/(2 count) stay inside a half-period, so
    // all sampled potentials differ at site 0.
    double th = spec.params.value("phase", 0.0);
    for (int j = 0; j < count; ++j) {
      HullSpec s = spec;
      s.params["phase"] = frac(th + static_cast<double>(j) / (2.0 * count));
      PotentialSource p = make_source(s);
      p.descriptor["hull_index"] = j;
      out.push_back(std::move(p));
    }
    return out;
  }

  // Shift orbits for the remaining families; periodic hulls close after one
  // period, the rest use a spread-out stride.
  long stride = spec.family == "periodic" ? 1 : 64;
  PotentialSource base = make_source(spec);
  for (int j = 0; j < count; ++j) {
    PotentialSource p = shift_source(base, stride * j);
    p.descriptor["hull_index"] = j;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace uhscan
