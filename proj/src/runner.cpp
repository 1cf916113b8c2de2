#include "uhscan/runner.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace uhscan {

namespace {

// I/O failures get their own type so the entry point can map them to the
// dedicated exit code.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sibling_json_path(const std::string& path) {
  auto dot = path.find_last_of('.');
  auto slash = path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + ".json";
  if (path.substr(dot) == ".json") return path;
  return path.substr(0, dot) + ".json";
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, p);
}

void write_file_atomic(const std::string& path, const std::string& text) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw IoError("write to " + tmp + " failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("rename " + tmp + " -> " + path + " failed");
}

void RunConfig::apply_json(const json& j) {
  if (!j.is_object())
    throw std::invalid_argument("config root must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "command") {
      command = it->get<std::string>();
    } else if (key == "model") {
      model = HullSpec::from_json(*it);
    } else if (key == "settings") {
      settings = ScanSettings::from_json(*it);
    } else if (key == "E") {
      e_single = it->get<double>();
      has_e_single = true;
    } else if (key == "E_range") {
      auto v = it->get<std::vector<double>>();
      if (v.size() != 2)
        throw std::invalid_argument("field E_range must be [lo, hi]");
      e_lo = v[0];
      e_hi = v[1];
      has_e_range = true;
    } else if (key == "step") {
      grid_step = it->get<double>();
    } else if (key == "out") {
      out_path = it->get<std::string>();
    } else if (key == "parallelism") {
      settings.parallelism = it->get<int>();
    } else if (key == "seed") {
      seed = it->get<std::uint64_t>();
    } else if (key == "section_size") {
      section_size = it->get<long>();
    } else if (key == "green_radius") {
      green_radius = it->get<long>();
    } else if (key == "hull_count") {
      hull_count = it->get<int>();
    } else if (key == "inclusion_eps") {
      inclusion_eps = it->get<double>();
    } else if (key == "witness_depth") {
      witness_depth = it->get<int>();
    } else {
      throw std::invalid_argument("unknown config field: " + key);
    }
  }
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument(msg);
  };
  if (command != "scan" && command != "certify" && command != "green" &&
      command != "witness" && command != "eig" && command != "compare")
    fail("field command must be one of scan/certify/green/witness/eig/compare");
  if (model.family.empty()) fail("field model is required");
  if (!(grid_step > 0.0)) fail("field step must be positive");
  if (settings.depth < 2) fail("field settings.depth must be >= 2");
  if (settings.window_halfwidth < 1)
    fail("field settings.window_halfwidth must be >= 1");
  if (settings.angle_grid < 4) fail("field settings.angle_grid must be >= 4");
  if (!(settings.witness_poly_bound > 0.0))
    fail("field settings.witness_poly_bound must be positive");
  if (settings.refine_factor < 1)
    fail("field settings.refine_factor must be >= 1");
  if (has_e_range && !(e_lo <= e_hi)) fail("field E_range must satisfy lo <= hi");
  if ((command == "certify" || command == "green" || command == "witness") &&
      !has_e_single)
    fail("field E is required for " + command);
  if (section_size < 1) fail("field section_size must be >= 1");
  if (hull_count < 2 && command == "compare")
    fail("field hull_count must be >= 2 for compare");
  if (!(inclusion_eps > 0.0)) fail("field inclusion_eps must be positive");
}

namespace {

void emit(const RunConfig& cfg, const std::string& csv, const json& j,
          std::ostream& out) {
  if (cfg.out_path.empty()) {
    out << csv;
    return;
  }
  write_file_atomic(cfg.out_path, csv);
  write_file_atomic(sibling_json_path(cfg.out_path), j.dump(2) + "\n");
}

int run_scan(const RunConfig& cfg, std::ostream& out) {
  PotentialSource src = make_source(cfg.model);
  double lo = cfg.has_e_range ? cfg.e_lo : -(cfg.model.bound + 2.0);
  double hi = cfg.has_e_range ? cfg.e_hi : cfg.model.bound + 2.0;
  SpectrumReport rep = scan(src, lo, hi, cfg.grid_step, cfg.settings);
  emit(cfg, rep.to_csv(), rep.to_json(), out);
  out << "scan: " << rep.results.size() << " energies, " << rep.bands.size()
      << " band(s)\n";
  for (auto& [a, b] : rep.bands)
    out << "  band [" << format_double(a) << ", " << format_double(b) << "]\n";
  return 0;
}

int run_certify(const RunConfig& cfg, std::ostream& out) {
  PotentialSource src = make_source(cfg.model);
  CertifyResult cr =
      certify(src, cfg.e_single, cfg.settings.window(), cfg.settings.depth,
              cfg.settings.tol_growth, cfg.settings.inv_tol);
  json j;
  if (std::holds_alternative<UHCertificate>(cr)) {
    const auto& c = std::get<UHCertificate>(cr);
    out << "certified: lambda=" << format_double(c.lambda)
        << " c=" << format_double(c.c_const)
        << " gap=" << format_double(c.gap_gamma)
        << " log_beta=" << format_double(c.log_beta)
        << " cone=" << (c.cone_ok ? "ok" : "fail") << "\n";
    json sec = json::array();
    for (const SectionPair& p : c.sections)
      sec.push_back(json{{"u", p.u.angle},
                         {"s", p.s.angle},
                         {"u_resid", p.u_resid},
                         {"s_resid", p.s_resid}});
    j = json{{"certified", true},
             {"energy", c.energy},
             {"window", {c.window.lo, c.window.hi}},
             {"depth", c.depth},
             {"lambda", c.lambda},
             {"c_const", c.c_const},
             {"gap_gamma", c.gap_gamma},
             {"beta", c.log_beta > 700.0 ? 0.0 : c.beta},
             {"log_beta", c.log_beta},
             {"cone_ok", c.cone_ok},
             {"max_section_resid", c.max_section_resid},
             {"max_invariance_err", c.max_invariance_err},
             {"log_c_contract", c.log_c_contract},
             {"worst_log_norms", c.worst_log_norms},
             {"sections", sec},
             {"model", c.model}};
  } else {
    const auto& f = std::get<FailureReport>(cr);
    out << "not certified: " << to_string(f.reason) << " at site "
        << f.first_violation_site << "\n";
    j = json{{"certified", false}, {"failure", f.to_json()},
             {"energy", cfg.e_single}, {"model", src.descriptor}};
  }
  if (!cfg.out_path.empty())
    write_file_atomic(cfg.out_path, j.dump(2) + "\n");
  return 0;
}

int run_green(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  PotentialSource src = make_source(cfg.model);
  Interval kw = cfg.settings.window();
  Interval cw{kw.lo - cfg.settings.depth, kw.hi + cfg.settings.depth};
  CertifyResult cr = certify(src, cfg.e_single, cw, cfg.settings.depth,
                             cfg.settings.tol_growth, cfg.settings.inv_tol);
  if (std::holds_alternative<FailureReport>(cr)) {
    const auto& f = std::get<FailureReport>(cr);
    err << "refusing to build a kernel: certification failed ("
        << to_string(f.reason) << " at site " << f.first_violation_site
        << ")\n";
    return 2;
  }
  GreenKernel g = build_kernel(src, std::get<UHCertificate>(cr), kw);
  std::string csv = "# header: " + g.header_json().dump() + "\n";
  csv += "p,q,G\n";
  for (long p = kw.lo; p <= kw.hi; ++p) {
    long qhi = std::min(kw.hi, p + cfg.green_radius);
    for (long q = std::max(kw.lo, p - cfg.green_radius); q <= qhi; ++q) {
      csv += std::to_string(p) + "," + std::to_string(q) + "," +
             format_double(g.entry(p, q)) + "\n";
    }
  }
  emit(cfg, csv, g.header_json(), out);
  out << "kernel: decay_rate=" << format_double(g.decay_rate)
      << " decay_const=" << format_double(g.decay_const)
      << " wronskian_drift=" << format_double(g.wronskian_drift) << "\n";
  return 0;
}

int run_witness(const RunConfig& cfg, std::ostream& out) {
  PotentialSource src = make_source(cfg.model);
  int depth = cfg.witness_depth > 0 ? cfg.witness_depth : cfg.settings.depth;
  BoundedWitness w = bounded_witness_search(
      src, cfg.e_single, cfg.settings.window(), depth, cfg.settings.angle_grid);
  out << "witness: site=" << w.site << " angle=" << format_double(w.dir.angle)
      << " max_log_norm=" << format_double(w.max_log_norm)
      << " threshold=" << format_double(std::log(cfg.settings.witness_poly_bound *
                                                 depth))
      << "\n";
  if (!cfg.out_path.empty()) {
    json j = w.to_json();
    j["energy"] = cfg.e_single;
    j["model"] = src.descriptor;
    write_file_atomic(cfg.out_path, j.dump(2) + "\n");
  }
  return 0;
}

int run_eig(const RunConfig& cfg, std::ostream& out) {
  PotentialSource src = make_source(cfg.model);
  Interval range{-cfg.section_size / 2,
                 -cfg.section_size / 2 + cfg.section_size - 1};
  std::vector<double> eig = eigenvalues(make_section(src, range));
  std::string csv = "# settings: " + cfg.settings.to_json().dump() +
                    " model: " + src.descriptor.dump() + "\n";
  csv += "index,eigenvalue\n";
  for (size_t i = 0; i < eig.size(); ++i)
    csv += std::to_string(i) + "," + format_double(eig[i]) + "\n";
  json j{{"section_first", range.lo},
         {"section_size", cfg.section_size},
         {"eigenvalues", eig},
         {"model", src.descriptor},
         {"settings", cfg.settings.to_json()}};
  emit(cfg, csv, j, out);
  out << "eig: " << eig.size() << " eigenvalues in ["
      << format_double(eig.empty() ? 0.0 : eig.front()) << ", "
      << format_double(eig.empty() ? 0.0 : eig.back()) << "]\n";
  return 0;
}

int run_compare(const RunConfig& cfg, std::ostream& out) {
  double lo = cfg.has_e_range ? cfg.e_lo : -(cfg.model.bound + 2.0);
  double hi = cfg.has_e_range ? cfg.e_hi : cfg.model.bound + 2.0;
  std::vector<PotentialSource> pts = hull_samples(cfg.model, cfg.hull_count);
  std::vector<SpectrumReport> reps;
  reps.reserve(pts.size());
  for (const PotentialSource& p : pts)
    reps.push_back(scan(p, lo, hi, cfg.grid_step, cfg.settings));

  json pairs = json::array();
  size_t failures = 0;
  for (size_t i = 0; i < reps.size(); ++i) {
    for (size_t k = 0; k < reps.size(); ++k) {
      if (i == k) continue;
      std::vector<double> bad =
          inclusion_check(reps[i], reps[k], cfg.inclusion_eps);
      if (!bad.empty()) ++failures;
      pairs.push_back(json{{"reference", i},
                           {"probe", k},
                           {"violations", bad}});
    }
  }
  out << "compare: " << pts.size() << " hull points, " << failures
      << " failing ordered pair(s) at eps=" << format_double(cfg.inclusion_eps)
      << "\n";
  if (!cfg.out_path.empty()) {
    json jreps = json::array();
    for (auto& r : reps) jreps.push_back(r.to_json());
    json j{{"eps", cfg.inclusion_eps}, {"pairs", pairs}, {"reports", jreps}};
    write_file_atomic(cfg.out_path, j.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }
  try {
    if (cfg.command == "scan") return run_scan(cfg, out);
    if (cfg.command == "certify") return run_certify(cfg, out);
    if (cfg.command == "green") return run_green(cfg, out, err);
    if (cfg.command == "witness") return run_witness(cfg, out);
    if (cfg.command == "eig") return run_eig(cfg, out);
    if (cfg.command == "compare") return run_compare(cfg, out);
    err << "config error: unknown command " << cfg.command << "\n";
    return 1;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "numerical inconsistency: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace uhscan
