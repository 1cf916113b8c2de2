// Command-line front end: spectrum scanning and hyperbolicity certification
// for one-dimensional discrete Schrodinger operators.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "uhscan/runner.hpp"

namespace {

using uhscan::HullSpec;
using uhscan::RunConfig;

// Compact model strings: family:arg,arg,...
//   constant:<v>                      periodic:<v0>,<v1>,...
//   almost_mathieu:<c>,<freq>,<phase> sturmian:<c>,<freq>,<phase>
//   random:<bound>[,<seed>]           file:<path>
HullSpec parse_model_string(const std::string& text) {
  auto colon = text.find(':');
  std::string family = text.substr(0, colon);
  std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  std::vector<std::string> args;
  size_t pos = 0;
  while (!rest.empty()) {
    auto comma = rest.find(',', pos);
    args.push_back(rest.substr(pos, comma - pos));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  auto num = [&](size_t i) { return std::stod(args.at(i)); };

  if (family == "constant") return HullSpec::constant(args.empty() ? 0.0 : num(0));
  if (family == "periodic") {
    std::vector<double> cycle;
    for (size_t i = 0; i < args.size(); ++i) cycle.push_back(num(i));
    return HullSpec::periodic(cycle);
  }
  if (family == "almost_mathieu")
    return HullSpec::almost_mathieu(num(0), num(1),
                                    args.size() > 2 ? num(2) : 0.0);
  if (family == "sturmian")
    return HullSpec::sturmian(num(0), num(1), args.size() > 2 ? num(2) : 0.0);
  if (family == "random")
    return HullSpec::random_iid(
        num(0), args.size() > 1
                    ? static_cast<std::uint64_t>(std::stoull(args.at(1)))
                    : 1);
  if (family == "file") return HullSpec::from_file(rest);
  throw std::invalid_argument("unknown model family: " + family);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectrum / resolvent classification for 1-D discrete "
               "Schrodinger operators via transfer-matrix hyperbolicity"};
  app.require_subcommand(1);

  std::string config_path, model_str, out_path;
  double e_val = 0.0;
  std::vector<double> e_range;
  double step = 0.0;
  int depth = 0, parallelism = -1;
  long window = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;

  app.add_option("--config", config_path, "JSON config file merged first");
  app.add_option("--model", model_str, "model string family:args");
  auto* oe = app.add_option("--E", e_val, "single energy");
  app.add_option("--E-range", e_range, "energy range lo hi")->expected(2);
  auto* ostep = app.add_option("--step", step, "energy grid step");
  auto* odepth = app.add_option("--depth", depth, "cocycle depth");
  auto* owin = app.add_option("--window", window, "site window half-width");
  app.add_option("--out", out_path, "output artifact path");
  auto* opar = app.add_option("--parallelism", parallelism,
                              "worker threads (0 = hardware)");
  auto* oseed = app.add_option("--seed", seed, "model seed override");

  // fallthrough so the global flags can follow the subcommand, the natural
  // order for "uhscan scan --model ...".
  for (const char* name :
       {"scan", "certify", "green", "witness", "eig", "compare"})
    app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "io error: cannot open config " << config_path << "\n";
        return 3;
      }
      uhscan::json j;
      try {
        in >> j;
      } catch (const std::exception& e) {
        std::cerr << "config error: " << config_path << ": " << e.what()
                  << "\n";
        return 1;
      }
      cfg.apply_json(j);
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (!model_str.empty()) cfg.model = parse_model_string(model_str);
    if (oe->count() > 0) {
      cfg.e_single = e_val;
      cfg.has_e_single = true;
    }
    if (!e_range.empty()) {
      cfg.e_lo = e_range[0];
      cfg.e_hi = e_range[1];
      cfg.has_e_range = true;
    }
    if (ostep->count() > 0) cfg.grid_step = step;
    if (odepth->count() > 0) cfg.settings.depth = depth;
    if (owin->count() > 0) cfg.settings.window_halfwidth = window;
    if (opar->count() > 0) cfg.settings.parallelism = parallelism;
    if (oseed->count() > 0) {
      cfg.seed = seed;
      seed_set = true;
    }
    if (seed_set && cfg.model.family == "random_iid")
      cfg.model.params["seed"] = cfg.seed;
    if (!out_path.empty()) cfg.out_path = out_path;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  return uhscan::run(cfg, std::cout, std::cerr);
}
