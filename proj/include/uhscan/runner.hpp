#pragma once

// Configuration and entry point shared by the command-line tool and the
// tests that drive it in-process.

#include "uhscan/scanner.hpp"

namespace uhscan {

struct RunConfig {
  std::string command;  // scan | certify | green | witness | eig | compare
  HullSpec model;
  ScanSettings settings;

  double e_single = 0.0;
  bool has_e_single = false;
  double e_lo = 0.0, e_hi = 0.0;
  bool has_e_range = false;
  double grid_step = 0.01;

  long section_size = 512;
  long green_radius = 25;      // |p - q| cap for kernel CSV rows
  int hull_count = 8;          // phase samples for `compare`
  double inclusion_eps = 0.05;
  int witness_depth = 0;       // 0 = settings.depth
  std::uint64_t seed = 1;

  std::string out_path;        // output artifact base path (may be empty)

  // Merge keys from a config file; unknown keys are rejected.
  void apply_json(const json& j);
  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Exit codes: 0 success, 1 usage/config error, 2 numerical inconsistency,
// 3 I/O error.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Write `text` to `path` atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& text);

// Format a double with the shortest representation that round-trips.
std::string format_double(double x);

}  // namespace uhscan
