#pragma once

// Flat "key = value" run configuration shared by every subcommand.

#include <map>
#include <string>
#include <vector>

#include "dipole/mc.hpp"

namespace dipole {

struct RunConfig {
  int dim = 3;
  int L = 4;
  // epsilon = epsilon_c / L unless an explicit epsilon is given.
  bool epsilon_auto = true;
  double epsilon = 0.125;
  double epsilon_c = 0.5;
  double kernel_tol = 1e-12;
  int kernel_max_radius = 400;
  int threads = default_thread_count();

  MCParams mc;

  // Named tolerances; the key set is fixed (see default_tolerances()).
  std::map<std::string, double> tol;

  // Brillouin-zone quadrature grids.
  int quad_n0 = 16;
  int quad_n_max = 64;
  // Betas for the c_d curve.
  std::vector<double> cd_betas = {25, 50, 75, 100, 150, 200, 300, 400, 600, 800, 1200, 1600};
  // Random configurations for the chessboard and gradient-form checks.
  int rp_configs = 100;
  // Random configurations for the plain lower bound H >= e0 |box|.
  int lower_bound_configs = 1000;
  int groundstate_directions = 20;
  // Gaussian-domination probes during `simulate`.
  bool simulate_gd = false;
  // Include wall-clock seconds in written report documents.
  bool report_timings = false;

  std::string out = "out";
  std::string cache = "cache";

  RunConfig();
  LatticeSpec spec() const;
  double tolerance(const std::string& name) const;
};

std::map<std::string, double> default_tolerances();

// Sets one key from its text value; throws ErrorCode::invalid_argument for
// unknown keys or malformed values. Tolerances use keys "tol.NAME".
void set_key(RunConfig& c, const std::string& key, const std::string& value);

// Parses the text form: one "key = value" per line, '#' starts a comment.
// All problems are collected and reported together.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Every key in a fixed order, values printed for exact round trip.
std::string to_text(const RunConfig& c);

// All semantic problems, one per entry (empty when valid).
std::vector<std::string> validation_errors(const RunConfig& c);
void validate(const RunConfig& c);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace dipole
