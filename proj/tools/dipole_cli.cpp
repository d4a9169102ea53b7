// Command-line front end. Talks to the library only through its C interface.

#include <CLI11.hpp>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dipole/dipole.h"

namespace {

enum Exit { exit_ok = 0, exit_checks_failed = 1, exit_usage = 2, exit_error = 3 };

template <class Fn>
std::string fetch(Fn&& fn) {
  std::size_t needed = 0;
  fn(nullptr, 0, &needed);
  std::string s(needed, '\0');
  if (fn(s.data(), s.size(), &needed) != DP_OK) return {};
  s.resize(needed ? needed - 1 : 0);
  return s;
}

int report_error(const char* what, dp_status st) {
  std::fprintf(stderr, "error: %s: %s: %s\n", what, dp_status_name(st), dp_last_error());
  return st == DP_ERR_INVALID_ARGUMENT ? exit_usage : exit_error;
}

struct ConfigHandle {
  dp_config* p = nullptr;
  ~ConfigHandle() { dp_config_destroy(p); }
};

struct ReportHandle {
  dp_report* p = nullptr;
  ~ReportHandle() { dp_report_destroy(p); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dipole lattice toolkit: kernels, spectra, bounds and Monte Carlo checks"};
  app.set_version_flag("--version", dp_version());
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::string> tols, sets;
  bool quiet = false, print_config = false, json = false;

  auto add_value = [&](const char* flag, const char* key, const char* help) {
    app.add_option_function<std::string>(flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
                                         help)
        ->type_name("VALUE");
  };

  app.add_option("--config", config_path, "Configuration file (flags override it)")->type_name("PATH");
  add_value("--dim", "dim", "Spatial dimension d (3..6)");
  add_value("--L", "L", "Half side length; the box has side 2L");
  add_value("--epsilon", "epsilon", "Screening mass, or 'auto' for epsilon_c / L");
  add_value("--beta", "beta", "Inverse temperature for simulate");
  add_value("--seed", "seed", "Random seed");
  add_value("--sweeps", "sweeps", "Total sweeps per chain, burn-in included");
  add_value("--threads", "threads", "Worker threads");
  add_value("--out", "out", "Output directory");
  add_value("--cache", "cache", "Kernel cache directory");
  app.add_option("--tol", tols, "Tolerance override NAME=VALUE (repeatable)")->type_name("NAME=VALUE");
  app.add_option("--set", sets, "Any configuration key KEY=VALUE (repeatable)")->type_name("KEY=VALUE");
  app.add_flag("-q,--quiet", quiet, "No progress output");
  app.add_flag("--print-config", print_config, "Print the effective configuration before running");
  app.add_flag("--json", json, "Print the report document instead of the table");

  const std::map<std::string, std::string> about = {
      {"kernel", "Build or load the periodized dipole kernel"},
      {"spectrum", "Eigenvalue sweep of W0(p): positivity, zero set, W0 - Y >= 0, curvature"},
      {"constants", "e0, e1, alpha, gamma by independent routes, epsilon stability"},
      {"bounds", "Long-range-order integral, c_d(beta) curve and beta_d bracket"},
      {"verify-rp", "Energy lower bound, chessboard steps, gauge identity, reflection positivity"},
      {"groundstate", "Staggered ground-state degeneracy and reflection descent"},
      {"simulate", "Metropolis sampling with infrared-bound and order-parameter checks"},
      {"report", "Aggregate every report in the output directory"},
  };
  for (std::size_t i = 0; i < dp_subcommand_count(); ++i) {
    const std::string name = dp_subcommand_name(i);
    const auto it = about.find(name);
    app.add_subcommand(name, it != about.end() ? it->second : "Run " + name)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_usage;
  }

  ConfigHandle cfg;
  if (dp_status st = dp_config_create(&cfg.p); st != DP_OK) return report_error("config", st);
  if (!config_path.empty())
    if (dp_status st = dp_config_load(cfg.p, config_path.c_str()); st != DP_OK) return report_error("config", st);

  auto split = [](const std::string& kv, std::string& k, std::string& v) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) return false;
    k = kv.substr(0, eq);
    v = kv.substr(eq + 1);
    return true;
  };
  for (const auto& kv : sets) {
    std::string k, v;
    if (!split(kv, k, v)) {
      std::fprintf(stderr, "error: --set expects KEY=VALUE, got '%s'\n", kv.c_str());
      return exit_usage;
    }
    overrides.emplace_back(k, v);
  }
  for (const auto& kv : tols) {
    std::string k, v;
    if (!split(kv, k, v)) {
      std::fprintf(stderr, "error: --tol expects NAME=VALUE, got '%s'\n", kv.c_str());
      return exit_usage;
    }
    overrides.emplace_back("tol." + k, v);
  }
  // Report every bad key and every semantic problem together.
  std::vector<std::string> problems;
  for (const auto& [k, v] : overrides)
    if (dp_config_set(cfg.p, k.c_str(), v.c_str()) != DP_OK) problems.emplace_back(dp_last_error());
  if (dp_config_validate(cfg.p) != DP_OK) {
    std::string m = dp_last_error();
    const std::string header = "invalid configuration:\n";
    if (m.rfind(header, 0) == 0) m.erase(0, m.find_first_not_of(" ", header.size()));
    problems.push_back(m);
  }
  if (!problems.empty()) {
    std::fprintf(stderr, "error: invalid configuration:\n");
    for (const auto& p : problems) std::fprintf(stderr, "  %s\n", p.c_str());
    return exit_usage;
  }

  if (print_config)
    std::fputs(fetch([&](char* b, std::size_t c, std::size_t* n) { return dp_config_text(cfg.p, b, c, n); }).c_str(),
               stdout);

  const std::string sub = app.get_subcommands().front()->get_name();
  ReportHandle report;
  if (dp_status st = dp_run(cfg.p, sub.c_str(), quiet ? 0 : 1, &report.p); st != DP_OK)
    return report_error(sub.c_str(), st);

  const std::string text = fetch([&](char* b, std::size_t c, std::size_t* n) {
    return json ? dp_report_json(report.p, 1, b, c, n) : dp_report_table(report.p, b, c, n);
  });
  std::fputs(text.c_str(), stdout);
  return dp_report_passed(report.p) ? exit_ok : exit_checks_failed;
}
