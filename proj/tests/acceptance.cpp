// Acceptance run: one pass/fail line per criterion. Every criterion is then
// recomputed from scratch in a second directory tree and its artifacts are
// compared byte for byte.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dipole/app.hpp"
#include "dipole/bounds.hpp"
#include "dipole/config.hpp"
#include "dipole/error.hpp"
#include "dipole/kernel.hpp"
#include "dipole/spectral.hpp"

namespace fs = std::filesystem;
using namespace dipole;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  // Every artifact and report document the criterion produced, keyed by path.
  std::map<std::string, std::string> fingerprint;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Criterion {
 public:
  Criterion(fs::path root, std::string tag) : root_(std::move(root)), tag_(std::move(tag)) {}

  RunConfig config(int L) const {
    RunConfig c;
    c.dim = 3;
    c.L = L;
    c.threads = 1;
    c.cache = (root_ / "cache").string();
    return c;
  }

  // Runs a subcommand into its own output directory and records its outputs.
  Report run(const std::string& sub, RunConfig cfg, const std::string& label) {
    cfg.out = (root_ / tag_ / label).string();
    const Report r = run_subcommand(sub, cfg);
    for (const auto& e : fs::directory_iterator(cfg.out))
      out_.fingerprint[tag_ + "/" + label + "/" + e.path().filename().string()] = slurp(e.path());
    for (const auto& e : fs::directory_iterator(cfg.cache))
      out_.fingerprint["cache/" + e.path().filename().string()] = slurp(e.path());
    return r;
  }

  // Requires every check whose name starts with one of `prefixes` to be
  // present and not failed.
  void require(const Report& r, const std::vector<std::string>& prefixes, const std::string& label) {
    for (const auto& pre : prefixes) {
      bool seen = false;
      for (const auto& c : r.checks()) {
        if (c.name.rfind(pre, 0) != 0) continue;
        seen = true;
        if (c.verdict == Verdict::fail) fail_note(label + ":" + c.name + " (" + c.detail + ")");
      }
      if (!seen) fail_note(label + ":" + pre + " missing");
    }
  }

  void fail_note(const std::string& s) {
    out_.ok = false;
    note("FAILED " + s);
  }
  void note(const std::string& s) { out_.detail += (out_.detail.empty() ? "" : "; ") + s; }
  Outcome& outcome() { return out_; }

 private:
  fs::path root_;
  std::string tag_;
  Outcome out_;
};

std::string detail_of(const Report& r, const std::string& name) {
  for (const auto& c : r.checks())
    if (c.name == name) return c.detail;
  return "missing";
}

Outcome check_psd_sweep(const fs::path& root) {
  Criterion c(root, "c1");
  for (int L : {2, 4, 8}) {
    const auto t0 = std::chrono::steady_clock::now();
    const Report r = c.run("spectrum", c.config(L), "L" + std::to_string(L));
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(r, {"w0_nonnegative", "zero_set"}, "L" + std::to_string(L));
    char buf[96];
    std::snprintf(buf, sizeof buf, "L=%d %.1fs", L, s);
    c.note(buf);
    if (L == 8 && s >= 60.0) c.fail_note("L=8 sweep took longer than 60 s");
  }
  return c.outcome();
}

Outcome check_conjecture_bound(const fs::path& root) {
  Criterion c(root, "c2");
  for (int L : {2, 4, 8}) {
    const Report r = c.run("spectrum", c.config(L), "L" + std::to_string(L));
    c.require(r, {"quadratic_lower_bound", "curvature_axis_"}, "L" + std::to_string(L));
  }
  c.note("W0 - Y >= 0 and curvature >= (1 - 0.05) alpha/d at L = 2, 4, 8");
  return c.outcome();
}

Outcome check_constants_criterion(const fs::path& root) {
  Criterion c(root, "c3");
  const Report r = c.run("constants", c.config(4), "L4");
  c.require(r, {"alpha_positive", "gamma_positive", "alpha_series", "gap_exceeds_constants", "epsilon_stability"}, "L4");
  c.note(detail_of(r, "epsilon_stability"));
  return c.outcome();
}

Outcome check_degeneracy(const fs::path& root) {
  Criterion c(root, "c4");
  RunConfig cfg = c.config(4);
  cfg.groundstate_directions = 20;
  const Report r = c.run("groundstate", cfg, "L4");
  c.require(r, {"ground_state_degeneracy"}, "L4");
  c.note(detail_of(r, "ground_state_degeneracy"));
  return c.outcome();
}

// Criteria 5 to 7 share the 4^3 box (L = 2).
RunConfig rp_config(const Criterion& c) {
  RunConfig cfg = c.config(2);
  cfg.lower_bound_configs = 1000;
  cfg.rp_configs = 100;
  return cfg;
}

Outcome check_chessboard(const fs::path& root) {
  Criterion c(root, "c5");
  const Report r = c.run("verify-rp", rp_config(c), "L2");
  c.require(r, {"energy_lower_bound", "chessboard_step"}, "L2");
  c.note(detail_of(r, "energy_lower_bound"));
  c.note(detail_of(r, "chessboard_step"));
  return c.outcome();
}

Outcome check_reflection_positivity(const fs::path& root) {
  Criterion c(root, "c6");
  const Report r = c.run("verify-rp", rp_config(c), "L2");
  c.require(r, {"cross_operator_psd"}, "L2");
  c.note(detail_of(r, "cross_operator_psd"));
  return c.outcome();
}

Outcome check_gauge_identity(const fs::path& root) {
  Criterion c(root, "c7");
  const Report r = c.run("verify-rp", rp_config(c), "L2");
  c.require(r, {"gradient_form_identity", "staggered_row_sums"}, "L2");
  c.note(detail_of(r, "gradient_form_identity"));
  c.note("row sums: " + detail_of(r, "staggered_row_sums"));
  return c.outcome();
}

Outcome check_infrared_bound(const fs::path& root) {
  Criterion c(root, "c8");
  RunConfig cfg = c.config(4);
  cfg.mc.beta = 5.0;
  cfg.mc.chains = 4;
  cfg.mc.sweeps = 22000;
  cfg.mc.burn_in = 2000;
  cfg.mc.seed = 1;
  const Report hot = c.run("simulate", cfg, "beta5");
  c.require(hot, {"energy_drift", "ir_bound_off_zero_set", "ir_bound_zero_set", "sum_rule_"}, "beta5");
  cfg.mc.beta = 0.0;
  const Report free = c.run("simulate", cfg, "beta0");
  c.require(free, {"energy_drift", "disorder_limit"}, "beta0");
  c.note("4 chains x 20000 measured sweeps; " + detail_of(free, "disorder_limit"));
  return c.outcome();
}

Outcome check_long_range_order(const fs::path& root) {
  Criterion c(root, "c9");
  RunConfig cfg = c.config(4);
  const Report b = c.run("bounds", cfg, "bounds");
  c.require(b, {"quadrature_stable", "cd_monotone", "beta_d_bracket"}, "bounds");
  c.note(detail_of(b, "beta_d_bracket"));

  const LatticeSpec spec = cfg.spec();
  const KernelTable t = obtain_kernel(cfg, spec);
  const FourierKernel fk = fourier_kernel(t);
  const ConstantsRecord k = constants(t, fk);
  double beta = beta_for_finite_bound(spec, k.alpha.value, k.gamma.value, 0.2);
  while (finite_volume_bound(spec, k.alpha.value, k.gamma.value, beta) < 0.2) beta *= 1.0 + 1e-9;
  char buf[128];
  std::snprintf(buf, sizeof buf, "beta = %.6g (finite-box bound %.6g)", beta,
                finite_volume_bound(spec, k.alpha.value, k.gamma.value, beta));
  c.note(buf);

  cfg.mc.beta = beta;
  cfg.mc.start = StartKind::ordered;
  cfg.mc.chains = 4;
  cfg.mc.sweeps = 6000;
  cfg.mc.burn_in = 1000;
  cfg.mc.seed = 1;
  const Report s = c.run("simulate", cfg, "lro");
  c.require(s, {"energy_drift", "order_above_finite_box_bound"}, "lro");
  c.note(detail_of(s, "order_above_finite_box_bound"));
  return c.outcome();
}

struct Entry {
  int number;
  const char* title;
  std::function<Outcome(const fs::path&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_work");
  // Optional copy of the criterion lines, for when the console is not kept.
  std::FILE* summary = argc > 2 ? std::fopen(argv[2], "w") : nullptr;
  auto line = [&](const char* f, auto... args) {
    std::printf(f, args...);
    std::fflush(stdout);
    if (summary) {
      std::fprintf(summary, f, args...);
      std::fflush(summary);
    }
  };
  const std::vector<Entry> entries = {
      {1, "PSD sweep d=3, L=2,4,8", check_psd_sweep},
      {2, "W0 - Y >= 0 and quadratic growth", check_conjecture_bound},
      {3, "constants alpha, gamma, e1 - e0, epsilon stability", check_constants_criterion},
      {4, "ground-state degeneracy", check_degeneracy},
      {5, "chessboard lower bound on 4^3", check_chessboard},
      {6, "reflection positivity of the cross operator on 4^3", check_reflection_positivity},
      {7, "gauge identity and staggered row sums on 4^3", check_gauge_identity},
      {8, "Monte Carlo infrared bound, sum rule, disorder limit", check_infrared_bound},
      {9, "long-range order onset and c_3(beta)", check_long_range_order},
  };

  bool all = true;
  std::vector<Outcome> first;
  try {
    fs::remove_all(work);
    for (const auto& e : entries) {
      const auto t0 = std::chrono::steady_clock::now();
      Outcome o = e.run(work / "run1");
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      line("criterion %2d %s: %s [%.1fs] %s\n", e.number, o.ok ? "PASS" : "FAIL", e.title, s, o.detail.c_str());
      all = all && o.ok;
      first.push_back(std::move(o));
    }

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> diffs;
    std::size_t files = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const Outcome again = entries[i].run(work / "run2");
      if (again.fingerprint.size() != first[i].fingerprint.size())
        diffs.push_back("criterion " + std::to_string(entries[i].number) + " produced a different file set");
      for (const auto& [name, bytes] : first[i].fingerprint) {
        ++files;
        const auto it = again.fingerprint.find(name);
        if (it == again.fingerprint.end() || it->second != bytes) diffs.push_back(name);
      }
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string detail = std::to_string(files) + " artifacts compared byte for byte";
    for (const auto& d : diffs) detail += "; differs: " + d;
    line("criterion 10 %s: determinism under a fixed seed [%.1fs] %s\n", diffs.empty() ? "PASS" : "FAIL", s,
         detail.c_str());
    all = all && diffs.empty();
  } catch (const Error& e) {
    line("acceptance aborted: %s\n", e.what());
    if (summary) std::fclose(summary);
    return 2;
  }
  if (summary) std::fclose(summary);
  return all ? 0 : 1;
}
