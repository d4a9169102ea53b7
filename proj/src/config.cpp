#include "dipole/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "dipole/error.hpp"

namespace dipole {

std::map<std::string, double> default_tolerances() {
  return {
      {"alpha_rel", 1e-6},       // series vs real-space alpha
      {"bound", 1e-8},           // lambda_min(W0 - Y) >= -bound * scale
      {"curvature_slack", 0.05}, // fitted curvature >= (1 - slack) alpha / d
      {"e_rel", 1e-8},           // e0, e1 real space vs Fourier
      {"energy_rel", 1e-10},     // energy identities, relative to |e0| |box|
      {"eps_stability", 0.01},   // alpha, gamma at epsilon vs epsilon / 2
      {"gamma_rel", 1e-6},       // series vs real-space gamma
      {"negative", 1e-8},        // lambda_min(W0) >= -negative * scale
      {"quad_rel", 0.01},        // quadrature grids agree within this fraction
      {"rp_eig", 1e-10},         // cross-operator eigenvalues >= -rp_eig * scale
      {"zero", 1e-6},            // zero-set detection, relative to scale
  };
}

RunConfig::RunConfig() : tol(default_tolerances()) {
  mc.beta = 5.0;
  mc.sweeps = 22000;
  mc.burn_in = 2000;
  mc.chains = 4;
  mc.seed = 1;
}

LatticeSpec RunConfig::spec() const {
  return epsilon_auto ? LatticeSpec::with_auto_epsilon(dim, L, epsilon_c) : LatticeSpec::with_epsilon(dim, L, epsilon);
}

double RunConfig::tolerance(const std::string& name) const {
  const auto it = tol.find(name);
  if (it == tol.end()) fail(ErrorCode::internal, "unknown tolerance " + name);
  return it->second;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    fail(ErrorCode::invalid_argument, key + ": '" + v + "' is not a number");
  return out;
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    fail(ErrorCode::invalid_argument, key + ": '" + v + "' is not an integer");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    fail(ErrorCode::invalid_argument, key + ": '" + v + "' is not an unsigned integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail(ErrorCode::invalid_argument, key + ": '" + v + "' is not true/false");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      {"dim", [](RunConfig& c, auto& n, auto& v) { c.dim = static_cast<int>(parse_int(n, v)); },
       [](const RunConfig& c) { return std::to_string(c.dim); }},
      {"L", [](RunConfig& c, auto& n, auto& v) { c.L = static_cast<int>(parse_int(n, v)); },
       [](const RunConfig& c) { return std::to_string(c.L); }},
      {"epsilon",
       [](RunConfig& c, auto& n, auto& v) {
         if (v == "auto") {
           c.epsilon_auto = true;
         } else {
           c.epsilon_auto = false;
           c.epsilon = parse_double(n, v);
         }
       },
       [](const RunConfig& c) { return c.epsilon_auto ? std::string("auto") : fmt(c.epsilon); }},
      {"epsilon_c", [](RunConfig& c, auto& n, auto& v) { c.epsilon_c = parse_double(n, v); },
       [](const RunConfig& c) { return fmt(c.epsilon_c); }},
      {"kernel_tol", [](RunConfig& c, auto& n, auto& v) { c.kernel_tol = parse_double(n, v); },
       [](const RunConfig& c) { return fmt(c.kernel_tol); }},
      {"kernel_max_radius", [](RunConfig& c, auto& n, auto& v) { c.kernel_max_radius = static_cast<int>(parse_int(n, v)); },
       [](const RunConfig& c) { return std::to_string(c.kernel_max_radius); }},
      {"threads", [](RunConfig& c, auto& n, auto& v) { c.threads = static_cast<int>(parse_int(n, v)); },
       [](const RunConfig& c) { return std::to_string(c.threads); }},
      {"beta", [](RunConfig& c, auto& n, auto& v) { c.mc.beta = parse_double(n, v); },
       [](const RunConfig& c) { return fmt(c.mc.beta); }},
      {"sweeps", [](RunConfig& c, auto& n, auto& v) { c.mc.sweeps = static_cast<long>(parse_int(n, v)); },
       [](const RunConfig& c) { return std::to_string(c.mc.sweeps); }},
      {"burn_in", [](RunConfig& c, auto& n, auto& v) { c.mc.burn_in = static_cast<long>(parse_int(n, v)); },
       [](const RunConfig& c) { return std::to_string(c.mc.burn_in); }},
      {"chains", [](RunConfig& c, auto& n, auto& v) { c.mc.chains = static_cast<int>(parse_int(n, v)); },
       [](const RunConfig& c) { return std::to_string(c.mc.chains); }},
      {"seed", [](RunConfig& c, auto& n, auto& v) { c.mc.seed = parse_u64(n, v); },
       [](const RunConfig& c) { return std::to_string(c.mc.seed); }},
      {"half_angle", [](RunConfig& c, auto& n, auto& v) { c.mc.half_angle = parse_double(n, v); },
       [](const RunConfig& c) { return fmt(c.mc.half_angle); }},
      {"target_acceptance", [](RunConfig& c, auto& n, auto& v) { c.mc.target_acceptance = parse_double(n, v); },
       [](const RunConfig& c) { return fmt(c.mc.target_acceptance); }},
      {"audit_interval", [](RunConfig& c, auto& n, auto& v) { c.mc.audit_interval = static_cast<int>(parse_int(n, v)); },
       [](const RunConfig& c) { return std::to_string(c.mc.audit_interval); }},
      {"start",
       [](RunConfig& c, auto& n, auto& v) {
         if (v == "random")
           c.mc.start = StartKind::random;
         else if (v == "ordered")
           c.mc.start = StartKind::ordered;
         else
           fail(ErrorCode::invalid_argument, n + ": '" + v + "' is not random/ordered");
       },
       [](const RunConfig& c) { return std::string(c.mc.start == StartKind::random ? "random" : "ordered"); }},
      {"quad_n0", [](RunConfig& c, auto& n, auto& v) { c.quad_n0 = static_cast<int>(parse_int(n, v)); },
       [](const RunConfig& c) { return std::to_string(c.quad_n0); }},
      {"quad_n_max", [](RunConfig& c, auto& n, auto& v) { c.quad_n_max = static_cast<int>(parse_int(n, v)); },
       [](const RunConfig& c) { return std::to_string(c.quad_n_max); }},
      {"cd_betas",
       [](RunConfig& c, auto& n, auto& v) {
         std::vector<double> out;
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) out.push_back(parse_double(n, trim(item)));
         c.cd_betas = std::move(out);
       },
       [](const RunConfig& c) {
         std::string s;
         for (std::size_t k = 0; k < c.cd_betas.size(); ++k) s += (k ? "," : "") + fmt(c.cd_betas[k]);
         return s;
       }},
      {"rp_configs", [](RunConfig& c, auto& n, auto& v) { c.rp_configs = static_cast<int>(parse_int(n, v)); },
       [](const RunConfig& c) { return std::to_string(c.rp_configs); }},
      {"lower_bound_configs",
       [](RunConfig& c, auto& n, auto& v) { c.lower_bound_configs = static_cast<int>(parse_int(n, v)); },
       [](const RunConfig& c) { return std::to_string(c.lower_bound_configs); }},
      {"groundstate_directions",
       [](RunConfig& c, auto& n, auto& v) { c.groundstate_directions = static_cast<int>(parse_int(n, v)); },
       [](const RunConfig& c) { return std::to_string(c.groundstate_directions); }},
      {"simulate_gd", [](RunConfig& c, auto& n, auto& v) { c.simulate_gd = parse_bool(n, v); },
       [](const RunConfig& c) { return std::string(c.simulate_gd ? "true" : "false"); }},
      {"report_timings", [](RunConfig& c, auto& n, auto& v) { c.report_timings = parse_bool(n, v); },
       [](const RunConfig& c) { return std::string(c.report_timings ? "true" : "false"); }},
      {"out", [](RunConfig& c, auto&, auto& v) { c.out = v; }, [](const RunConfig& c) { return c.out; }},
      {"cache", [](RunConfig& c, auto&, auto& v) { c.cache = v; }, [](const RunConfig& c) { return c.cache; }},
  };
  return k;
}

}  // namespace

void set_key(RunConfig& c, const std::string& key, const std::string& value) {
  if (key.rfind("tol.", 0) == 0) {
    const std::string name = key.substr(4);
    if (!c.tol.count(name)) fail(ErrorCode::invalid_argument, "unknown tolerance '" + name + "'");
    c.tol[name] = parse_double(key, value);
    return;
  }
  for (const auto& k : keys())
    if (key == k.name) return k.set(c, key, value);
  fail(ErrorCode::invalid_argument, "unknown key '" + key + "'");
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::vector<std::string> errors;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(number) + ": expected key = value");
      continue;
    }
    try {
      set_key(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      errors.push_back("line " + std::to_string(number) + ": " + e.what());
    }
  }
  for (const auto& e : validation_errors(c)) errors.push_back(e);
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    fail(ErrorCode::invalid_argument, msg);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot read configuration " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const RunConfig& c) {
  std::string s;
  for (const auto& k : keys()) s += std::string(k.name) + " = " + k.get(c) + "\n";
  for (const auto& [name, v] : c.tol) s += "tol." + name + " = " + fmt(v) + "\n";
  return s;
}

std::vector<std::string> validation_errors(const RunConfig& c) {
  std::vector<std::string> e;
  if (c.dim < 3 || c.dim > kMaxDim) e.push_back("dim must lie in [3, " + std::to_string(kMaxDim) + "]");
  if (c.L < 2 || c.L % 2 != 0) e.push_back("L must be even and >= 2");
  if (!c.epsilon_auto && !(c.epsilon > 0.0)) e.push_back("epsilon must be > 0");
  if (c.epsilon_auto && !(c.epsilon_c > 0.0)) e.push_back("epsilon_c must be > 0");
  if (!(c.kernel_tol > 0.0)) e.push_back("kernel_tol must be > 0");
  if (c.kernel_max_radius < 1) e.push_back("kernel_max_radius must be >= 1");
  if (c.threads < 1) e.push_back("threads must be >= 1");
  try {
    validate(c.mc);
  } catch (const Error& err) {
    e.push_back(err.what());
  }
  if (c.quad_n0 < 2 || c.quad_n0 % 2) e.push_back("quad_n0 must be even and >= 2");
  if (c.quad_n_max < 2 * c.quad_n0) e.push_back("quad_n_max must be at least 2 quad_n0");
  for (double b : c.cd_betas)
    if (!(b > 0.0)) e.push_back("cd_betas entries must be > 0");
  if (c.rp_configs < 1) e.push_back("rp_configs must be >= 1");
  if (c.lower_bound_configs < 1) e.push_back("lower_bound_configs must be >= 1");
  if (c.groundstate_directions < 1) e.push_back("groundstate_directions must be >= 1");
  for (const auto& [name, v] : c.tol)
    if (!(v >= 0.0)) e.push_back("tol." + name + " must be >= 0");
  if (c.out.empty()) e.push_back("out must not be empty");
  if (c.cache.empty()) e.push_back("cache must not be empty");
  return e;
}

void validate(const RunConfig& c) {
  const auto e = validation_errors(c);
  if (e.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& s : e) msg += "\n  " + s;
  fail(ErrorCode::invalid_argument, msg);
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_text(a) == to_text(b); }

}  // namespace dipole
