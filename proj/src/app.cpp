#include "dipole/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dipole/bounds.hpp"
#include "dipole/error.hpp"
#include "dipole/mc.hpp"
#include "dipole/random.hpp"
#include "dipole/rp.hpp"
#include "dipole/spectral.hpp"

namespace fs = std::filesystem;

namespace dipole {

namespace {

std::string fmt(const char* f, double v) {
  std::string s(static_cast<std::size_t>(std::snprintf(nullptr, 0, f, v)), '\0');
  std::snprintf(s.data(), s.size() + 1, f, v);
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write " + tmp.string());
    out << text;
    if (!out) fail(ErrorCode::io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void say(std::ostream* log, const std::string& s) {
  if (log) *log << s << '\n';
}

fs::path out_dir(const RunConfig& cfg) {
  fs::create_directories(cfg.out);
  return cfg.out;
}

Check timed(Check c, const Stopwatch& sw) {
  c.seconds = sw.seconds();
  return c;
}

KernelBuildOptions build_options(const RunConfig& cfg) {
  KernelBuildOptions o;
  o.tol = cfg.kernel_tol;
  o.threads = cfg.threads;
  o.max_radius_in_L = cfg.kernel_max_radius;
  return o;
}

// The constants record without internal agreement checks, so that
// disagreements surface as failed checks.
ConstantsRecord raw_constants(const KernelTable& t, const FourierKernel& fk) {
  ConstantsOptions loose;
  loose.alpha_rel_tol = loose.gamma_rel_tol = loose.e_rel_tol = std::numeric_limits<double>::infinity();
  return constants(t, fk, loose);
}

Report kernel_command(const RunConfig& cfg, std::ostream* log) {
  Report r("kernel");
  Stopwatch sw;
  const LatticeSpec spec = cfg.spec();
  bool loaded = false;
  const KernelTable t = obtain_kernel(cfg, spec, &loaded, log);
  r.add(timed(make_check("kernel_cache", "checksum-verified cache or fresh build", true, 0.0, 0.0,
                         loaded ? "loaded from cache" : "built and stored"),
              sw));
  const double bound = t.truncation_error_bound();
  r.add(timed(make_check("image_truncation", "image tail bound per entry", bound <= cfg.kernel_tol,
                         cfg.kernel_tol - bound, cfg.kernel_tol,
                         "cutoff " + std::to_string(t.image_cutoff()) + ", tail bound " + fmt("%.3g", bound)),
              sw));
  // Parity and matrix symmetry.
  const int d = spec.dim();
  double worst = 0.0;
  for (std::size_t z = 0; z < spec.volume(); ++z) {
    const Site x = Site::from_index(spec, z);
    std::array<int, kMaxDim> m{};
    for (int k = 0; k < d; ++k) m[k] = -x[k];
    const std::size_t mz = Site(spec, std::span<const int>(m.data(), d)).index(spec);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        worst = std::max({worst, std::abs(t.entry(z, i, j) - t.entry(z, j, i)), std::abs(t.entry(z, i, j) - t.entry(mz, i, j))});
  }
  r.add(timed(make_check("kernel_parity_symmetry", "W(-x) = W(x) = W(x)^T", worst == 0.0, -worst, 0.0), sw));
  const FourierKernel fk = fourier_kernel(t, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  double maxw = 0.0;
  for (double v : fk.data()) maxw = std::max(maxw, std::abs(v));
  const double itol = 1e-10 * maxw;
  r.add(timed(make_check("fourier_real", "transform of an even kernel is real", fk.max_imag_residual() <= itol,
                         itol - fk.max_imag_residual(), itol, fmt("max imaginary residual %.3g", fk.max_imag_residual())),
              sw));
  const double etol = cfg.tolerance("e_rel") * std::abs(fk.e0());
  const double ediff = std::abs(fk.e0() - fk.e0_fourier());
  r.add(timed(make_check("e0_real_vs_fourier", "staggered sum equals W_00 at pi_0", ediff <= etol, etol - ediff, etol,
                         fmt("e0 = %.15g", fk.e0())),
              sw));
  return r;
}

Report spectrum_command(const RunConfig& cfg, std::ostream* log) {
  Report r("spectrum");
  const LatticeSpec spec = cfg.spec();
  const KernelTable t = obtain_kernel(cfg, spec, nullptr, log);
  const FourierKernel fk = fourier_kernel(t);
  const ConstantsRecord c = raw_constants(t, fk);
  say(log, "sweeping " + std::to_string(spec.volume()) + " momenta");
  const SpectrumTable st = psd_sweep(fk, cfg.tolerance("zero"), c.alpha.value, c.gamma.value, cfg.threads);
  r.merge(spectral_checks(fk, st, c, cfg.tolerance("negative"), cfg.tolerance("bound"), cfg.tolerance("curvature_slack")));
  write_spectrum_csv(st, out_dir(cfg) / "spectrum.csv");
  return r;
}

nlohmann::ordered_json estimate_json(const ConstantEstimate& e) {
  nlohmann::ordered_json j;
  j["value"] = e.value;
  j["error"] = e.error;
  j["method"] = e.method;
  return j;
}

Report constants_command(const RunConfig& cfg, std::ostream* log) {
  Report r("constants");
  Stopwatch sw;
  const LatticeSpec spec = cfg.spec();
  const KernelTable t = obtain_kernel(cfg, spec, nullptr, log);
  const FourierKernel fk = fourier_kernel(t);
  const ConstantsRecord c = raw_constants(t, fk);
  const int d = spec.dim();
  r.add(timed(make_check("alpha_positive", "alpha > 0", c.alpha.value > 0, c.alpha.value, 0.0, fmt("alpha = %.12g", c.alpha.value)), sw));
  r.add(timed(make_check("gamma_positive", "gamma > 0", c.gamma.value > 0, c.gamma.value, 0.0, fmt("gamma = %.12g", c.gamma.value)), sw));
  auto agree = [&](const char* name, const char* anchor, double a, double b, double rel) {
    const double tol = rel * std::abs(a);
    const double diff = std::abs(a - b);
    char buf[160];
    std::snprintf(buf, sizeof buf, "real space %.15g, other %.15g", a, b);
    r.add(timed(make_check(name, anchor, diff <= tol, tol - diff, tol, buf), sw));
  };
  agree("alpha_series", "alpha: mode series vs real-space sum", c.alpha.value, c.alpha_series.value, cfg.tolerance("alpha_rel"));
  agree("gamma_series", "gamma: mode series vs real-space sum", c.gamma.value, c.gamma_series.value, cfg.tolerance("gamma_rel"));
  agree("e0_fourier", "e0: staggered sum vs W_00(pi_0)", c.e0.value, c.e0_fourier.value, cfg.tolerance("e_rel"));
  agree("e1_fourier", "e1: staggered sum vs W_00(pi_1)", c.e1.value, c.e1_fourier.value, cfg.tolerance("e_rel"));
  {
    const double gap = c.e1.value - c.e0.value;
    const double need = (c.alpha.value + c.gamma.value) / d - 1e-10 * c.scale;
    r.add(timed(make_check("gap_exceeds_constants", "e1 - e0 >= (alpha + gamma)/d", gap >= need, gap - need, 1e-10 * c.scale,
                           fmt("e1 - e0 = %.12g", gap) + fmt(", (alpha + gamma)/d = %.12g", (c.alpha.value + c.gamma.value) / d)),
                sw));
  }
  // Screening stability at fixed L: epsilon and epsilon / 2.
  const LatticeSpec half = LatticeSpec::with_epsilon(d, spec.half_side(), 0.5 * spec.epsilon());
  say(log, "building the kernel at epsilon / 2 for the stability check");
  const KernelTable th = obtain_kernel(cfg, half, nullptr, log);
  const FourierKernel fh = fourier_kernel(th);
  const ConstantsRecord ch = raw_constants(th, fh);
  const double da = std::abs(ch.alpha.value - c.alpha.value) / c.alpha.value;
  const double dg = std::abs(ch.gamma.value - c.gamma.value) / c.gamma.value;
  const double stol = cfg.tolerance("eps_stability");
  char buf[200];
  std::snprintf(buf, sizeof buf, "epsilon %.6g vs %.6g: alpha %.10g vs %.10g, gamma %.10g vs %.10g", spec.epsilon(),
                half.epsilon(), c.alpha.value, ch.alpha.value, c.gamma.value, ch.gamma.value);
  r.add(timed(make_check("epsilon_stability", "alpha, gamma change < 1% when epsilon halves", std::max(da, dg) < stol,
                         stol - std::max(da, dg), stol, buf),
              sw));

  nlohmann::ordered_json j;
  j["dim"] = c.dim;
  j["L"] = spec.half_side();
  j["epsilon"] = c.epsilon;
  j["e0"] = estimate_json(c.e0);
  j["e0_fourier"] = estimate_json(c.e0_fourier);
  j["e1"] = estimate_json(c.e1);
  j["e1_fourier"] = estimate_json(c.e1_fourier);
  j["alpha"] = estimate_json(c.alpha);
  j["alpha_series"] = estimate_json(c.alpha_series);
  j["gamma"] = estimate_json(c.gamma);
  j["gamma_series"] = estimate_json(c.gamma_series);
  j["scale"] = c.scale;
  write_text(out_dir(cfg) / "constants.json", j.dump(2) + "\n");
  return r;
}

Report bounds_command(const RunConfig& cfg, std::ostream* log) {
  Report r("bounds");
  Stopwatch sw;
  const LatticeSpec spec = cfg.spec();
  const KernelTable t = obtain_kernel(cfg, spec, nullptr, log);
  const FourierKernel fk = fourier_kernel(t);
  const ConstantsRecord c = raw_constants(t, fk);
  const int d = spec.dim();
  say(log, "Brillouin-zone quadrature");
  const QuadratureResult q = lro_integral(d, c.alpha.value, c.gamma.value, cfg.quad_n0, cfg.quad_n_max, cfg.threads);
  {
    const std::size_t k = q.extrapolated.size();
    const double a = q.extrapolated[k - 2], b = q.extrapolated[k - 1];
    const double rel = std::abs(a - b) / std::abs(b);
    const double tol = cfg.tolerance("quad_rel");
    std::string detail = "raw:";
    for (std::size_t i = 0; i < q.raw.size(); ++i) detail += " n=" + std::to_string(q.grids[i]) + fmt(" %.8g", q.raw[i]);
    detail += "; extrapolated:";
    for (double v : q.extrapolated) detail += fmt(" %.8g", v);
    r.add(timed(make_check("quadrature_stable", "integral agrees between the two finest grids", rel <= tol, tol - rel, tol, detail), sw));
  }
  {
    double prev = -std::numeric_limits<double>::infinity();
    bool mono = true;
    double worst = std::numeric_limits<double>::infinity();
    std::vector<double> betas = cfg.cd_betas;
    std::sort(betas.begin(), betas.end());
    for (double b : betas) {
      const double v = c_d(d, q.value, b);
      worst = std::min(worst, v - prev);
      mono = mono && v > prev;
      prev = v;
    }
    r.add(timed(make_check("cd_monotone", "c_d(beta) increasing in beta", mono, worst, 0.0), sw));
    write_cd_curve_csv(spec, c, q, betas, out_dir(cfg) / "cd_curve.csv");
  }
  const LROEstimate e = lro_lower_bound(spec, c, cfg.mc.beta > 0 ? cfg.mc.beta : 1.0, q);
  {
    const bool ok = std::isfinite(e.beta_d) && e.beta_d_lo <= e.beta_d && e.beta_d <= e.beta_d_hi && e.beta_d > 0;
    char buf[200];
    std::snprintf(buf, sizeof buf, "beta_d = %.6g in [%.6g, %.6g]", e.beta_d, e.beta_d_lo, e.beta_d_hi);
    r.add(timed(make_check("beta_d_bracket", "root of c_d with propagated quadrature error", ok, e.beta_d - e.beta_d_lo, 0.0, buf), sw));
  }
  if (cfg.mc.beta > 0) {
    const IRBoundTable ir = ir_bound(fk, c, cfg.mc.beta);
    Check ck = ir_consistency_check(ir);
    r.add(timed(ck, sw));
  }
  nlohmann::ordered_json j;
  j["dim"] = d;
  j["L"] = spec.half_side();
  j["epsilon"] = spec.epsilon();
  j["integral"] = q.value;
  j["integral_error"] = q.error;
  j["beta_d"] = e.beta_d;
  j["beta_d_lo"] = e.beta_d_lo;
  j["beta_d_hi"] = e.beta_d_hi;
  j["beta"] = cfg.mc.beta;
  j["finite_box_bound_at_beta"] = cfg.mc.beta > 0 ? finite_volume_bound(spec, c.alpha.value, c.gamma.value, cfg.mc.beta) : 0.0;
  j["beta_for_finite_box_bound_0.2"] = beta_for_finite_bound(spec, c.alpha.value, c.gamma.value, 0.2);
  write_text(out_dir(cfg) / "bounds.json", j.dump(2) + "\n");
  return r;
}

Report verify_rp_command(const RunConfig& cfg, std::ostream* log) {
  Report r("verify-rp");
  Stopwatch sw;
  const LatticeSpec spec = cfg.spec();
  const KernelTable t = obtain_kernel(cfg, spec, nullptr, log);
  const FourierKernel fk = fourier_kernel(t);
  const double e0 = fk.e0();
  const double e0n = e0 * static_cast<double>(spec.volume());
  const double scale = spectral_scale(fk);
  const double etol = cfg.tolerance("energy_rel");
  auto rng = make_engine(cfg.mc.seed, 1000);

  {
    const double dev = primed_row_sum_deviation(t, e0);
    const double tol = t.truncation_error_bound();
    r.add(timed(make_check("staggered_row_sums", "sum_y W'(x,y) = e0 Id within the truncation bound", dev <= tol, tol - dev,
                           tol, fmt("max deviation %.3g", dev)),
                sw));
  }
  double worst_gauge = 0.0, worst_chess = std::numeric_limits<double>::infinity(), worst_lower = worst_chess;
  std::size_t chess_fail = 0, lower_fail = 0;
  const auto planes = all_planes(spec);
  for (int k = 0; k < std::max(cfg.rp_configs, cfg.lower_bound_configs); ++k) {
    const SpinConfig cfg_k = SpinConfig::random(spec, Gauge::original, rng);
    const double h = energy(cfg_k, t);
    if (k < cfg.lower_bound_configs) {
      const double lower = h - e0n;
      worst_lower = std::min(worst_lower, lower);
      if (lower < -etol * std::abs(e0n)) ++lower_fail;
    }
    if (k >= cfg.rp_configs) continue;
    const double hp = energy_primed(cfg_k, t, e0);
    worst_gauge = std::max(worst_gauge, std::abs(h - hp) / std::max(std::abs(h), std::abs(e0n)));
    for (const auto& p : planes) {
      const ChessboardEnergies ce = chessboard_step(cfg_k, p, t);
      const double m = ce.original - 0.5 * (ce.positive + ce.negative);
      worst_chess = std::min(worst_chess, m);
      if (m < -etol * std::abs(e0n)) ++chess_fail;
    }
  }
  const std::string n = std::to_string(cfg.rp_configs);
  r.add(timed(make_check("energy_lower_bound", "H >= e0 |box| for random configurations", lower_fail == 0, worst_lower,
                         etol * std::abs(e0n), std::to_string(cfg.lower_bound_configs) + " configurations, min (H - e0|box|) = " + fmt("%.6g", worst_lower)),
              sw));
  r.add(timed(make_check("chessboard_step", "H >= (H(positive) + H(negative)) / 2 for every plane", chess_fail == 0,
                         worst_chess, etol * std::abs(e0n),
                         n + " configurations x " + std::to_string(planes.size()) + " planes, min margin " + fmt("%.6g", worst_chess)),
              sw));
  r.add(timed(make_check("gradient_form_identity", "energy equals the staggered gradient form plus e0 |box|",
                         worst_gauge <= etol, etol - worst_gauge, etol,
                         n + fmt(" configurations, max |H - H_gradient| / max(|H|, |e0||box|) = %.3g", worst_gauge) +
                             (spec.half_side() > 2 && worst_gauge > etol
                                  ? "; the rewrite assumes W'(x,y) is a symmetric d x d matrix, which holds only for L = 2"
                                  : "")),
              sw));
  {
    double worst = std::numeric_limits<double>::infinity();
    double asym = 0.0;
    for (const auto& p : planes) {
      const CrossOperator op = cross_operator(t, p);
      const auto ev = symmetric_eigenvalues(op.matrix, static_cast<int>(op.sites.size()) * op.dim);
      worst = std::min(worst, ev.front());
      asym = std::max(asym, op.max_asymmetry);
    }
    const double tol = cfg.tolerance("rp_eig") * scale;
    r.add(timed(make_check("cross_operator_psd", "reflection positivity: cross coupling operator >= 0", worst >= -tol,
                           worst + tol, tol,
                           std::to_string(planes.size()) + " planes, min eigenvalue " + fmt("%.6g", worst) +
                               fmt(", asymmetry %.2g", asym)),
                sw));
  }
  {
    double md = 0.0;
    const SpinConfig c = SpinConfig::random(spec, Gauge::staggered, rng);
    for (const auto& p : planes) {
      const SpinConfig a = reflect(c, p);
      const SpinConfig b = reflect(c.to_original(), p).to_staggered();
      for (std::size_t k = 0; k < a.data().size(); ++k) md = std::max(md, std::abs(a.data()[k] - b.data()[k]));
    }
    r.add(timed(make_check("reflection_gauge_consistency", "site-only reflection of sigma matches the spin reflection of S",
                           md == 0.0, -md, 0.0),
                sw));
  }
  return r;
}

Report groundstate_command(const RunConfig& cfg, std::ostream* log) {
  Report r("groundstate");
  Stopwatch sw;
  const LatticeSpec spec = cfg.spec();
  const KernelTable t = obtain_kernel(cfg, spec, nullptr, log);
  const FourierKernel fk = fourier_kernel(t);
  const double e0n = fk.e0() * static_cast<double>(spec.volume());
  const double tol = cfg.tolerance("energy_rel") * std::abs(e0n);
  auto rng = make_engine(cfg.mc.seed, 2000);
  double worst = 0.0, worst_fft = 0.0;
  const int d = spec.dim();
  std::vector<int> origin(d, 0);
  for (int k = 0; k < cfg.groundstate_directions; ++k) {
    std::vector<double> v(d);
    random_unit_vector(rng, v);
    const SpinConfig g = ground_state(spec, v, Site(spec, std::span<const int>(origin)));
    worst = std::max(worst, std::abs(energy(g, t) - e0n));
    worst_fft = std::max(worst_fft, std::abs(energy_fft(g, fk) - e0n));
  }
  r.add(timed(make_check("ground_state_degeneracy", "H = e0 |box| for every staggered direction", worst <= tol, tol - worst,
                         tol, std::to_string(cfg.groundstate_directions) + fmt(" directions, max |H - e0|box|| = %.3g", worst)),
              sw));
  r.add(timed(make_check("ground_state_fft", "fast-transform energy of the staggered states", worst_fft <= tol,
                         tol - worst_fft, tol, fmt("max deviation %.3g", worst_fft)),
              sw));
  {
    const SpinConfig c = SpinConfig::random(spec, Gauge::original, rng);
    const std::vector<double> steps = chessboard_descent(c, t);
    bool monotone = true;
    for (std::size_t k = 1; k < steps.size(); ++k) monotone = monotone && steps[k] <= steps[k - 1] + tol;
    const double gap = std::abs(steps.back() - e0n);
    r.add(timed(make_check("reflection_descent", "greedy reflections reach a staggered ground state",
                           monotone && gap <= 1e-9 * std::abs(e0n), 1e-9 * std::abs(e0n) - gap, 1e-9 * std::abs(e0n),
                           std::to_string(steps.size() - 1) + fmt(" reflections, final (H - e0|box|) = %.3g", steps.back() - e0n)),
                sw));
  }
  return r;
}

std::vector<Probe> default_probes(const LatticeSpec& s) {
  const int d = s.dim();
  std::vector<Probe> probes;
  std::vector<int> zero(d, 0), half(d, s.half_side() / 2), mixed(d, 1);
  std::vector<std::complex<double>> v(d), w(d);
  for (int i = 0; i < d; ++i) {
    v[i] = 1.0 / std::sqrt(static_cast<double>(d));
    w[i] = std::complex<double>(std::cos(i + 1.0), std::sin(2.0 * i));
  }
  probes.push_back({Momentum(s, std::span<const int>(zero)), v});
  if (s.half_side() % 2 == 0) probes.push_back({Momentum(s, std::span<const int>(half)), v});
  mixed[0] = 0;
  probes.push_back({Momentum(s, std::span<const int>(mixed)), w});
  return probes;
}

Report simulate_command(const RunConfig& cfg, std::ostream* log) {
  Report r("simulate");
  Stopwatch sw;
  const LatticeSpec spec = cfg.spec();
  const KernelTable t = obtain_kernel(cfg, spec, nullptr, log);
  const FourierKernel fk = fourier_kernel(t);
  const double e0 = fk.e0();
  MCParams p = cfg.mc;
  p.threads = cfg.threads;
  const std::vector<Probe> probes = cfg.simulate_gd ? default_probes(spec) : std::vector<Probe>{};
  say(log, "sampling " + std::to_string(p.chains) + " chains x " + std::to_string(p.sweeps) + " sweeps");
  const ObservableSeries s = sample(t, e0, p, probes);
  const double n = static_cast<double>(spec.volume());
  const double drift_tol = 1e-6 * std::abs(e0) * n;
  r.add(timed(make_check("energy_drift", "incremental vs recomputed energy at audits", s.max_drift() <= drift_tol,
                         drift_tol - s.max_drift(), drift_tol, fmt("max drift %.3g", s.max_drift())),
              sw));
  r.add(timed(make_check("parseval", "(1/|box|) sum_p,l |S_p|^2 = 1 per configuration", s.max_parseval_error() <= 1e-10,
                         1e-10 - s.max_parseval_error(), 1e-10, fmt("max error %.3g", s.max_parseval_error())),
              sw));
  r.add(timed(make_check("order_parameter_identity", "|S^l_{pi_l}|^2/|box| = (M^l)^2/|box|^2 per configuration",
                         s.max_order_identity_error() <= 1e-12, 1e-12 - s.max_order_identity_error(), 1e-12,
                         fmt("max error %.3g", s.max_order_identity_error())),
              sw));
  const Estimate m = s.order_parameter();
  if (p.beta == 0.0) {
    const double target = 1.0 / n;
    const double dev = std::abs(m.mean - target);
    Check c;
    c.name = "disorder_limit";
    c.anchor = "beta = 0: <|M|^2>/|box|^2 = 1/|box|";
    c.verdict = dev <= 2 * m.sigma ? Verdict::pass : (dev <= 3 * m.sigma ? Verdict::warn : Verdict::fail);
    c.margin = 3 * m.sigma - dev;
    c.tolerance = 3.0;
    c.detail = fmt("measured %.8g", m.mean) + fmt(" +- %.3g", m.sigma) + fmt(", expected %.8g", target);
    r.add(timed(c, sw));
    r.add(timed(make_check("acceptance_at_infinite_temperature", "every move accepted at beta = 0", s.acceptance() == 1.0,
                           s.acceptance() - 1.0, 0.0, fmt("acceptance %.6f", s.acceptance())),
                sw));
  } else {
    const ConstantsRecord c = raw_constants(t, fk);
    Report ir = ir_check(s, ir_bound(fk, c, p.beta));
    for (auto ch : ir.checks()) r.add(timed(ch, sw));
    const double bound = finite_volume_bound(spec, c.alpha.value, c.gamma.value, p.beta);
    const double per = m.mean / spec.dim();
    const double sigma = m.sigma / spec.dim();
    Check lro;
    lro.name = "order_above_finite_box_bound";
    lro.anchor = "(1/d) <|M|^2>/|box|^2 >= finite-box lower bound";
    const double deficit = bound - per;
    lro.verdict = deficit <= 2 * sigma ? Verdict::pass : (deficit <= 3 * sigma ? Verdict::warn : Verdict::fail);
    lro.margin = per + 3 * sigma - bound;
    lro.tolerance = 3.0;
    lro.detail = fmt("measured %.6g", per) + fmt(" +- %.3g", sigma) + fmt(", bound %.6g", bound);
    r.add(timed(lro, sw));
  }
  if (!probes.empty()) r.merge(gaussian_domination_report(s, t, fk));

  const fs::path dir = out_dir(cfg);
  write_series_csv(s, dir / "series.csv");
  nlohmann::ordered_json j;
  j["beta"] = p.beta;
  j["chains"] = p.chains;
  j["sweeps"] = p.sweeps;
  j["burn_in"] = p.burn_in;
  j["seed"] = p.seed;
  j["generator"] = "mt19937_64 per chain, seeded by seed_seq from four splitmix64 outputs of (seed, chain index)";
  const Estimate e = s.energy();
  j["energy_per_site"] = {{"mean", e.mean / n}, {"sigma", e.sigma / n}, {"tau", e.tau}};
  j["order_parameter"] = {{"mean", m.mean}, {"sigma", m.sigma}, {"tau", m.tau}};
  j["acceptance"] = s.acceptance();
  auto angles = nlohmann::ordered_json::array();
  for (const auto& ch : s.chains()) angles.push_back(ch.half_angle);
  j["half_angles"] = angles;
  write_text(dir / "simulate.summary.json", j.dump(2) + "\n");
  return r;
}

Report report_command(const RunConfig& cfg, std::ostream* log) {
  Report all("report");
  const fs::path dir = cfg.out;
  std::vector<fs::path> files;
  if (fs::is_directory(dir))
    for (const auto& e : fs::directory_iterator(dir)) {
      const std::string name = e.path().filename().string();
      const std::string suffix = ".report.json";
      if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0 &&
          name != "report.report.json")
        files.push_back(e.path());
    }
  if (files.empty()) fail(ErrorCode::not_found, "nothing to aggregate: no reports in " + dir.string());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    const Report one = Report::from_json(ss.str());
    say(log, "aggregating " + f.filename().string());
    for (Check c : one.checks()) {
      c.name = one.title() + "/" + c.name;
      all.add(std::move(c));
    }
  }
  return all;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"kernel", "spectrum", "constants", "bounds", "verify-rp",
                                             "groundstate", "simulate", "report"};
  return s;
}

KernelTable obtain_kernel(const RunConfig& cfg, const LatticeSpec& spec, bool* loaded, std::ostream* log) {
  fs::create_directories(cfg.cache);
  char name[128];
  std::snprintf(name, sizeof name, "kernel_d%d_L%d_eps%.17g.dipw", spec.dim(), spec.half_side(), spec.epsilon());
  const fs::path path = fs::path(cfg.cache) / name;
  if (loaded) *loaded = false;
  if (fs::exists(path)) {
    try {
      KernelTable t = load_kernel(path);
      if (t.spec() == spec && t.truncation_error_bound() <= cfg.kernel_tol) {
        if (loaded) *loaded = true;
        say(log, "kernel loaded from " + path.string());
        return t;
      }
      say(log, "cached kernel does not meet the tolerance; rebuilding");
    } catch (const Error& e) {
      say(log, std::string("cache unusable (") + e.what() + "); rebuilding");
    }
  }
  say(log, "building kernel d=" + std::to_string(spec.dim()) + " L=" + std::to_string(spec.half_side()));
  KernelTable t = build_kernel(spec, build_options(cfg));
  save_kernel(t, path);
  return t;
}

Report run_subcommand(const std::string& name, const RunConfig& cfg, std::ostream* log) {
  validate(cfg);
  Report r;
  if (name == "kernel")
    r = kernel_command(cfg, log);
  else if (name == "spectrum")
    r = spectrum_command(cfg, log);
  else if (name == "constants")
    r = constants_command(cfg, log);
  else if (name == "bounds")
    r = bounds_command(cfg, log);
  else if (name == "verify-rp")
    r = verify_rp_command(cfg, log);
  else if (name == "groundstate")
    r = groundstate_command(cfg, log);
  else if (name == "simulate")
    r = simulate_command(cfg, log);
  else if (name == "report")
    r = report_command(cfg, log);
  else
    fail(ErrorCode::invalid_argument, "unknown subcommand '" + name + "'");
  const fs::path dir = out_dir(cfg);
  write_text(dir / (name + ".report.json"), r.to_json(cfg.report_timings));
  return r;
}

}  // namespace dipole
