#include "dipole/dipole.h"

#include <cstring>
#include <iostream>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "dipole/app.hpp"
#include "dipole/config.hpp"
#include "dipole/error.hpp"
#include "dipole/kernel.hpp"
#include "dipole/report.hpp"

struct dp_config {
  dipole::RunConfig cfg;
};

struct dp_report {
  dipole::Report report;
};

struct dp_kernel {
  dipole::KernelTable table;
  std::optional<double> e0;
};

namespace {

thread_local std::string last_error;

dp_status code_of(dipole::ErrorCode c) {
  switch (c) {
    case dipole::ErrorCode::invalid_argument: return DP_ERR_INVALID_ARGUMENT;
    case dipole::ErrorCode::numerical: return DP_ERR_NUMERICAL;
    case dipole::ErrorCode::io: return DP_ERR_IO;
    case dipole::ErrorCode::corrupt: return DP_ERR_CORRUPT;
    case dipole::ErrorCode::not_found: return DP_ERR_NOT_FOUND;
    case dipole::ErrorCode::internal: return DP_ERR_INTERNAL;
  }
  return DP_ERR_INTERNAL;
}

template <class Fn>
dp_status guard(Fn&& fn) {
  try {
    last_error.clear();
    return fn();
  } catch (const dipole::Error& e) {
    last_error = e.what();
    return code_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return DP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DP_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return DP_ERR_INTERNAL;
  }
}

dp_status null_arg(const char* what) {
  last_error = std::string(what) + " must not be null";
  return DP_ERR_INVALID_ARGUMENT;
}

dp_status copy_out(const std::string& s, char* buf, std::size_t cap, std::size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || cap < s.size() + 1) {
    last_error = "buffer too small";
    return DP_ERR_BUFFER_TOO_SMALL;
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return DP_OK;
}

}  // namespace

extern "C" {

const char* dp_version(void) { return "1.0.0"; }

const char* dp_status_name(dp_status s) {
  switch (s) {
    case DP_OK: return "ok";
    case DP_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DP_ERR_NUMERICAL: return "numerical failure";
    case DP_ERR_IO: return "i/o error";
    case DP_ERR_CORRUPT: return "corrupt data";
    case DP_ERR_NOT_FOUND: return "not found";
    case DP_ERR_INTERNAL: return "internal error";
    case DP_ERR_BUFFER_TOO_SMALL: return "buffer too small";
  }
  return "unknown status";
}

const char* dp_last_error(void) { return last_error.c_str(); }

dp_status dp_config_create(dp_config** out) {
  if (!out) return null_arg("out");
  return guard([&] {
    *out = new dp_config{};
    return DP_OK;
  });
}

void dp_config_destroy(dp_config* cfg) { delete cfg; }

dp_status dp_config_load(dp_config* cfg, const char* path) {
  if (!cfg || !path) return null_arg("config and path");
  return guard([&] {
    cfg->cfg = dipole::load_config(path);
    return DP_OK;
  });
}

dp_status dp_config_parse(dp_config* cfg, const char* text) {
  if (!cfg || !text) return null_arg("config and text");
  return guard([&] {
    cfg->cfg = dipole::parse_config(text);
    return DP_OK;
  });
}

dp_status dp_config_set(dp_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return null_arg("config, key and value");
  return guard([&] {
    dipole::set_key(cfg->cfg, key, value);
    return DP_OK;
  });
}

dp_status dp_config_validate(const dp_config* cfg) {
  if (!cfg) return null_arg("config");
  return guard([&] {
    dipole::validate(cfg->cfg);
    return DP_OK;
  });
}

dp_status dp_config_text(const dp_config* cfg, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return null_arg("config");
  return guard([&] { return copy_out(dipole::to_text(cfg->cfg), buf, cap, needed); });
}

size_t dp_subcommand_count(void) { return dipole::subcommands().size(); }

const char* dp_subcommand_name(size_t index) {
  const auto& s = dipole::subcommands();
  return index < s.size() ? s[index].c_str() : nullptr;
}

dp_status dp_run(const dp_config* cfg, const char* subcommand, int verbose, dp_report** out) {
  if (!cfg || !subcommand || !out) return null_arg("config, subcommand and out");
  return guard([&] {
    dipole::Report r = dipole::run_subcommand(subcommand, cfg->cfg, verbose ? &std::cerr : nullptr);
    *out = new dp_report{std::move(r)};
    return DP_OK;
  });
}

void dp_report_destroy(dp_report* report) { delete report; }

size_t dp_report_size(const dp_report* report) { return report ? report->report.checks().size() : 0; }

size_t dp_report_count(const dp_report* report, dp_verdict verdict) {
  if (!report) return 0;
  const dipole::Verdict v = verdict == DP_PASS ? dipole::Verdict::pass
                            : verdict == DP_WARN ? dipole::Verdict::warn
                                                 : dipole::Verdict::fail;
  return report->report.count(v);
}

int dp_report_passed(const dp_report* report) { return report && report->report.passed() ? 1 : 0; }

dp_status dp_report_check(const dp_report* report, size_t index, const char** name, dp_verdict* verdict, double* margin) {
  if (!report) return null_arg("report");
  const auto& checks = report->report.checks();
  if (index >= checks.size()) {
    last_error = "check index out of range";
    return DP_ERR_INVALID_ARGUMENT;
  }
  const auto& c = checks[index];
  if (name) *name = c.name.c_str();
  if (verdict)
    *verdict = c.verdict == dipole::Verdict::pass ? DP_PASS : c.verdict == dipole::Verdict::warn ? DP_WARN : DP_FAIL;
  if (margin) *margin = c.margin;
  return DP_OK;
}

dp_status dp_report_json(const dp_report* report, int timings, char* buf, size_t cap, size_t* needed) {
  if (!report) return null_arg("report");
  return guard([&] { return copy_out(report->report.to_json(timings != 0), buf, cap, needed); });
}

dp_status dp_report_table(const dp_report* report, char* buf, size_t cap, size_t* needed) {
  if (!report) return null_arg("report");
  return guard([&] { return copy_out(report->report.table(), buf, cap, needed); });
}

dp_status dp_kernel_build(int dim, int half_side, double epsilon, double tol, dp_kernel** out) {
  if (!out) return null_arg("out");
  return guard([&] {
    const dipole::LatticeSpec spec = epsilon > 0 ? dipole::LatticeSpec::with_epsilon(dim, half_side, epsilon)
                                                 : dipole::LatticeSpec::with_auto_epsilon(dim, half_side);
    dipole::KernelBuildOptions o;
    if (tol > 0) o.tol = tol;
    *out = new dp_kernel{dipole::build_kernel(spec, o), std::nullopt};
    return DP_OK;
  });
}

dp_status dp_kernel_load(const char* path, dp_kernel** out) {
  if (!path || !out) return null_arg("path and out");
  return guard([&] {
    *out = new dp_kernel{dipole::load_kernel(path), std::nullopt};
    return DP_OK;
  });
}

dp_status dp_kernel_save(const dp_kernel* kernel, const char* path) {
  if (!kernel || !path) return null_arg("kernel and path");
  return guard([&] {
    dipole::save_kernel(kernel->table, path);
    return DP_OK;
  });
}

void dp_kernel_destroy(dp_kernel* kernel) { delete kernel; }

dp_status dp_kernel_info(const dp_kernel* kernel, int* dim, int* half_side, double* epsilon, int* cutoff,
                         double* tail_bound) {
  if (!kernel) return null_arg("kernel");
  const auto& s = kernel->table.spec();
  if (dim) *dim = s.dim();
  if (half_side) *half_side = s.half_side();
  if (epsilon) *epsilon = s.epsilon();
  if (cutoff) *cutoff = kernel->table.image_cutoff();
  if (tail_bound) *tail_bound = kernel->table.truncation_error_bound();
  return DP_OK;
}

dp_status dp_kernel_entry(const dp_kernel* kernel, const int* site, double* out) {
  if (!kernel || !site || !out) return null_arg("kernel, site and out");
  return guard([&] {
    const auto& t = kernel->table;
    const int d = t.dim();
    const dipole::Site x(t.spec(), std::span<const int>(site, static_cast<std::size_t>(d)));
    const std::size_t idx = x.index(t.spec());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out[i * d + j] = t.entry(idx, i, j);
    return DP_OK;
  });
}

dp_status dp_kernel_e0(const dp_kernel* kernel, double* e0) {
  if (!kernel || !e0) return null_arg("kernel and e0");
  return guard([&] {
    auto* k = const_cast<dp_kernel*>(kernel);
    if (!k->e0) k->e0 = dipole::fourier_kernel(k->table).e0();
    *e0 = *k->e0;
    return DP_OK;
  });
}

}  // extern "C"
