#include "dipole/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <sstream>

#include "dipole/error.hpp"

namespace dipole {

const char* verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::warn:
      return "warn";
    case Verdict::fail:
      return "fail";
  }
  return "fail";
}

namespace {

Verdict verdict_from(const std::string& s) {
  if (s == "pass") return Verdict::pass;
  if (s == "warn") return Verdict::warn;
  if (s == "fail") return Verdict::fail;
  fail(ErrorCode::corrupt, "unknown verdict '" + s + "'");
}

// JSON has no infinities; encode them as strings.
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  return std::nan("");
}

}  // namespace

void Report::add(Check check) {
  for (const auto& c : checks_)
    if (c.name == check.name) fail(ErrorCode::internal, "duplicate check name '" + check.name + "'");
  checks_.push_back(std::move(check));
}

void Report::merge(const Report& other) {
  for (const auto& c : other.checks_) add(c);
}

bool Report::passed() const noexcept { return count(Verdict::fail) == 0; }

std::size_t Report::count(Verdict v) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(checks_.begin(), checks_.end(), [v](const Check& c) { return c.verdict == v; }));
}

std::string Report::to_json(bool timings) const {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["title"] = title_;
  j["passed"] = passed();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : checks_) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["anchor"] = c.anchor;
    e["verdict"] = verdict_name(c.verdict);
    e["margin"] = number(c.margin);
    e["tolerance"] = number(c.tolerance);
    if (timings) e["seconds"] = c.seconds;
    e["detail"] = c.detail;
    arr.push_back(std::move(e));
  }
  j["checks"] = std::move(arr);
  return j.dump(2) + "\n";
}

Report Report::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::corrupt, std::string("report is not valid JSON: ") + e.what());
  }
  if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion)
    fail(ErrorCode::corrupt, "unsupported report schema version");
  Report r(j.value("title", ""));
  try {
    for (const auto& e : j.at("checks")) {
      Check c;
      c.name = e.at("name").get<std::string>();
      c.anchor = e.at("anchor").get<std::string>();
      c.verdict = verdict_from(e.at("verdict").get<std::string>());
      c.margin = number_from(e.at("margin"));
      c.tolerance = number_from(e.at("tolerance"));
      c.seconds = e.value("seconds", 0.0);
      c.detail = e.value("detail", "");
      r.add(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::corrupt, std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string Report::table() const {
  std::ostringstream os;
  std::size_t width = 5;
  for (const auto& c : checks_) width = std::max(width, c.name.size());
  char line[512];
  std::snprintf(line, sizeof line, "%-*s  %-7s  %12s  %10s  %8s\n", static_cast<int>(width), "check", "verdict",
                "margin", "tolerance", "seconds");
  os << line;
  for (const auto& c : checks_) {
    std::snprintf(line, sizeof line, "%-*s  %-7s  %12.4e  %10.2e  %8.3f\n", static_cast<int>(width), c.name.c_str(),
                  verdict_name(c.verdict), c.margin, c.tolerance, c.seconds);
    os << line;
  }
  os << checks_.size() << " checks: " << count(Verdict::pass) << " pass, " << count(Verdict::warn) << " warn, "
     << count(Verdict::fail) << " fail\n";
  return os.str();
}

Check make_check(std::string name, std::string anchor, bool ok, double margin, double tolerance, std::string detail) {
  Check c;
  c.name = std::move(name);
  c.anchor = std::move(anchor);
  c.verdict = ok ? Verdict::pass : Verdict::fail;
  c.margin = margin;
  c.tolerance = tolerance;
  c.detail = std::move(detail);
  return c;
}

Check statistical_check(std::string name, std::string anchor, double value, double bound, double sigma,
                        std::string detail) {
  Check c;
  c.name = std::move(name);
  c.anchor = std::move(anchor);
  c.tolerance = 3.0 * sigma;
  c.margin = bound + 3.0 * sigma - value;
  if (value <= bound + 2.0 * sigma)
    c.verdict = Verdict::pass;
  else if (value <= bound + 3.0 * sigma)
    c.verdict = Verdict::warn;
  else
    c.verdict = Verdict::fail;
  c.detail = std::move(detail);
  return c;
}

}  // namespace dipole
