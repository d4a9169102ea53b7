#pragma once

// Machine-readable verification verdicts.

#include <chrono>
#include <string>
#include <vector>

namespace dipole {

enum class Verdict { pass, warn, fail };

const char* verdict_name(Verdict v) noexcept;

struct Check {
  std::string name;
  // Short tag naming the property the check exercises.
  std::string anchor;
  Verdict verdict = Verdict::pass;
  // Signed distance from the failure threshold; negative means violated.
  double margin = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
  std::string detail;
};

class Report {
 public:
  static constexpr int kSchemaVersion = 1;

  explicit Report(std::string title = {}) : title_(std::move(title)) {}

  const std::string& title() const noexcept { return title_; }
  const std::vector<Check>& checks() const noexcept { return checks_; }
  // Each check name may appear only once.
  void add(Check check);
  void merge(const Report& other);
  bool passed() const noexcept;
  std::size_t count(Verdict v) const noexcept;

  // Without timings the document depends only on the computed results.
  std::string to_json(bool timings = true) const;
  static Report from_json(const std::string& text);
  // Fixed-width human-readable table.
  std::string table() const;

 private:
  std::string title_;
  std::vector<Check> checks_;
};

Check make_check(std::string name, std::string anchor, bool ok, double margin, double tolerance,
                 std::string detail = {});

// Verdict for a statistical upper bound: value <= bound + 2 sigma passes,
// up to 3 sigma warns, beyond fails.
Check statistical_check(std::string name, std::string anchor, double value, double bound, double sigma,
                        std::string detail = {});

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace dipole
