#pragma once

// Verification reports: named checks with expected and observed values,
// rendered as a text table and as JSON.

#include <optional>
#include <string>
#include <vector>

namespace chemo {

enum class CheckStatus { kPass, kFail, kSkipped };
std::string to_string(CheckStatus s);

struct Check {
  std::string name;
  std::string expected;  // display form
  std::string observed;
  std::optional<double> expected_value;  // numeric form when the check is numeric
  std::optional<double> observed_value;
  double tolerance = 0.0;  // 0 for counts and categorical checks
  bool relative = false;   // tolerance is relative to |expected|
  CheckStatus status = CheckStatus::kFail;
  std::string note;
};

struct VerificationReport {
  std::string title;
  std::vector<Check> checks;
  std::vector<std::string> notes;  // provenance: conventions, parameter choices

  /// Skipped checks neither pass nor fail the report.
  bool passed() const;

  /// Numeric check: |observed - expected| <= tolerance (times |expected| when relative).
  Check& add_numeric(const std::string& name, double expected, double observed, double tolerance,
                     bool relative = false, const std::string& note = "");
  /// Exact comparison of integer-valued counts.
  Check& add_count(const std::string& name, long expected, long observed,
                   const std::string& note = "");
  /// Categorical or structural check with a precomputed verdict.
  Check& add_bool(const std::string& name, const std::string& expected,
                  const std::string& observed, bool pass, const std::string& note = "");
  Check& add_skipped(const std::string& name, const std::string& note);
  /// A stage that threw; recorded as a failed check.
  Check& add_failure(const std::string& name, const std::string& error);

  std::string to_text() const;
  std::string to_json() const;
};

}  // namespace chemo
