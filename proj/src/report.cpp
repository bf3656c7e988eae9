#include "chemo/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include "json.hpp"

namespace chemo {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string shorten(const std::string& s, std::size_t width) {
  if (s.size() <= width) return s;
  return s.substr(0, width - 3) + "...";
}

}  // namespace

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::kPass: return "PASS";
    case CheckStatus::kFail: return "FAIL";
    case CheckStatus::kSkipped: return "SKIP";
  }
  return "?";
}

bool VerificationReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const Check& c) { return c.status == CheckStatus::kFail; });
}

Check& VerificationReport::add_numeric(const std::string& name, double expected, double observed,
                                       double tolerance, bool relative, const std::string& note) {
  Check c;
  c.name = name;
  c.expected = num(expected);
  c.observed = num(observed);
  c.expected_value = expected;
  c.observed_value = observed;
  c.tolerance = tolerance;
  c.relative = relative;
  const double bound = relative ? tolerance * std::abs(expected) : tolerance;
  c.status = std::abs(observed - expected) <= bound ? CheckStatus::kPass : CheckStatus::kFail;
  c.note = note;
  checks.push_back(std::move(c));
  return checks.back();
}

Check& VerificationReport::add_count(const std::string& name, long expected, long observed,
                                     const std::string& note) {
  Check c;
  c.name = name;
  c.expected = std::to_string(expected);
  c.observed = std::to_string(observed);
  c.expected_value = static_cast<double>(expected);
  c.observed_value = static_cast<double>(observed);
  c.status = expected == observed ? CheckStatus::kPass : CheckStatus::kFail;
  c.note = note;
  checks.push_back(std::move(c));
  return checks.back();
}

Check& VerificationReport::add_bool(const std::string& name, const std::string& expected,
                                    const std::string& observed, bool pass,
                                    const std::string& note) {
  Check c;
  c.name = name;
  c.expected = expected;
  c.observed = observed;
  c.status = pass ? CheckStatus::kPass : CheckStatus::kFail;
  c.note = note;
  checks.push_back(std::move(c));
  return checks.back();
}

Check& VerificationReport::add_skipped(const std::string& name, const std::string& note) {
  Check c;
  c.name = name;
  c.status = CheckStatus::kSkipped;
  c.note = note;
  checks.push_back(std::move(c));
  return checks.back();
}

Check& VerificationReport::add_failure(const std::string& name, const std::string& error) {
  Check c;
  c.name = name;
  c.expected = "stage completes";
  c.observed = "error";
  c.status = CheckStatus::kFail;
  c.note = error;
  checks.push_back(std::move(c));
  return checks.back();
}

std::string VerificationReport::to_text() const {
  std::string out = title + "\n";
  std::size_t wn = 5;
  std::size_t we = 8;
  std::size_t wo = 8;
  for (const Check& c : checks) {
    wn = std::max(wn, std::min<std::size_t>(c.name.size(), 72));
    we = std::max(we, std::min<std::size_t>(c.expected.size(), 40));
    wo = std::max(wo, std::min<std::size_t>(c.observed.size(), 40));
  }
  out += fmt::format("{:<6} {:<{}} {:>{}} {:>{}} {:>10}  {}\n", "status", "check", wn, "expected",
                     we, "observed", wo, "tolerance", "note");
  for (const Check& c : checks) {
    const std::string tol =
        c.tolerance > 0.0 ? fmt::format("{:.3g}{}", c.tolerance, c.relative ? " rel" : "") : "-";
    out += fmt::format("{:<6} {:<{}} {:>{}} {:>{}} {:>10}  {}\n", to_string(c.status),
                       shorten(c.name, wn), wn, shorten(c.expected, we), we,
                       shorten(c.observed, wo), wo, tol, c.note);
  }
  for (const std::string& n : notes) out += "note: " + n + "\n";
  out += fmt::format("overall: {}\n", passed() ? "PASS" : "FAIL");
  return out;
}

std::string VerificationReport::to_json() const {
  nlohmann::ordered_json j;
  j["title"] = title;
  j["overall"] = passed() ? "pass" : "fail";
  j["checks"] = nlohmann::ordered_json::array();
  for (const Check& c : checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["status"] = to_string(c.status);
    e["expected"] = c.expected;
    e["observed"] = c.observed;
    if (c.expected_value) e["expected_value"] = *c.expected_value;
    if (c.observed_value) e["observed_value"] = *c.observed_value;
    e["tolerance"] = c.tolerance;
    e["relative"] = c.relative;
    e["note"] = c.note;
    j["checks"].push_back(std::move(e));
  }
  j["notes"] = notes;
  return j.dump(2) + "\n";
}

}  // namespace chemo
