#include "chemo/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "chemo/errors.hpp"

namespace chemo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& s, int line, const std::string& key) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(line, fmt::format("{}: expected a finite number, got '{}'", key, s));
  }
  return v;
}

long long to_integer(const std::string& s, int line, const std::string& key) {
  long long v = 0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(line, fmt::format("{}: expected an integer, got '{}'", key, s));
  }
  return v;
}

std::uint64_t to_u64(const std::string& s, int line, const std::string& key) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(line, fmt::format("{}: expected an unsigned integer, got '{}'", key, s));
  }
  return v;
}

bool to_bool(const std::string& s, int line, const std::string& key) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError(line, fmt::format("{}: expected true or false, got '{}'", key, s));
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string num_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += num(v[i]);
  }
  return out;
}

std::vector<double> to_double_list(const std::string& s, int line, const std::string& key) {
  std::vector<double> out;
  for (const std::string& item : split_list(s, ',')) out.push_back(to_double(item, line, key));
  return out;
}

void require(bool ok, int line, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(line, fmt::format("{} {}", key, what));
}

int positive_int(const std::string& s, int line, const std::string& key) {
  const long long v = to_integer(s, line, key);
  require(v > 0 && v < (1LL << 31), line, key, "must be a positive integer");
  return static_cast<int>(v);
}

int nonnegative_int(const std::string& s, int line, const std::string& key) {
  const long long v = to_integer(s, line, key);
  require(v >= 0 && v < (1LL << 31), line, key, "must be a non-negative integer");
  return static_cast<int>(v);
}

double positive(const std::string& s, int line, const std::string& key) {
  const double v = to_double(s, line, key);
  require(v > 0.0, line, key, "must be positive");
  return v;
}

double nonnegative(const std::string& s, int line, const std::string& key) {
  const double v = to_double(s, line, key);
  require(v >= 0.0, line, key, "must be non-negative");
  return v;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&, int)> set;
  // Empty optional: key is omitted from the serialized form.
  std::function<std::optional<std::string>(const ExperimentConfig&)> get;
};

const std::vector<Field>& schema() {
  using C = ExperimentConfig;
  using S = std::string;
  static const std::vector<Field> fields = {
      {"experiment", "kind",
       [](C& c, const S& v, int line) {
         try {
           c.kind = parse_kind(v);
         } catch (const ConfigError& e) {
           throw ConfigError(line, e.what());
         }
       },
       [](const C& c) { return std::optional<S>(to_string(c.kind)); }},
      {"experiment", "seed",
       [](C& c, const S& v, int line) { c.seed = to_u64(v, line, "seed"); },
       [](const C& c) {
         return c.seed ? std::optional<S>(std::to_string(*c.seed)) : std::nullopt;
       }},
      {"experiment", "output_dir",
       [](C& c, const S& v, int line) {
         require(!v.empty(), line, "output_dir", "must not be empty");
         c.output_dir = v;
       },
       [](const C& c) { return std::optional<S>(c.output_dir); }},
      {"experiment", "coefficient_convention",
       [](C& c, const S& v, int line) {
         if (v == "formula") {
           c.convention = CoefficientConvention::kFormula;
         } else if (v == "paper") {
           c.convention = CoefficientConvention::kPaper;
         } else {
           throw ConfigError(line, "coefficient_convention must be formula or paper");
         }
       },
       [](const C& c) { return std::optional<S>(to_string(c.convention)); }},
      {"experiment", "quadratic_placement",
       [](C& c, const S& v, int line) {
         if (v == "projected") {
           c.placement = QuadraticPlacement::kProjected;
         } else if (v == "as-printed") {
           c.placement = QuadraticPlacement::kAsPrinted;
         } else {
           throw ConfigError(line, "quadratic_placement must be projected or as-printed");
         }
       },
       [](const C& c) {
         return std::optional<S>(c.placement == QuadraticPlacement::kProjected ? "projected"
                                                                               : "as-printed");
       }},

      {"model", "mu", [](C& c, const S& v, int line) { c.model.mu = positive(v, line, "mu"); },
       [](const C& c) { return std::optional<S>(num(c.model.mu)); }},
      {"model", "alpha",
       [](C& c, const S& v, int line) { c.model.alpha = positive(v, line, "alpha"); },
       [](const C& c) { return std::optional<S>(num(c.model.alpha)); }},
      {"model", "lambda",
       [](C& c, const S& v, int line) { c.model.lambda = positive(v, line, "lambda"); },
       [](const C& c) {
         return c.model.lambda ? std::optional<S>(num(*c.model.lambda)) : std::nullopt;
       }},
      {"model", "lambda_factor",
       [](C& c, const S& v, int line) {
         c.model.lambda_factor = positive(v, line, "lambda_factor");
       },
       [](const C& c) { return std::optional<S>(num(c.model.lambda_factor)); }},

      {"geometry", "critical",
       [](C& c, const S& v, int line) { c.geometry.critical = to_bool(v, line, "critical"); },
       [](const C& c) { return std::optional<S>(c.geometry.critical ? "true" : "false"); }},
      {"geometry", "m", [](C& c, const S& v, int line) { c.geometry.m = positive_int(v, line, "m"); },
       [](const C& c) { return std::optional<S>(std::to_string(c.geometry.m)); }},
      {"geometry", "n", [](C& c, const S& v, int line) { c.geometry.n = positive_int(v, line, "n"); },
       [](const C& c) { return std::optional<S>(std::to_string(c.geometry.n)); }},
      {"geometry", "ell1",
       [](C& c, const S& v, int line) { c.geometry.ell1 = positive(v, line, "ell1"); },
       [](const C& c) { return std::optional<S>(num(c.geometry.ell1)); }},
      {"geometry", "ell2",
       [](C& c, const S& v, int line) { c.geometry.ell2 = positive(v, line, "ell2"); },
       [](const C& c) { return std::optional<S>(num(c.geometry.ell2)); }},

      {"simulation", "n1",
       [](C& c, const S& v, int line) { c.simulation.n1 = positive_int(v, line, "n1"); },
       [](const C& c) { return std::optional<S>(std::to_string(c.simulation.n1)); }},
      {"simulation", "n2",
       [](C& c, const S& v, int line) { c.simulation.n2 = positive_int(v, line, "n2"); },
       [](const C& c) { return std::optional<S>(std::to_string(c.simulation.n2)); }},
      {"simulation", "dt",
       [](C& c, const S& v, int line) { c.simulation.dt = positive(v, line, "dt"); },
       [](const C& c) { return std::optional<S>(num(c.simulation.dt)); }},
      {"simulation", "t_end",
       [](C& c, const S& v, int line) { c.simulation.t_end = positive(v, line, "t_end"); },
       [](const C& c) { return std::optional<S>(num(c.simulation.t_end)); }},
      {"simulation", "dealias",
       [](C& c, const S& v, int line) {
         c.simulation.dealias_factor = positive_int(v, line, "dealias");
         require(c.simulation.dealias_factor >= 2, line, "dealias", "must be at least 2");
       },
       [](const C& c) { return std::optional<S>(std::to_string(c.simulation.dealias_factor)); }},
      {"simulation", "initial",
       [](C& c, const S& v, int line) {
         if (v == "random") {
           c.simulation.initial_condition.kind = InitialCondition::Kind::kRandom;
         } else if (v == "modes") {
           c.simulation.initial_condition.kind = InitialCondition::Kind::kModes;
         } else {
           throw ConfigError(line, "initial must be random or modes");
         }
       },
       [](const C& c) {
         return std::optional<S>(c.simulation.initial_condition.kind ==
                                         InitialCondition::Kind::kRandom
                                     ? "random"
                                     : "modes");
       }},
      {"simulation", "amplitude",
       [](C& c, const S& v, int line) {
         c.simulation.initial_condition.amplitude = positive(v, line, "amplitude");
       },
       [](const C& c) { return std::optional<S>(num(c.simulation.initial_condition.amplitude)); }},
      {"simulation", "max_mode",
       [](C& c, const S& v, int line) {
         c.simulation.initial_condition.max_mode = nonnegative_int(v, line, "max_mode");
       },
       [](const C& c) {
         return std::optional<S>(std::to_string(c.simulation.initial_condition.max_mode));
       }},
      {"simulation", "modes",
       [](C& c, const S& v, int line) {
         auto& modes = c.simulation.initial_condition.modes;
         modes.clear();
         for (const std::string& item : split_list(v, ',')) {
           const auto parts = split_list(item, ':');
           require(parts.size() == 3, line, "modes", "entries must read k1:k2:amplitude");
           modes.push_back({{nonnegative_int(parts[0], line, "modes"),
                             nonnegative_int(parts[1], line, "modes")},
                            to_double(parts[2], line, "modes")});
         }
       },
       [](const C& c) {
         std::string out;
         for (const auto& [k, a] : c.simulation.initial_condition.modes) {
           if (!out.empty()) out += ", ";
           out += fmt::format("{}:{}:{}", k.k1, k.k2, num(a));
         }
         return std::optional<S>(out);
       }},
      {"simulation", "record_modes",
       [](C& c, const S& v, int line) {
         auto& modes = c.simulation.record_modes;
         modes.clear();
         for (const std::string& item : split_list(v, ',')) {
           const auto parts = split_list(item, ':');
           require(parts.size() == 2, line, "record_modes", "entries must read k1:k2");
           modes.push_back({nonnegative_int(parts[0], line, "record_modes"),
                            nonnegative_int(parts[1], line, "record_modes")});
         }
       },
       [](const C& c) {
         std::string out;
         for (const ModeIndex& k : c.simulation.record_modes) {
           if (!out.empty()) out += ", ";
           out += fmt::format("{}:{}", k.k1, k.k2);
         }
         return std::optional<S>(out);
       }},
      {"simulation", "output_interval",
       [](C& c, const S& v, int line) {
         c.simulation.output_interval = positive(v, line, "output_interval");
       },
       [](const C& c) { return std::optional<S>(num(c.simulation.output_interval)); }},
      {"simulation", "snapshot_times",
       [](C& c, const S& v, int line) {
         c.simulation.snapshot_times = to_double_list(v, line, "snapshot_times");
         for (double t : c.simulation.snapshot_times) {
           require(t >= 0.0, line, "snapshot_times", "must be non-negative");
         }
       },
       [](const C& c) { return std::optional<S>(num_list(c.simulation.snapshot_times)); }},
      {"simulation", "nonlinear",
       [](C& c, const S& v, int line) { c.simulation.nonlinear = to_bool(v, line, "nonlinear"); },
       [](const C& c) { return std::optional<S>(c.simulation.nonlinear ? "true" : "false"); }},
      {"simulation", "form",
       [](C& c, const S& v, int line) {
         if (v == "helmholtz") {
           c.simulation.form = NonlinearForm::kHelmholtzIdentity;
         } else if (v == "literal") {
           c.simulation.form = NonlinearForm::kLiteral;
         } else {
           throw ConfigError(line, "form must be helmholtz or literal");
         }
       },
       [](const C& c) {
         return std::optional<S>(c.simulation.form == NonlinearForm::kLiteral ? "literal"
                                                                             : "helmholtz");
       }},
      {"simulation", "chemoattractant",
       [](C& c, const S& v, int line) {
         if (v == "quasi-stationary") {
           c.chemoattractant = InitialChemoattractant::kQuasiStationary;
         } else if (v == "zero") {
           c.chemoattractant = InitialChemoattractant::kZero;
         } else {
           throw ConfigError(line, "chemoattractant must be quasi-stationary or zero");
         }
       },
       [](const C& c) {
         return std::optional<S>(c.chemoattractant == InitialChemoattractant::kZero
                                     ? "zero"
                                     : "quasi-stationary");
       }},
      {"simulation", "stop_at_steady_state",
       [](C& c, const S& v, int line) {
         c.simulation.stop_at_steady_state = to_bool(v, line, "stop_at_steady_state");
       },
       [](const C& c) {
         return std::optional<S>(c.simulation.stop_at_steady_state ? "true" : "false");
       }},
      {"simulation", "steady_tolerance",
       [](C& c, const S& v, int line) {
         c.simulation.steady_tolerance = positive(v, line, "steady_tolerance");
       },
       [](const C& c) { return std::optional<S>(num(c.simulation.steady_tolerance)); }},
      {"simulation", "steady_window",
       [](C& c, const S& v, int line) {
         c.simulation.steady_window = positive(v, line, "steady_window");
       },
       [](const C& c) { return std::optional<S>(num(c.simulation.steady_window)); }},
      {"simulation", "noise_floor",
       [](C& c, const S& v, int line) {
         c.simulation.noise_floor = nonnegative(v, line, "noise_floor");
       },
       [](const C& c) { return std::optional<S>(num(c.simulation.noise_floor)); }},

      {"ode", "y1", [](C& c, const S& v, int line) { c.ode.y1 = to_double(v, line, "y1"); },
       [](const C& c) { return std::optional<S>(num(c.ode.y1)); }},
      {"ode", "y2", [](C& c, const S& v, int line) { c.ode.y2 = to_double(v, line, "y2"); },
       [](const C& c) { return std::optional<S>(num(c.ode.y2)); }},
      {"ode", "dt", [](C& c, const S& v, int line) { c.ode.dt = positive(v, line, "dt"); },
       [](const C& c) { return std::optional<S>(num(c.ode.dt)); }},
      {"ode", "t_end", [](C& c, const S& v, int line) { c.ode.t_end = nonnegative(v, line, "t_end"); },
       [](const C& c) { return std::optional<S>(num(c.ode.t_end)); }},
      {"ode", "basin_rays",
       [](C& c, const S& v, int line) { c.ode.basin_rays = positive_int(v, line, "basin_rays"); },
       [](const C& c) { return std::optional<S>(std::to_string(c.ode.basin_rays)); }},
      {"ode", "basin_radius",
       [](C& c, const S& v, int line) { c.ode.basin_radius = positive(v, line, "basin_radius"); },
       [](const C& c) { return std::optional<S>(num(c.ode.basin_radius)); }},

      {"theorem1", "sim_seeds",
       [](C& c, const S& v, int line) {
         c.theorem1.sim_seeds = nonnegative_int(v, line, "sim_seeds");
       },
       [](const C& c) { return std::optional<S>(std::to_string(c.theorem1.sim_seeds)); }},
      {"theorem1", "sim_n",
       [](C& c, const S& v, int line) { c.theorem1.sim_n = positive_int(v, line, "sim_n"); },
       [](const C& c) { return std::optional<S>(std::to_string(c.theorem1.sim_n)); }},
      {"theorem1", "sim_t_end",
       [](C& c, const S& v, int line) { c.theorem1.sim_t_end = positive(v, line, "sim_t_end"); },
       [](const C& c) { return std::optional<S>(num(c.theorem1.sim_t_end)); }},
      {"theorem1", "subcritical_factor",
       [](C& c, const S& v, int line) {
         c.theorem1.subcritical_factor = positive(v, line, "subcritical_factor");
         require(c.theorem1.subcritical_factor < 1.0, line, "subcritical_factor",
                 "must be below 1");
       },
       [](const C& c) { return std::optional<S>(num(c.theorem1.subcritical_factor)); }},
      {"theorem1", "full_system",
       [](C& c, const S& v, int line) {
         c.theorem1.full_system = to_bool(v, line, "full_system");
       },
       [](const C& c) { return std::optional<S>(c.theorem1.full_system ? "true" : "false"); }},
      {"theorem1", "saturation_sigmas",
       [](C& c, const S& v, int line) {
         c.theorem1.saturation_sigmas = to_double_list(v, line, "saturation_sigmas");
         for (double s : c.theorem1.saturation_sigmas) {
           require(s > 0.0, line, "saturation_sigmas", "must be positive");
         }
       },
       [](const C& c) { return std::optional<S>(num_list(c.theorem1.saturation_sigmas)); }},
      {"theorem1", "analytic_tolerance",
       [](C& c, const S& v, int line) {
         c.theorem1.analytic_tolerance = positive(v, line, "analytic_tolerance");
       },
       [](const C& c) { return std::optional<S>(num(c.theorem1.analytic_tolerance)); }},
      {"theorem1", "reduction_tolerance",
       [](C& c, const S& v, int line) {
         c.theorem1.reduction_tolerance = positive(v, line, "reduction_tolerance");
       },
       [](const C& c) { return std::optional<S>(num(c.theorem1.reduction_tolerance)); }},

      {"theorem2", "ell2_perturbation",
       [](C& c, const S& v, int line) {
         c.theorem2.ell2_perturbation = to_double(v, line, "ell2_perturbation");
         require(c.theorem2.ell2_perturbation > -1.0, line, "ell2_perturbation",
                 "must exceed -1");
       },
       [](const C& c) { return std::optional<S>(num(c.theorem2.ell2_perturbation)); }},
      {"theorem2", "lambda_perturbation",
       [](C& c, const S& v, int line) {
         c.theorem2.lambda_perturbation = to_double(v, line, "lambda_perturbation");
         require(c.theorem2.lambda_perturbation > -1.0, line, "lambda_perturbation",
                 "must exceed -1");
       },
       [](const C& c) { return std::optional<S>(num(c.theorem2.lambda_perturbation)); }},
      {"theorem2", "override_b1",
       [](C& c, const S& v, int line) { c.theorem2.override_b1 = to_double(v, line, "override_b1"); },
       [](const C& c) {
         return c.theorem2.override_b1 ? std::optional<S>(num(*c.theorem2.override_b1))
                                       : std::nullopt;
       }},
      {"theorem2", "override_b2",
       [](C& c, const S& v, int line) { c.theorem2.override_b2 = to_double(v, line, "override_b2"); },
       [](const C& c) {
         return c.theorem2.override_b2 ? std::optional<S>(num(*c.theorem2.override_b2))
                                       : std::nullopt;
       }},

      {"sweep", "lambda_factors",
       [](C& c, const S& v, int line) {
         c.sweep.lambda_factors = to_double_list(v, line, "lambda_factors");
         for (double f : c.sweep.lambda_factors) require(f > 0.0, line, "lambda_factors", "must be positive");
       },
       [](const C& c) { return std::optional<S>(num_list(c.sweep.lambda_factors)); }},
      {"sweep", "geometry_scales",
       [](C& c, const S& v, int line) {
         c.sweep.geometry_scales = to_double_list(v, line, "geometry_scales");
         for (double f : c.sweep.geometry_scales) require(f > 0.0, line, "geometry_scales", "must be positive");
       },
       [](const C& c) { return std::optional<S>(num_list(c.sweep.geometry_scales)); }},
      {"sweep", "simulate",
       [](C& c, const S& v, int line) { c.sweep.simulate = to_bool(v, line, "simulate"); },
       [](const C& c) { return std::optional<S>(c.sweep.simulate ? "true" : "false"); }},
      {"sweep", "sim_n",
       [](C& c, const S& v, int line) { c.sweep.sim_n = positive_int(v, line, "sim_n"); },
       [](const C& c) { return std::optional<S>(std::to_string(c.sweep.sim_n)); }},
      {"sweep", "sim_t_end",
       [](C& c, const S& v, int line) { c.sweep.sim_t_end = positive(v, line, "sim_t_end"); },
       [](const C& c) { return std::optional<S>(num(c.sweep.sim_t_end)); }},
  };
  return fields;
}

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

void validate(const ExperimentConfig& c, const std::map<std::string, int>& lines) {
  const auto line_of = [&](const std::string& id) {
    const auto it = lines.find(id);
    return it == lines.end() ? 0 : it->second;
  };
  if (!lines.contains("experiment.kind")) throw ConfigError(0, "missing required key kind");
  if (c.randomized() && !c.seed) {
    throw ConfigError(0, fmt::format("missing required key seed (experiment {} is randomized)",
                                     to_string(c.kind)));
  }
  if (!c.geometry.critical) {
    if (!lines.contains("geometry.ell1")) throw ConfigError(0, "missing required key ell1");
    if (!lines.contains("geometry.ell2")) throw ConfigError(0, "missing required key ell2");
  }
  const bool simulates = c.kind == ExperimentKind::kSimulate ||
                         c.kind == ExperimentKind::kSimulateFull;
  if (simulates) {
    for (const char* key : {"n1", "n2"}) {
      const std::size_t v = std::string(key) == "n1" ? c.simulation.n1 : c.simulation.n2;
      if (!is_power_of_two(v) || v < 32) {
        throw ConfigError(line_of(std::string("simulation.") + key),
                          fmt::format("{} must be a power of two >= 32", key));
      }
    }
    if (c.simulation.initial_condition.kind == InitialCondition::Kind::kModes &&
        c.simulation.initial_condition.modes.empty()) {
      throw ConfigError(line_of("simulation.initial"), "initial = modes needs a modes list");
    }
  }
  for (const char* key : {"theorem1.sim_n", "sweep.sim_n"}) {
    const std::size_t v =
        std::string(key) == "theorem1.sim_n" ? c.theorem1.sim_n : c.sweep.sim_n;
    if (!is_power_of_two(v) || v < 32) {
      throw ConfigError(line_of(key), "sim_n must be a power of two >= 32");
    }
  }
  if (c.theorem2.override_b1.has_value() != c.theorem2.override_b2.has_value()) {
    throw ConfigError(line_of(c.theorem2.override_b1 ? "theorem2.override_b1"
                                                     : "theorem2.override_b2"),
                      "override_b1 and override_b2 must be given together");
  }
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kLinear: return "linear";
    case ExperimentKind::kReduce: return "reduce";
    case ExperimentKind::kOde: return "ode";
    case ExperimentKind::kSimulate: return "simulate";
    case ExperimentKind::kSimulateFull: return "simulate-full";
    case ExperimentKind::kSweep: return "sweep";
    case ExperimentKind::kVerifyTheorem1: return "verify-theorem1";
    case ExperimentKind::kVerifyTheorem2: return "verify-theorem2";
  }
  return "?";
}

ExperimentKind parse_kind(const std::string& s) {
  for (ExperimentKind k :
       {ExperimentKind::kLinear, ExperimentKind::kReduce, ExperimentKind::kOde,
        ExperimentKind::kSimulate, ExperimentKind::kSimulateFull, ExperimentKind::kSweep,
        ExperimentKind::kVerifyTheorem1, ExperimentKind::kVerifyTheorem2}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError(0, fmt::format("unknown experiment kind '{}'", s));
}

std::string to_string(CoefficientConvention c) {
  return c == CoefficientConvention::kPaper ? "paper" : "formula";
}

bool ExperimentConfig::randomized() const {
  switch (kind) {
    case ExperimentKind::kSimulate:
    case ExperimentKind::kSimulateFull:
      return simulation.initial_condition.kind == InitialCondition::Kind::kRandom;
    case ExperimentKind::kSweep: return sweep.simulate;
    case ExperimentKind::kVerifyTheorem1: return theorem1.sim_seeds > 0 || theorem1.full_system;
    default: return false;
  }
}

DomainGeometry ExperimentConfig::resolved_geometry() const {
  if (!geometry.critical) return {geometry.ell1, geometry.ell2};
  return make_critical_geometry(geometry.m, geometry.n,
                                ModelParams{model.mu, model.alpha, 1.0});
}

ModelParams ExperimentConfig::resolved_params() const {
  ModelParams p{model.mu, model.alpha, 1.0};
  if (model.lambda) {
    p.lambda = *model.lambda;
  } else {
    p.lambda = model.lambda_factor * lambda_critical(p, resolved_geometry()).lambda_c;
  }
  return p;
}

SimConfig ExperimentConfig::resolved_simulation() const {
  SimConfig s = simulation;
  s.params = resolved_params();
  s.geometry = resolved_geometry();
  s.critical_m = geometry.m;
  s.critical_n = geometry.n;
  if (seed) s.initial_condition.seed = *seed;
  return s;
}

ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& overrides) {
  ExperimentConfig cfg;
  std::map<std::string, const Field*> by_id;
  std::set<std::string> sections;
  for (const Field& f : schema()) {
    by_id[f.section + "." + f.key] = &f;
    sections.insert(f.section);
  }
  std::map<std::string, int> seen;
  std::string section = "experiment";
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (const auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!sections.contains(section)) {
        throw ConfigError(line, fmt::format("unknown section [{}]", section));
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const std::string id = section + "." + key;
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw ConfigError(line, fmt::format("unknown key '{}' in [{}]", key, section));
    }
    if (seen.contains(id)) {
      throw ConfigError(line, fmt::format("duplicate key '{}' (first on line {})", key, seen[id]));
    }
    seen[id] = line;
    it->second->set(cfg, value, line);
  }
  if (overrides.seed) cfg.seed = overrides.seed;
  if (overrides.convention) cfg.convention = *overrides.convention;
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
  validate(cfg, seen);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, fmt::format("cannot open config file '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string serialize(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const Field& f : schema()) {
    const auto value = f.get(cfg);
    if (!value) continue;
    if (f.section != section) {
      if (!out.empty()) out += "\n";
      out += "[" + f.section + "]\n";
      section = f.section;
    }
    out += f.key + " = " + *value + "\n";
  }
  return out;
}

std::string normalize(const std::string& text) { return serialize(parse_config(text)); }

}  // namespace chemo
