#pragma once

// Line-oriented experiment configuration: `key = value` pairs under
// `[section]` headers, `#` comments, unknown keys rejected.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chemo/amplitude_reduction.hpp"
#include "chemo/pde_simulator.hpp"

namespace chemo {

enum class ExperimentKind {
  kLinear,
  kReduce,
  kOde,
  kSimulate,
  kSimulateFull,
  kSweep,
  kVerifyTheorem1,
  kVerifyTheorem2,
};

std::string to_string(ExperimentKind k);
/// Throws ConfigError (line 0) on an unknown name.
ExperimentKind parse_kind(const std::string& s);
std::string to_string(CoefficientConvention c);

struct ModelBlock {
  double mu = 8.0;
  double alpha = 1.0;
  std::optional<double> lambda;  // absolute coupling; overrides lambda_factor
  double lambda_factor = 1.02;   // multiple of the critical coupling
};

struct GeometryBlock {
  bool critical = true;  // hexagon-compatible rectangle for (m, n)
  int m = 1;
  int n = 1;
  double ell1 = 1.0;  // used when critical is false
  double ell2 = 1.0;
};

struct OdeBlock {
  double y1 = 1e-3;
  double y2 = 1e-3;
  double dt = 0.01;
  double t_end = 0.0;  // 0: horizon from the growth rates
  int basin_rays = 64;
  double basin_radius = 0.1;  // times the amplitude scale
};

struct Theorem1Block {
  int sim_seeds = 10;
  std::size_t sim_n = 32;
  double sim_t_end = 2000.0;
  double subcritical_factor = 0.98;
  bool full_system = true;
  std::vector<double> saturation_sigmas{0.02, 0.05, 0.1};
  double analytic_tolerance = 1e-10;
  double reduction_tolerance = 0.15;
};

struct Theorem2Block {
  double ell2_perturbation = 0.01;
  double lambda_perturbation = 0.01;
  std::optional<double> override_b1;  // extra coefficient-override case
  std::optional<double> override_b2;
};

struct SweepBlock {
  std::vector<double> lambda_factors{0.98, 1.0, 1.02};
  std::vector<double> geometry_scales{0.99, 1.0, 1.01};
  bool simulate = true;
  std::size_t sim_n = 32;
  double sim_t_end = 500.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kLinear;
  std::optional<std::uint64_t> seed;
  std::string output_dir = "out";
  CoefficientConvention convention = CoefficientConvention::kFormula;
  QuadraticPlacement placement = QuadraticPlacement::kProjected;
  ModelBlock model;
  GeometryBlock geometry;
  SimConfig simulation;  // params, geometry and critical pair are filled by resolve
  InitialChemoattractant chemoattractant = InitialChemoattractant::kQuasiStationary;
  OdeBlock ode;
  Theorem1Block theorem1;
  Theorem2Block theorem2;
  SweepBlock sweep;

  bool randomized() const;
  /// Rectangle from the geometry block.
  DomainGeometry resolved_geometry() const;
  /// Parameters with lambda resolved against the critical coupling of the geometry.
  ModelParams resolved_params() const;
  /// Simulation block with model, geometry, critical pair and seed filled in.
  SimConfig resolved_simulation() const;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<CoefficientConvention> convention;
  std::optional<std::string> output_dir;
};

/// Parses and validates. Errors carry the line number of the offending key,
/// or 0 when a required key is missing altogether.
ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {});
ExperimentConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

/// Every key in a fixed order, numbers at 17 significant digits.
std::string serialize(const ExperimentConfig& cfg);
/// serialize(parse_config(text)).
std::string normalize(const std::string& text);

}  // namespace chemo
