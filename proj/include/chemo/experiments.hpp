#pragma once

// Experiment drivers behind the command-line tool.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chemo/config.hpp"
#include "chemo/fitting.hpp"
#include "chemo/report.hpp"

namespace chemo {

/// Coefficients evaluated at the critical coupling of g, with the growth
/// rates of the critical pair taken at p.lambda. This is the truncated system
/// valid for lambda just above lambda_c.
ReducedCoefficients frozen_coefficients(const ModelParams& p, const DomainGeometry& g, int m,
                                        int n,
                                        CoefficientConvention convention =
                                            CoefficientConvention::kFormula);

/// Coupling at which a mode with wavenumber rho_k grows at rate s.
double lambda_for_sigma(double s, const ModelParams& p, double rho_k);

/// Steady amplitudes on the roll or hexagon branch, one simulation per sigma.
struct SaturationStudy {
  PatternClass branch = PatternClass::kRoll;
  std::vector<SaturationRun> runs;
  std::vector<PatternClass> fingerprints;  // final class of each run
  double estimate = 0.0;                   // fit_saturation result
};

SaturationStudy saturation_study(const ModelParams& base, const DomainGeometry& g, int m, int n,
                                 PatternClass branch, const std::vector<double>& sigmas,
                                 std::size_t grid, double t_end);

/// Which of two candidate values an estimate selects: exactly one within tolerance.
struct Arbitration {
  double estimate = 0.0;
  double paper_value = 0.0;
  double formula_value = 0.0;
  double paper_error = 0.0;  // relative
  double formula_error = 0.0;
  double separation = 0.0;  // |paper - formula| / min(|paper|, |formula|)
  std::optional<CoefficientConvention> winner;
};

Arbitration arbitrate(double estimate, double paper_value, double formula_value,
                      double tolerance);

/// Continuation label for roots of the perturbed field: roll on the y2 axis,
/// hexagon within the fingerprint tolerance of |y1| = 2|y2|, mixed otherwise.
PatternClass perturbed_label(const Vec2& y, double amplitude_scale);

/// Flips the sign of 2 b2 - b1 while keeping b1 and |2 b2 - b1|.
ReducedCoefficients mirrored_override(const ReducedCoefficients& rc);

VerificationReport run_verify_theorem1(const ExperimentConfig& cfg);
VerificationReport run_verify_theorem2(const ExperimentConfig& cfg);

struct AtlasRow {
  double lambda_factor = 0.0;
  double geometry_scale = 0.0;
  double lambda_c = 0.0;
  std::vector<ModeIndex> critical_modes;
  double frak_a = 0.0;
  double formula_b1 = 0.0;
  double formula_b2 = 0.0;
  double paper_b1 = 0.0;
  double paper_b2 = 0.0;
  long equilibrium_count = -1;  // nontrivial roots; -1 when not computed
  std::string fingerprint = "-";
  std::string error;
};

/// One row per (lambda factor, geometry scale) cell in declaration order.
/// The geometry scale multiplies ell2 of the critical rectangle.
std::vector<AtlasRow> run_sweep(const ExperimentConfig& cfg);
std::string format_atlas(const std::vector<AtlasRow>& rows);

/// Runs the configured experiment, writes its files under cfg.output_dir and
/// returns the process exit code (nonzero iff a verification fails).
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace chemo
