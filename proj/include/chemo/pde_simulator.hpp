#pragma once

// Pseudospectral method-of-lines solver for the nonlocal scalar equation and
// the two-field system on the Neumann rectangle.

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chemo/amplitude_reduction.hpp"
#include "chemo/spectral_field.hpp"
#include "chemo/transforms.hpp"

namespace chemo {

/// How the product u * lap(v) is formed.
enum class NonlinearForm {
  kHelmholtzIdentity,  // lap(v) = v - lambda u
  kLiteral,            // lap(v) by spectral differentiation
};

/// Diagonal linear part: sigma(rho_k) per mode.
SpectralField linear_rhs(const SpectralField& u, const ModelParams& p);

/// Quadratic and cubic terms evaluated on a padded grid and projected back.
class NonlinearEvaluator {
 public:
  NonlinearEvaluator(std::size_t n1, std::size_t n2, const DomainGeometry& g,
                     const ModelParams& p, int dealias_factor = 2,
                     NonlinearForm form = NonlinearForm::kHelmholtzIdentity);

  SpectralField operator()(const SpectralField& u) const;
  /// Two-field variant: v is an independent field and lap(v) is always literal.
  SpectralField operator()(const SpectralField& u, const SpectralField& v) const;

 private:
  SpectralField evaluate(const SpectralField& u, const SpectralField* v_given) const;

  std::size_t n1_, n2_, m1_, m2_;
  DomainGeometry geometry_;
  ModelParams params_;
  NonlinearForm form_;
  Transform2D padded_;
  std::vector<double> rho_;
  // Scratch buffers on the padded grid.
  mutable std::vector<double> cu_, cv_, cd_, gu_, gv_, gux_, gvx_, guy_, gvy_, glv_, prod_;
};

SpectralField nonlinear_rhs(const SpectralField& u, const ModelParams& p, int dealias_factor = 2,
                            NonlinearForm form = NonlinearForm::kHelmholtzIdentity);

/// Thrown when the state stops being finite.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double t, const std::string& what) : std::runtime_error(what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Exponential midpoint stepper for the scalar equation; the linear part is exact.
class Stepper {
 public:
  Stepper(std::size_t n1, std::size_t n2, const DomainGeometry& g, const ModelParams& p,
          double dt, bool nonlinear = true, int dealias_factor = 2,
          NonlinearForm form = NonlinearForm::kHelmholtzIdentity);

  /// Advances u by one step in place; t is only used in the blow-up report.
  void step(SpectralField& u, double t = 0.0) const;
  double dt() const { return dt_; }

 private:
  double dt_;
  bool nonlinear_;
  std::vector<double> e_half_, phi_half_, e_full_, phi_full_;
  NonlinearEvaluator nl_;
};

/// Convenience single step.
SpectralField step(const SpectralField& u, const ModelParams& p, double dt);

struct InitialCondition {
  enum class Kind { kModes, kRandom };
  Kind kind = Kind::kRandom;
  std::vector<std::pair<ModeIndex, double>> modes;  // for kModes
  std::uint64_t seed = 1;
  double amplitude = 1e-3;
  int max_mode = 8;
};

/// Uniform [-a, a] coefficients on modes with k1, k2 <= max_mode, or named modes.
SpectralField make_initial_field(std::size_t n1, std::size_t n2, const DomainGeometry& g,
                                 const InitialCondition& ic);

struct SimConfig {
  ModelParams params{8.0, 1.0, 18.0};
  DomainGeometry geometry{1.0, 1.0};
  std::size_t n1 = 64;
  std::size_t n2 = 64;
  double dt = 0.01;
  double t_end = 100.0;
  int dealias_factor = 2;
  InitialCondition initial_condition;
  int critical_m = 1;
  int critical_n = 1;
  std::vector<ModeIndex> record_modes;  // empty: critical pair and slaved modes
  double output_interval = 1.0;
  std::vector<double> snapshot_times;
  bool nonlinear = true;
  NonlinearForm form = NonlinearForm::kHelmholtzIdentity;
  bool stop_at_steady_state = false;
  double steady_tolerance = 1e-8;  // relative l2 change per unit time
  double steady_window = 50.0;
  double noise_floor = 1e-4;

  /// Throws ConfigError on an invalid setting.
  void validate() const;
  /// Modes recorded when record_modes is empty.
  std::vector<ModeIndex> default_record_modes() const;
};

struct Diagnostics {
  std::vector<double> times;
  std::map<ModeIndex, std::vector<double>> mode_series;
  std::vector<double> l2_norm_series;
  PatternClass final_fingerprint = PatternClass::kUnresolved;
  Vec2 final_critical = Vec2::Zero();  // amplitudes of (m, n) and (0, 2n)
  int critical_m = 1;
  int critical_n = 1;
  bool reached_steady_state = false;
  double t_final = 0.0;
};

struct SimResult {
  Diagnostics diagnostics;
  SpectralField final;
  std::vector<std::pair<double, GridField>> snapshots;
};

/// Carries what was recorded before the state stopped being finite.
class SimulationBlowUp : public BlowUpError {
 public:
  SimulationBlowUp(double t, const std::string& what, Diagnostics partial)
      : BlowUpError(t, what), partial_(std::move(partial)) {}
  const Diagnostics& partial() const noexcept { return partial_; }

 private:
  Diagnostics partial_;
};

SimResult simulate(const SimConfig& cfg);

struct FullSimResult {
  Diagnostics diagnostics;
  SpectralField final_u;
  SpectralField final_v;
};

enum class InitialChemoattractant { kQuasiStationary, kZero };

/// Evolves u and v without eliminating v.
FullSimResult simulate_full_system(
    const SimConfig& cfg, InitialChemoattractant v0 = InitialChemoattractant::kQuasiStationary);

/// Pattern class from the two critical amplitudes.
PatternClass pattern_fingerprint(double y1, double y2, double noise_floor);

/// `# N1 N2 ell1 ell2 t` header then one grid row per line at 17 significant digits.
void write_snapshot(const std::string& path, const GridField& g, const DomainGeometry& geometry,
                    double t);
std::string format_snapshot(const GridField& g, const DomainGeometry& geometry, double t);
/// Columns t, l2_norm, then y_k1_k2 per recorded mode.
void write_mode_series(const std::string& path, const Diagnostics& d);
std::string format_mode_series(const Diagnostics& d);

}  // namespace chemo
