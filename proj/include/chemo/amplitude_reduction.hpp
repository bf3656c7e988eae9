#pragma once

// Two-mode amplitude equations for the critical pair (m, n), (0, 2n) on a
// hexagon-compatible rectangle: coefficients, slaved modes, equilibria and
// their linear stability.

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "chemo/spectral_core.hpp"

namespace chemo {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Which cubic coefficient pair drives the reduced field.
enum class CoefficientConvention {
  kFormula,  // evaluated from the a, b, kappa chain
  kPaper,    // closed values -21 mu / 80, -57 mu / 128 quoted for the hexagonal point
};

/// Where the quadratic terms sit in the reduced field.
enum class QuadraticPlacement {
  kProjected,  // 4a y1 y2 in the y1 equation, a y1^2 in the y2 equation
  kAsPrinted,  // 4a y1^2 in the y1 equation, a y1 y2 in the y2 equation
};

struct InteractionKernels {
  double P = 0.0;
  double Q = 0.0;
};

/// Kernels weighting <e_i e_j, e_k> and <grad e_i . grad e_j, e_k> in the
/// quadratic interaction of two modes.
InteractionKernels interaction_kernels(double rho_i, double rho_j, const ModelParams& p);

/// The quadratic resonance coefficient (1/8)(-6 alpha + lambda rho / (1 + rho)).
double quadratic_coefficient(const ModelParams& p, double rho_star);

struct QuadraticStrengths {
  double a = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
};

/// Interaction strengths a, b1, b2. Evaluates both algebraic forms and throws
/// std::logic_error if they disagree beyond round-off.
QuadraticStrengths b_coefficients(const ModelParams& p, double rho_star);
/// The kernel form (P/4 - (rho/2) Q, ...) of the same strengths.
QuadraticStrengths b_coefficients_kernel_form(const ModelParams& p, double rho_star);

struct SlavingGains {
  double kappa1 = 0.0;  // (2m, 2n) from y1^2; (0, 4n) carries 2 kappa1 y2^2
  double kappa2 = 0.0;  // (2m, 0) from y1^2; (m, 3n) carries 4 kappa2 y1 y2
};

/// Throws ResonanceError when a slaved mode is neutral.
SlavingGains kappa_coefficients(const ModelParams& p, const DomainGeometry& g, int m, int n);

struct ReducedCoefficients {
  int m = 1;
  int n = 1;
  double rho_star = 0.0;
  double sigma1 = 0.0;  // growth rate of (m, n)
  double sigma2 = 0.0;  // growth rate of (0, 2n)
  double frak_a = 0.0;
  double frak_b1 = 0.0;  // active convention
  double frak_b2 = 0.0;
  double a = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double formula_b1 = 0.0;
  double formula_b2 = 0.0;
  double paper_b1 = 0.0;
  double paper_b2 = 0.0;
  CoefficientConvention convention = CoefficientConvention::kFormula;
  QuadraticPlacement placement = QuadraticPlacement::kProjected;

  double b1_minus_2b2() const { return frak_b1 - 2.0 * frak_b2; }
  /// Largest coefficient magnitude; used to scale residual tolerances.
  double scale() const;
};

ReducedCoefficients cubic_coefficients(const ModelParams& p, const DomainGeometry& g, int m,
                                       int n,
                                       CoefficientConvention convention =
                                           CoefficientConvention::kFormula);

/// Same coefficients with a different active cubic pair.
ReducedCoefficients with_convention(ReducedCoefficients rc, CoefficientConvention convention);

/// Amplitudes of the five slaved modes (0,0), (2m,0), (m,3n), (0,4n), (2m,2n).
std::map<ModeIndex, double> slaved_modes(double y1, double y2, const ReducedCoefficients& rc);

/// Truncated cubic amplitude field.
Vec2 reduced_vector_field(const Vec2& y, const ReducedCoefficients& rc);
Mat2 reduced_jacobian(const Vec2& y, const ReducedCoefficients& rc);

enum class PatternClass { kTrivial, kRoll, kRectangle, kHexagon, kMixed, kUnresolved };
enum class Stability { kStableNode, kSaddle, kUnstable };

std::string to_string(PatternClass c);
std::string to_string(Stability s);

struct EquilibriumPoint {
  Vec2 y = Vec2::Zero();
  PatternClass pattern = PatternClass::kTrivial;
  Stability stability = Stability::kStableNode;
  double eigen_re[2] = {0.0, 0.0};  // real parts, ascending
  double eigen_im = 0.0;            // |imaginary part| when complex
  double det = 0.0;
  double trace = 0.0;
  bool marginal = false;
  double residual = 0.0;
};

/// Pattern label from the amplitude fingerprint of an exact equilibrium.
PatternClass equilibrium_pattern(const Vec2& y, double amplitude_scale);

inline constexpr double kMarginalTolerance = 1e-10;

/// Jacobian-based classification of a point assumed to be an equilibrium.
EquilibriumPoint classify_equilibrium(const Vec2& e, const ReducedCoefficients& rc);

/// Sign of det J predicted by the closed-form rules for the a = 0 catalogue:
/// sgn(b1 - 2 b2) for rolls and rectangles, its negative for hexagons.
int analytic_det_sign(PatternClass c, const ReducedCoefficients& rc);

struct EquilibriumOptions {
  double zero_a_tolerance = 1e-10;
  double residual_tolerance = 1e-10;  // relative to coefficient scale
  double dedup_radius = 1e-6;         // relative to amplitude scale
  int newton_max_iterations = 200;
  int grid_seeds_per_axis = 5;
};

struct EquilibriumCatalogue {
  std::vector<EquilibriumPoint> points;  // trivial point first
  std::vector<std::string> seed_failures;
  bool closed_form = false;

  std::size_t nontrivial_count() const { return points.empty() ? 0 : points.size() - 1; }
  std::size_t count(PatternClass c) const;
};

/// Characteristic amplitude sqrt(max|sigma| / min|cubic|) used for tolerances and seeding.
double amplitude_scale(const ReducedCoefficients& rc);

/// Closed-form catalogue valid for a = 0 and sigma1 = sigma2.
std::vector<Vec2> closed_form_equilibria(const ReducedCoefficients& rc);
/// Multi-start damped Newton on the stationary truncated system.
EquilibriumCatalogue numeric_equilibria(const ReducedCoefficients& rc,
                                        const EquilibriumOptions& opts = {});
/// Closed forms when a = 0, numeric roots otherwise. Throws std::runtime_error
/// if a pure rectangle root appears while a != 0.
EquilibriumCatalogue equilibria(const ReducedCoefficients& rc,
                                const EquilibriumOptions& opts = {});

enum class TransitionVerdict { kTypeI, kNotClassified };
std::string to_string(TransitionVerdict v);

struct TransitionOptions {
  double small_a_factor = 0.1;
};

TransitionVerdict transition_type(const ReducedCoefficients& rc,
                                  const TransitionOptions& opts = {});

/// Normalized inner products <.,.> / (ell1 ell2) behind the interaction
/// strengths, as closed forms in rho = rho_(m,n).
struct InnerProductTable {
  double e_mn_e_2m0__e_mn = 0.0;
  double e_mn_e_m3n__e_02n = 0.0;
  double e_02n_e_m3n__e_mn = 0.0;
  double grad_mn_grad_2m0__e_mn = 0.0;
  double grad_mn_grad_m3n__e_02n = 0.0;
  double grad_02n_grad_m3n__e_mn = 0.0;
  double e_02n_e_04n__e_02n = 0.0;
  double e_mn_e_2m2n__e_mn = 0.0;
  double grad_02n_grad_04n__e_02n = 0.0;
  double grad_mn_grad_2m2n__e_mn = 0.0;
  double e_mn_e_00__e_mn = 0.0;
};

InnerProductTable inner_product_table(double rho_star);

}  // namespace chemo
