#pragma once

// Model parameters, rectangle geometry and the cosine eigenstructure of the
// linearized nonlocal chemotaxis operator.

#include <compare>
#include <map>
#include <vector>

namespace chemo {

inline constexpr double kPi = 3.14159265358979323846;

/// Dimensional coefficients of the population / chemoattractant system.
struct PhysicalParams {
  double d1 = 1.0;      // population diffusion
  double d2 = 1.0;      // chemoattractant diffusion
  double chi = 1.0;     // chemotactic sensitivity
  double r1 = 1.0;      // chemoattractant production
  double r2 = 1.0;      // chemoattractant degradation
  double alpha1 = 1.0;  // proliferation rate
  double alpha2 = 1.0;  // carrying level (squared)
};

/// Nondimensional parameters: relative diffusion, proliferation, chemotactic coupling.
struct ModelParams {
  double mu = 1.0;
  double alpha = 1.0;
  double lambda = 1.0;

  void validate() const;
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct DomainGeometry {
  double ell1 = 1.0;
  double ell2 = 1.0;

  void validate() const;
  friend bool operator==(const DomainGeometry&, const DomainGeometry&) = default;
};

/// Index (k1, k2) of the eigenfunction cos(k1 pi x1 / ell1) cos(k2 pi x2 / ell2).
struct ModeIndex {
  int k1 = 0;
  int k2 = 0;

  friend auto operator<=>(const ModeIndex&, const ModeIndex&) = default;
};

struct CriticalData {
  double lambda_c = 0.0;
  std::vector<ModeIndex> critical_modes;  // sorted
  double rho_star = 0.0;                  // lattice minimizer
  // Continuum diagnostics: minimizer sqrt(2 alpha / mu) and envelope (sqrt(mu) + sqrt(2 alpha))^2.
  double continuum_rho_star = 0.0;
  double continuum_lambda_c = 0.0;
};

ModelParams nondimensionalize(const PhysicalParams& p);

/// Laplacian eigenvalue pi^2 (k1^2 / ell1^2 + k2^2 / ell2^2).
double rho(ModeIndex k, const DomainGeometry& g);

/// Linear growth rate -mu rho - 2 alpha + lambda rho / (1 + rho).
double sigma(double rho_k, const ModelParams& p);
double sigma(ModeIndex k, const ModelParams& p, const DomainGeometry& g);

/// Coupling at which a mode with wavenumber rho_k becomes neutral.
double neutral_lambda(double rho_k, const ModelParams& p);

inline constexpr int kDefaultKMax = 32;
inline constexpr double kCriticalTieTolerance = 1e-9;

/// Minimizes the neutral coupling over the mode lattice 0 <= k1, k2 <= k_max.
/// Throws InconclusiveSearchError if a minimizer touches the search boundary.
CriticalData lambda_critical(const ModelParams& p, const DomainGeometry& g,
                             int k_max = kDefaultKMax);

/// Sign (-1, 0, +1) of sigma for every mode in the search box. Values with
/// |sigma| <= zero_tol count as zero.
std::map<ModeIndex, int> pes_classification(const ModelParams& p, const DomainGeometry& g,
                                            int k_max = kDefaultKMax, double zero_tol = 1e-10);

/// Rectangle with sqrt(3) n ell1 = m ell2 on which modes (m, n) and (0, 2n)
/// share the continuum minimizer sqrt(2 alpha / mu).
DomainGeometry make_critical_geometry(int m, int n, const ModelParams& p);

class SpectralField;

/// Solves (-Delta + 1) v = coupling * u coefficient-wise.
SpectralField helmholtz_inverse(const SpectralField& u, double coupling);

}  // namespace chemo
