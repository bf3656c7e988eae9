#include "chemo/spectral_core.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "chemo/errors.hpp"
#include "chemo/spectral_field.hpp"

namespace chemo {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(name) + " must be positive and finite, got " +
                      std::to_string(value));
  }
}

}  // namespace

void ModelParams::validate() const {
  require_positive(mu, "mu");
  require_positive(alpha, "alpha");
  require_positive(lambda, "lambda");
}

void DomainGeometry::validate() const {
  require_positive(ell1, "ell1");
  require_positive(ell2, "ell2");
}

ModelParams nondimensionalize(const PhysicalParams& p) {
  require_positive(p.d1, "d1");
  require_positive(p.d2, "d2");
  require_positive(p.chi, "chi");
  require_positive(p.r1, "r1");
  require_positive(p.r2, "r2");
  require_positive(p.alpha1, "alpha1");
  require_positive(p.alpha2, "alpha2");
  return ModelParams{
      .mu = p.d1 / p.d2,
      .alpha = p.alpha1 * p.alpha2 / p.r2,
      .lambda = p.r1 * std::sqrt(p.alpha2) * p.chi / (p.r2 * p.d2),
  };
}

double rho(ModeIndex k, const DomainGeometry& g) {
  const double a = k.k1 / g.ell1;
  const double b = k.k2 / g.ell2;
  return kPi * kPi * (a * a + b * b);
}

double sigma(double rho_k, const ModelParams& p) {
  return -p.mu * rho_k - 2.0 * p.alpha + p.lambda * rho_k / (1.0 + rho_k);
}

double sigma(ModeIndex k, const ModelParams& p, const DomainGeometry& g) {
  return sigma(rho(k, g), p);
}

double neutral_lambda(double rho_k, const ModelParams& p) {
  return (rho_k + 1.0) * (p.mu * rho_k + 2.0 * p.alpha) / rho_k;
}

CriticalData lambda_critical(const ModelParams& p, const DomainGeometry& g, int k_max) {
  if (!(p.mu > 0.0) || !(p.alpha > 0.0)) throw DomainError("mu and alpha must be positive");
  g.validate();
  if (k_max < 1) throw DomainError("k_max must be at least 1");

  double best = std::numeric_limits<double>::infinity();
  for (int k1 = 0; k1 <= k_max; ++k1) {
    for (int k2 = 0; k2 <= k_max; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      best = std::min(best, neutral_lambda(rho({k1, k2}, g), p));
    }
  }

  CriticalData out;
  out.lambda_c = best;
  for (int k1 = 0; k1 <= k_max; ++k1) {
    for (int k2 = 0; k2 <= k_max; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      const double r = rho({k1, k2}, g);
      if (std::abs(neutral_lambda(r, p) - best) <= kCriticalTieTolerance * best) {
        if (k1 == k_max || k2 == k_max) {
          throw InconclusiveSearchError("critical mode (" + std::to_string(k1) + "," +
                                        std::to_string(k2) +
                                        ") lies on the search boundary; raise k_max");
        }
        out.critical_modes.push_back({k1, k2});
        if (out.rho_star == 0.0) out.rho_star = r;
      }
    }
  }
  out.continuum_rho_star = std::sqrt(2.0 * p.alpha / p.mu);
  const double root = std::sqrt(p.mu) + std::sqrt(2.0 * p.alpha);
  out.continuum_lambda_c = root * root;
  return out;
}

std::map<ModeIndex, int> pes_classification(const ModelParams& p, const DomainGeometry& g,
                                            int k_max, double zero_tol) {
  std::map<ModeIndex, int> signs;
  for (int k1 = 0; k1 <= k_max; ++k1) {
    for (int k2 = 0; k2 <= k_max; ++k2) {
      const double s = sigma({k1, k2}, p, g);
      signs[{k1, k2}] = std::abs(s) <= zero_tol ? 0 : (s > 0.0 ? 1 : -1);
    }
  }
  return signs;
}

DomainGeometry make_critical_geometry(int m, int n, const ModelParams& p) {
  if (m < 1 || n < 1) throw DomainError("m and n must be positive");
  if (std::gcd(m, n) != 1) {
    throw DomainError("m and n must be coprime (got " + std::to_string(m) + ", " +
                      std::to_string(n) + ")");
  }
  if (!(p.mu > 0.0) || !(p.alpha > 0.0)) throw DomainError("mu and alpha must be positive");
  const double rho_star = std::sqrt(2.0 * p.alpha / p.mu);
  const double ell2 = 2.0 * n * kPi / std::sqrt(rho_star);
  const double ell1 = m * ell2 / (std::sqrt(3.0) * n);
  return DomainGeometry{ell1, ell2};
}

SpectralField helmholtz_inverse(const SpectralField& u, double coupling) {
  SpectralField v(u.n1(), u.n2(), u.geometry());
  for (std::size_t k1 = 0; k1 < u.n1(); ++k1) {
    for (std::size_t k2 = 0; k2 < u.n2(); ++k2) {
      const double r = rho({static_cast<int>(k1), static_cast<int>(k2)}, u.geometry());
      v(k1, k2) = coupling * u(k1, k2) / (1.0 + r);
    }
  }
  return v;
}

}  // namespace chemo
