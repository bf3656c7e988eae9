#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "chemo/spectral_core.hpp"

namespace chemo {

/// Cosine-basis coefficients of a Neumann field on the rectangle:
/// u(x) = sum c(k1, k2) cos(k1 pi x1 / ell1) cos(k2 pi x2 / ell2).
/// Coefficients are amplitudes y_k = <u, e_k> / <e_k, e_k>, stored row-major in k1.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(std::size_t n1, std::size_t n2, DomainGeometry geometry);

  std::size_t n1() const { return n1_; }
  std::size_t n2() const { return n2_; }
  const DomainGeometry& geometry() const { return geometry_; }

  double& operator()(std::size_t k1, std::size_t k2) { return coeffs_[k1 * n2_ + k2]; }
  double operator()(std::size_t k1, std::size_t k2) const { return coeffs_[k1 * n2_ + k2]; }

  /// Amplitude of mode k, zero if outside the stored box.
  double amplitude(ModeIndex k) const;

  std::span<double> data() { return coeffs_; }
  std::span<const double> data() const { return coeffs_; }

  bool all_finite() const;
  /// L2 norm over the domain, computed from the coefficients by Parseval.
  double l2_norm() const;

  void set_zero();

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator*=(double s);

  static SpectralField basis(std::size_t n1, std::size_t n2, const DomainGeometry& g, ModeIndex k);

 private:
  std::size_t n1_ = 0;
  std::size_t n2_ = 0;
  DomainGeometry geometry_{};
  std::vector<double> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Samples on the midpoint collocation grid x_i = (i + 1/2) ell / N.
struct GridField {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::vector<double> values;  // row-major in x1 index

  GridField() = default;
  GridField(std::size_t n1_, std::size_t n2_) : n1(n1_), n2(n2_), values(n1_ * n2_, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * n2 + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * n2 + j]; }
};

}  // namespace chemo
