#include "chemo/spectral_field.hpp"

#include <algorithm>
#include <cmath>

#include "chemo/errors.hpp"

namespace chemo {

SpectralField::SpectralField(std::size_t n1, std::size_t n2, DomainGeometry geometry)
    : n1_(n1), n2_(n2), geometry_(geometry), coeffs_(n1 * n2, 0.0) {}

double SpectralField::amplitude(ModeIndex k) const {
  if (k.k1 < 0 || k.k2 < 0) return 0.0;
  const auto k1 = static_cast<std::size_t>(k.k1);
  const auto k2 = static_cast<std::size_t>(k.k2);
  if (k1 >= n1_ || k2 >= n2_) return 0.0;
  return (*this)(k1, k2);
}

bool SpectralField::all_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return std::isfinite(c); });
}

double SpectralField::l2_norm() const {
  double sum = 0.0;
  for (std::size_t k1 = 0; k1 < n1_; ++k1) {
    const double w1 = k1 == 0 ? 1.0 : 0.5;
    for (std::size_t k2 = 0; k2 < n2_; ++k2) {
      const double w2 = k2 == 0 ? 1.0 : 0.5;
      const double c = (*this)(k1, k2);
      sum += w1 * w2 * c * c;
    }
  }
  return std::sqrt(sum * geometry_.ell1 * geometry_.ell2);
}

void SpectralField::set_zero() { std::fill(coeffs_.begin(), coeffs_.end(), 0.0); }

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  if (other.n1_ != n1_ || other.n2_ != n2_) throw DomainError("spectral field size mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

SpectralField SpectralField::basis(std::size_t n1, std::size_t n2, const DomainGeometry& g,
                                   ModeIndex k) {
  SpectralField f(n1, n2, g);
  f(static_cast<std::size_t>(k.k1), static_cast<std::size_t>(k.k2)) = 1.0;
  return f;
}

SpectralField operator+(SpectralField a, const SpectralField& b) {
  a += b;
  return a;
}

SpectralField operator*(double s, SpectralField a) {
  a *= s;
  return a;
}

}  // namespace chemo
