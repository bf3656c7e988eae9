#pragma once

// Even/odd-extension transforms between midpoint-grid samples and the
// cosine (or sine) product basis, backed by FFTW real-to-real plans.

#include <cstddef>
#include <memory>

#include "chemo/spectral_field.hpp"

namespace chemo {

/// Basis along one axis: cos(k pi x / ell) or sin(k pi x / ell).
enum class Parity { kCosine, kSine };

/// Reusable plans for one grid size. Coefficient (k1, k2) is stored at the
/// same row-major slot for either parity; slots with k = 0 on a sine axis are ignored.
class Transform2D {
 public:
  Transform2D(std::size_t n1, std::size_t n2);
  /// Band-limited variant: inverse inputs and forward outputs are confined to
  /// k1 < band1, k2 < band2, which lets the passes skip zero rows and columns.
  Transform2D(std::size_t n1, std::size_t n2, std::size_t band1, std::size_t band2);
  ~Transform2D();
  Transform2D(const Transform2D&) = delete;
  Transform2D& operator=(const Transform2D&) = delete;
  Transform2D(Transform2D&&) noexcept;
  Transform2D& operator=(Transform2D&&) noexcept;

  std::size_t n1() const;
  std::size_t n2() const;

  /// Samples -> cosine amplitudes.
  void forward(const double* grid, double* coeffs) const;
  /// Amplitudes in the given per-axis parity -> samples.
  void inverse(const double* coeffs, double* grid, Parity p1 = Parity::kCosine,
               Parity p2 = Parity::kCosine) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SpectralField transform_forward(const GridField& g, const DomainGeometry& geometry);
GridField transform_inverse(const SpectralField& s);

/// Grid points x_i = (i + 1/2) ell / n.
double grid_coordinate(std::size_t i, std::size_t n, double ell);

}  // namespace chemo
