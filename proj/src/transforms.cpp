#include "chemo/transforms.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <vector>

#include "chemo/errors.hpp"

namespace chemo {

namespace {

// Plan creation and destruction in FFTW are not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Buffer {
  double* p = nullptr;
  explicit Buffer(std::size_t n) : p(fftw_alloc_real(n)) {
    if (p == nullptr) throw std::bad_alloc();
  }
  ~Buffer() { fftw_free(p); }
  Buffer(const Buffer&) = delete;
  Buffer& operator=(const Buffer&) = delete;
};

}  // namespace

struct Transform2D::Impl {
  std::size_t n1;
  std::size_t n2;
  std::size_t band1;
  std::size_t band2;
  bool pruned;
  Buffer out;  // all plans run in place
  fftw_plan forward = nullptr;
  fftw_plan inverse[2][2] = {{nullptr, nullptr}, {nullptr, nullptr}};
  // Pruned path: 1D passes that skip rows or columns known to be zero or unused.
  fftw_plan forward_rows = nullptr;
  fftw_plan forward_cols = nullptr;
  fftw_plan inverse_rows[2] = {nullptr, nullptr};
  fftw_plan inverse_cols[2] = {nullptr, nullptr};

  Impl(std::size_t a, std::size_t b, std::size_t ba, std::size_t bb)
      : n1(a), n2(b), band1(ba), band2(bb), pruned(ba < a || bb < b), out(a * b) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    const int i1 = static_cast<int>(n1);
    const int i2 = static_cast<int>(n2);
    const fftw_r2r_kind kinds[2] = {FFTW_REDFT01, FFTW_RODFT01};
    if (!pruned) {
      forward =
          fftw_plan_r2r_2d(i1, i2, out.p, out.p, FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE);
      for (int a1 = 0; a1 < 2; ++a1) {
        for (int a2 = 0; a2 < 2; ++a2) {
          inverse[a1][a2] =
              fftw_plan_r2r_2d(i1, i2, out.p, out.p, kinds[a1], kinds[a2], FFTW_ESTIMATE);
        }
      }
      return;
    }
    const fftw_r2r_kind fwd = FFTW_REDFT10;
    double* o = out.p;
    forward_rows = fftw_plan_many_r2r(1, &i2, i1, o, nullptr, 1, i2, o, nullptr, 1, i2, &fwd,
                                      FFTW_ESTIMATE);
    forward_cols = fftw_plan_many_r2r(1, &i1, static_cast<int>(band2), o, nullptr, i2, 1, o,
                                      nullptr, i2, 1, &fwd, FFTW_ESTIMATE);
    for (int k = 0; k < 2; ++k) {
      // Columns first over the band only, so the strided pass is the short one.
      inverse_cols[k] = fftw_plan_many_r2r(1, &i1, static_cast<int>(band2), o, nullptr, i2, 1, o,
                                           nullptr, i2, 1, &kinds[k], FFTW_ESTIMATE);
      inverse_rows[k] = fftw_plan_many_r2r(1, &i2, i1, o, nullptr, 1, i2, o, nullptr, 1, i2,
                                           &kinds[k], FFTW_ESTIMATE);
    }
  }

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    for (fftw_plan p : {forward, forward_rows, forward_cols, inverse[0][0], inverse[0][1],
                        inverse[1][0], inverse[1][1], inverse_rows[0], inverse_rows[1],
                        inverse_cols[0], inverse_cols[1]}) {
      if (p != nullptr) fftw_destroy_plan(p);
    }
  }
};

Transform2D::Transform2D(std::size_t n1, std::size_t n2) : Transform2D(n1, n2, n1, n2) {}

Transform2D::Transform2D(std::size_t n1, std::size_t n2, std::size_t band1, std::size_t band2) {
  if (n1 < 1 || n2 < 1) throw DomainError("transform sizes must be positive");
  if (band1 < 1 || band2 < 1 || band1 > n1 || band2 > n2) {
    throw DomainError("transform band must lie within the grid");
  }
  impl_ = std::make_unique<Impl>(n1, n2, band1, band2);
}

Transform2D::~Transform2D() = default;
Transform2D::Transform2D(Transform2D&&) noexcept = default;
Transform2D& Transform2D::operator=(Transform2D&&) noexcept = default;

std::size_t Transform2D::n1() const { return impl_->n1; }
std::size_t Transform2D::n2() const { return impl_->n2; }

void Transform2D::forward(const double* grid, double* coeffs) const {
  const std::size_t n1 = impl_->n1;
  const std::size_t n2 = impl_->n2;
  std::copy(grid, grid + n1 * n2, impl_->out.p);
  if (impl_->pruned) {
    fftw_execute(impl_->forward_rows);
    fftw_execute(impl_->forward_cols);
  } else {
    fftw_execute(impl_->forward);
  }
  const double s1 = 1.0 / static_cast<double>(n1);
  const double s2 = 1.0 / static_cast<double>(n2);
  const std::size_t b1 = impl_->band1;
  const std::size_t b2 = impl_->band2;
  for (std::size_t k1 = 0; k1 < n1; ++k1) {
    const double w1 = k1 == 0 ? 0.5 * s1 : s1;
    for (std::size_t k2 = 0; k2 < n2; ++k2) {
      if (k1 >= b1 || k2 >= b2) {
        coeffs[k1 * n2 + k2] = 0.0;
        continue;
      }
      const double w2 = k2 == 0 ? 0.5 * s2 : s2;
      coeffs[k1 * n2 + k2] = impl_->out.p[k1 * n2 + k2] * w1 * w2;
    }
  }
}

void Transform2D::inverse(const double* coeffs, double* grid, Parity p1, Parity p2) const {
  const std::size_t n1 = impl_->n1;
  const std::size_t n2 = impl_->n2;
  const bool pruned = impl_->pruned;
  // Transform straight into the caller's buffer when its SIMD alignment matches the plans.
  const bool direct = fftw_alignment_of(grid) == fftw_alignment_of(impl_->out.p);
  double* in = direct ? grid : impl_->out.p;
  const std::size_t b1 = impl_->band1;
  const std::size_t b2 = impl_->band2;
  // Cosine axis: X_0 = c_0, X_k = c_k / 2. Sine axis: X_{k-1} = s_k / 2 for
  // k < n, with the top slot (k = n) never populated.
  const std::size_t shift1 = p1 == Parity::kSine ? 1 : 0;
  const std::size_t shift2 = p2 == Parity::kSine ? 1 : 0;
  const std::size_t rows = std::min(n1, b1 - shift1 * std::min<std::size_t>(b1, 1));
  const std::size_t cols = std::min(n2, b2 - shift2 * std::min<std::size_t>(b2, 1));
  std::fill(in, in + n1 * n2, 0.0);
  for (std::size_t j1 = 0; j1 < rows; ++j1) {
    const std::size_t k1 = j1 + shift1;
    const double w1 = (shift1 == 0 && j1 == 0) ? 1.0 : 0.5;
    const double* src = coeffs + k1 * n2 + shift2;
    double* dst = in + j1 * n2;
    for (std::size_t j2 = 0; j2 < cols; ++j2) dst[j2] = src[j2] * w1 * 0.5;
    if (shift2 == 0) dst[0] *= 2.0;
  }
  const int a1 = p1 == Parity::kSine ? 1 : 0;
  const int a2 = p2 == Parity::kSine ? 1 : 0;
  if (pruned) {
    fftw_execute_r2r(impl_->inverse_cols[a1], in, in);
    fftw_execute_r2r(impl_->inverse_rows[a2], in, in);
  } else {
    fftw_execute_r2r(impl_->inverse[a1][a2], in, in);
  }
  if (!direct) std::copy(in, in + n1 * n2, grid);
}

SpectralField transform_forward(const GridField& g, const DomainGeometry& geometry) {
  if (g.values.size() != g.n1 * g.n2) throw DomainError("grid field size mismatch");
  SpectralField s(g.n1, g.n2, geometry);
  Transform2D t(g.n1, g.n2);
  t.forward(g.values.data(), s.data().data());
  return s;
}

GridField transform_inverse(const SpectralField& s) {
  GridField g(s.n1(), s.n2());
  Transform2D t(s.n1(), s.n2());
  t.inverse(s.data().data(), g.values.data());
  return g;
}

double grid_coordinate(std::size_t i, std::size_t n, double ell) {
  return (static_cast<double>(i) + 0.5) * ell / static_cast<double>(n);
}

}  // namespace chemo
