#include "chemo/fitting.hpp"

#include <Eigen/QR>
#include <array>
#include <cmath>
#include <limits>

#include "chemo/errors.hpp"

namespace chemo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Coefficients of the slaved series against (y1^2, y2^2, y1 y2); NaN for dropped columns.
std::array<double, 3> monomial_fit(const std::vector<double>& y1, const std::vector<double>& y2,
                                   const std::vector<double>& ys, std::array<bool, 3> allowed,
                                   double degenerate_ratio) {
  const std::size_t n = ys.size();
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 / (y1[i] * y1[i] + y2[i] * y2[i]);
    X(i, 0) = y1[i] * y1[i] * w;
    X(i, 1) = y2[i] * y2[i] * w;
    X(i, 2) = y1[i] * y2[i] * w;
    b(i) = ys[i] * w;
  }
  const Eigen::Vector3d scale = X.colwise().norm();
  const double top = scale.maxCoeff();
  std::array<double, 3> out{kNaN, kNaN, kNaN};
  std::vector<int> keep;
  for (int c = 0; c < 3; ++c) {
    if (allowed[c] && top > 0.0 && scale(c) > degenerate_ratio * top) keep.push_back(c);
  }
  if (keep.empty()) return out;
  Eigen::MatrixXd Xk(n, keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) Xk.col(j) = X.col(keep[j]);
  // Columns beyond the numerical rank are collinear with the pivots and dropped.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xk);
  qr.setThreshold(degenerate_ratio);
  const auto rank = qr.rank();
  Eigen::MatrixXd Xr(n, rank);
  std::vector<int> used;
  for (Eigen::Index j = 0; j < rank; ++j) {
    const int c = static_cast<int>(qr.colsPermutation().indices()(j));
    Xr.col(j) = Xk.col(c);
    used.push_back(keep[c]);
  }
  const Eigen::VectorXd coef = Xr.colPivHouseholderQr().solve(b);
  for (std::size_t j = 0; j < used.size(); ++j) out[used[j]] = coef(j);
  return out;
}

double nan_mean(double a, double b) {
  if (std::isnan(a)) return b;
  if (std::isnan(b)) return a;
  return 0.5 * (a + b);
}

}  // namespace

SlavingFit fit_slaving(const Diagnostics& d, const SlavingFitOptions& opts) {
  const int m = d.critical_m;
  const int n = d.critical_n;
  const ModeIndex crit1{m, n};
  const ModeIndex crit2{0, 2 * n};
  for (const ModeIndex& k : {crit1, crit2, ModeIndex{0, 0}, ModeIndex{2 * m, 0},
                             ModeIndex{m, 3 * n}, ModeIndex{0, 4 * n}, ModeIndex{2 * m, 2 * n}}) {
    if (!d.mode_series.contains(k)) {
      throw FitDegenerateError("mode series lacks a critical or slaved mode");
    }
  }
  const auto& s1 = d.mode_series.at(crit1);
  const auto& s2 = d.mode_series.at(crit2);

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < d.times.size(); ++i) {
    if (d.times[i] < opts.t_min) continue;
    if (std::max(std::abs(s1[i]), std::abs(s2[i])) < opts.amplitude_floor) continue;
    rows.push_back(i);
  }
  if (rows.size() < 3) throw FitDegenerateError("fewer than 3 samples in the fit window");

  std::vector<double> y1, y2;
  for (std::size_t i : rows) {
    y1.push_back(s1[i]);
    y2.push_back(s2[i]);
  }
  const auto fit = [&](ModeIndex k, std::array<bool, 3> allowed) {
    std::vector<double> ys;
    for (std::size_t i : rows) ys.push_back(d.mode_series.at(k)[i]);
    return monomial_fit(y1, y2, ys, allowed, opts.degenerate_ratio);
  };
  // m and n are coprime, so one of the reflections x1 -> ell1 - x1 or
  // x2 -> ell2 - x2 flips y1 and (m, 3n) while fixing the other modes; each
  // slaved mode therefore only sees the monomials of its own parity.
  const std::array<bool, 3> even{true, true, false};
  const std::array<bool, 3> odd{false, false, true};
  const auto f00 = fit({0, 0}, even);
  const auto f20 = fit({2 * m, 0}, even);
  const auto f13 = fit({m, 3 * n}, odd);
  const auto f04 = fit({0, 4 * n}, even);
  const auto f22 = fit({2 * m, 2 * n}, even);

  SlavingFit out;
  out.samples = rows.size();
  out.coeff_00_1 = f00[0];
  out.coeff_00_2 = f00[1];
  out.kappa1_hat = nan_mean(f22[0], 0.5 * f04[1]);
  out.kappa2_hat = nan_mean(f20[0], 0.25 * f13[2]);
  if (std::isnan(out.coeff_00_1) && std::isnan(out.coeff_00_2) && std::isnan(out.kappa1_hat) &&
      std::isnan(out.kappa2_hat)) {
    throw FitDegenerateError("no slaving coefficient is identifiable");
  }
  return out;
}

double fit_saturation(const std::vector<SaturationRun>& runs, PatternClass branch) {
  if (runs.size() < 3) throw DomainError("saturation fit needs at least 3 runs");
  double sxy = 0.0;
  double sxx = 0.0;
  for (const SaturationRun& r : runs) {
    if (!(r.sigma > 0.0)) throw DomainError("saturation runs must be supercritical");
    sxy += r.sigma * r.amplitude * r.amplitude;
    sxx += r.sigma * r.sigma;
  }
  const double slope = sxy / sxx;
  if (!(slope > 0.0)) {
    throw BranchMismatchError("amplitude does not grow with sigma on this branch");
  }
  switch (branch) {
    case PatternClass::kRoll:
    case PatternClass::kHexagon: return -1.0 / slope;
    case PatternClass::kRectangle: return -4.0 / slope;
    default: throw DomainError("saturation fit needs a roll, rectangle or hexagon branch");
  }
}

}  // namespace chemo
