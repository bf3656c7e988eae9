#pragma once

// Estimates of reduction coefficients from simulated trajectories.

#include <vector>

#include "chemo/pde_simulator.hpp"

namespace chemo {

struct SlavingFitOptions {
  double t_min = 0.0;            // samples before this time are ignored
  double amplitude_floor = 1e-3;  // samples with max(|y1|, |y2|) below this are ignored
  double degenerate_ratio = 1e-6;  // column scale and QR rank threshold, relative to the largest
};

/// Slaved-mode coefficients; NaN where the trajectory carries no information.
struct SlavingFit {
  double coeff_00_1 = 0.0;  // (0,0) against y1^2
  double coeff_00_2 = 0.0;  // (0,0) against y2^2
  double kappa1_hat = 0.0;
  double kappa2_hat = 0.0;
  std::size_t samples = 0;
};

/// Least squares of each slaved amplitude against y1^2, y2^2, y1 y2, with rows
/// scaled by 1 / (y1^2 + y2^2). kappa1_hat averages the (2m,2n) and (0,4n)/2
/// estimates; kappa2_hat averages the (2m,0) and (m,3n)/4 estimates.
/// Throws FitDegenerateError when nothing can be estimated.
SlavingFit fit_slaving(const Diagnostics& d, const SlavingFitOptions& opts = {});

struct SaturationRun {
  double sigma = 0.0;
  double amplitude = 0.0;  // |y2| on the roll and hexagon branches, |y1| on the rectangle branch
};

/// Regression of amplitude^2 on sigma through the origin. Returns b1 for the
/// roll branch, b1 + 4 b2 for the hexagon branch and b1 + 2 b2 for the
/// rectangle branch. Throws DomainError for fewer than 3 runs and
/// BranchMismatchError when the fitted slope is not positive.
double fit_saturation(const std::vector<SaturationRun>& runs, PatternClass branch);

}  // namespace chemo
