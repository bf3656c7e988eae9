#pragma once

// Orbits and phase portrait of the planar amplitude system.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chemo/amplitude_reduction.hpp"

namespace chemo {

struct IntegrateOptions {
  double tolerance = 1e-10;       // absolute and relative local error
  double blowup_bound = 1e3;
  bool fixed_step = false;        // classical RK4 with step dt
  bool stop_on_capture = false;   // end early once the state sits at an equilibrium
  std::size_t max_states = 200000;  // older states are thinned beyond this
};

/// Convergence criteria for labeling a terminal point.
struct CaptureOptions {
  double radius_factor = 1e-5;      // times amplitude scale
  double velocity_threshold = 1e-8;
  std::optional<std::size_t> ignore;  // equilibrium never reported, e.g. the launch point
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec2> states;
  std::optional<std::size_t> terminal_equilibrium;  // index into the catalogue used
  bool diverged = false;
  double divergence_time = 0.0;

  const Vec2& final_state() const { return states.back(); }
};

/// Integrates the truncated field from y0 up to t_end. dt is the initial step
/// (adaptive) or the fixed step. A catalogue, when given, is used to assign the
/// terminal equilibrium.
Trajectory integrate(const ReducedCoefficients& rc, const Vec2& y0, double dt, double t_end,
                     const IntegrateOptions& opts = {},
                     const EquilibriumCatalogue* catalogue = nullptr,
                     const CaptureOptions& capture = {});

/// Index of the equilibrium that captures y, if any.
std::optional<std::size_t> captured_by(const Vec2& y, const ReducedCoefficients& rc,
                                       const EquilibriumCatalogue& catalogue,
                                       const CaptureOptions& capture = {});

/// Default horizon long enough for slow saddle passages at the given rates.
double default_horizon(const ReducedCoefficients& rc);

struct RayResult {
  double angle = 0.0;
  Vec2 start = Vec2::Zero();
  PatternClass label = PatternClass::kUnresolved;
  std::optional<std::size_t> equilibrium;
  Vec2 terminal = Vec2::Zero();
};

struct BasinSurvey {
  EquilibriumCatalogue catalogue;
  std::vector<RayResult> rays;

  std::size_t count(PatternClass c) const;
};

/// Launches n_rays starts on the circle of the given radius. Rays whose
/// direction is an axis to 1e-12 start exactly on that axis.
BasinSurvey basin_survey(const ReducedCoefficients& rc, double radius, int n_rays,
                         double t_end = 0.0);

struct Connection {
  std::size_t saddle = 0;
  std::size_t sink = 0;
  int direction = 1;  // sign of the unstable eigenvector used
};

struct AttractorDescriptor {
  std::vector<EquilibriumPoint> equilibria;  // trivial point first
  std::vector<Connection> connections;
  bool is_circle = false;
  std::vector<std::string> diagnostics;
};

/// Shoots both branches of every saddle's unstable manifold and checks that
/// the saddle-to-sink graph is one alternating cycle through all nontrivial
/// equilibria.
AttractorDescriptor attractor_graph(const ReducedCoefficients& rc, double offset = 1e-6,
                                    double t_end = 0.0);

}  // namespace chemo
