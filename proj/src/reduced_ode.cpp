#include "chemo/reduced_ode.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <fmt/format.h>
#include <stdexcept>

#include "chemo/errors.hpp"

namespace chemo {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::array<double, 2>;

Vec2 to_vec(const State& s) { return {s[0], s[1]}; }

void thin(Trajectory& tr) {
  std::vector<double> t;
  std::vector<Vec2> s;
  t.reserve(tr.times.size() / 2 + 1);
  s.reserve(tr.times.size() / 2 + 1);
  for (std::size_t i = 0; i < tr.times.size(); i += 2) {
    t.push_back(tr.times[i]);
    s.push_back(tr.states[i]);
  }
  if (t.back() != tr.times.back()) {
    t.push_back(tr.times.back());
    s.push_back(tr.states.back());
  }
  tr.times = std::move(t);
  tr.states = std::move(s);
}

}  // namespace

std::optional<std::size_t> captured_by(const Vec2& y, const ReducedCoefficients& rc,
                                       const EquilibriumCatalogue& catalogue,
                                       const CaptureOptions& capture) {
  const double radius = capture.radius_factor * amplitude_scale(rc);
  if (reduced_vector_field(y, rc).norm() > capture.velocity_threshold) return std::nullopt;
  std::optional<std::size_t> best;
  double best_d = radius;
  for (std::size_t i = 0; i < catalogue.points.size(); ++i) {
    if (capture.ignore == i) continue;
    const double d = (catalogue.points[i].y - y).norm();
    if (d <= best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

double default_horizon(const ReducedCoefficients& rc) {
  const double s = std::max({std::abs(rc.sigma1), std::abs(rc.sigma2), 1e-4});
  return std::min(200.0 / s, 1e6);
}

Trajectory integrate(const ReducedCoefficients& rc, const Vec2& y0, double dt, double t_end,
                     const IntegrateOptions& opts, const EquilibriumCatalogue* catalogue,
                     const CaptureOptions& capture) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (!(t_end > 0.0)) throw DomainError("t_end must be positive");
  if (!y0.allFinite()) throw DomainError("initial state must be finite");

  const auto rhs = [&rc](const State& x, State& dxdt, double) {
    const Vec2 f = reduced_vector_field(to_vec(x), rc);
    dxdt[0] = f(0);
    dxdt[1] = f(1);
  };

  Trajectory tr;
  State x{y0(0), y0(1)};
  double t = 0.0;
  tr.times.push_back(t);
  tr.states.push_back(y0);

  const auto accept = [&](double t_now) -> bool {
    const Vec2 y = to_vec(x);
    if (!y.allFinite() || y.norm() > opts.blowup_bound) {
      tr.diverged = true;
      tr.divergence_time = t_now;
      tr.times.push_back(t_now);
      tr.states.push_back(y);
      return false;
    }
    tr.times.push_back(t_now);
    tr.states.push_back(y);
    if (tr.states.size() > opts.max_states) thin(tr);
    if (opts.stop_on_capture && catalogue != nullptr &&
        captured_by(y, rc, *catalogue, capture).has_value()) {
      return false;
    }
    return true;
  };

  if (opts.fixed_step) {
    odeint::runge_kutta4<State> stepper;
    const auto steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
    for (long i = 1; i <= steps; ++i) {
      const double h = std::min(dt, t_end - t);
      stepper.do_step(rhs, x, t, h);
      t = i == steps ? t_end : t + h;
      if (!accept(t)) break;
    }
  } else {
    auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(opts.tolerance,
                                                                             opts.tolerance);
    double h = dt;
    while (t < t_end) {
      if (t + h > t_end) h = t_end - t;
      const double t_before = t;
      const auto result = stepper.try_step(rhs, x, t, h);
      if (result == odeint::fail) {
        if (h < 1e-14 * std::max(1.0, t)) {
          tr.diverged = true;
          tr.divergence_time = t;
          break;
        }
        continue;
      }
      if (t == t_before) break;
      if (!accept(t)) break;
    }
  }

  if (catalogue != nullptr && !tr.diverged) {
    tr.terminal_equilibrium = captured_by(tr.final_state(), rc, *catalogue, capture);
  }
  return tr;
}

std::size_t BasinSurvey::count(PatternClass c) const {
  return static_cast<std::size_t>(
      std::count_if(rays.begin(), rays.end(), [c](const RayResult& r) { return r.label == c; }));
}

BasinSurvey basin_survey(const ReducedCoefficients& rc, double radius, int n_rays,
                         double t_end) {
  if (!(radius > 0.0)) throw DomainError("radius must be positive");
  if (n_rays < 1) throw DomainError("n_rays must be positive");
  BasinSurvey out;
  out.catalogue = equilibria(rc);
  const double horizon = t_end > 0.0 ? t_end : default_horizon(rc);
  IntegrateOptions opts;
  opts.stop_on_capture = true;
  for (int i = 0; i < n_rays; ++i) {
    const double angle = 2.0 * kPi * i / n_rays;
    double c = std::cos(angle);
    double s = std::sin(angle);
    if (std::abs(c) <= 1e-12) c = 0.0;
    if (std::abs(s) <= 1e-12) s = 0.0;
    RayResult ray;
    ray.angle = angle;
    ray.start = Vec2(radius * c, radius * s);
    const Trajectory tr = integrate(rc, ray.start, 1e-2, horizon, opts, &out.catalogue);
    ray.terminal = tr.final_state();
    if (tr.terminal_equilibrium) {
      ray.equilibrium = tr.terminal_equilibrium;
      ray.label = out.catalogue.points[*tr.terminal_equilibrium].pattern;
    }
    out.rays.push_back(ray);
  }
  return out;
}

AttractorDescriptor attractor_graph(const ReducedCoefficients& rc, double offset, double t_end) {
  AttractorDescriptor out;
  const EquilibriumCatalogue cat = equilibria(rc);
  out.equilibria = cat.points;
  const double horizon = t_end > 0.0 ? t_end : default_horizon(rc);
  const double A = amplitude_scale(rc);
  IntegrateOptions opts;
  opts.stop_on_capture = true;

  std::vector<std::size_t> saddles;
  std::vector<std::size_t> sinks;
  for (std::size_t i = 1; i < cat.points.size(); ++i) {
    const auto& e = cat.points[i];
    if (e.marginal) {
      out.diagnostics.push_back(fmt::format("equilibrium {} is marginal", i));
    }
    if (e.stability == Stability::kSaddle) saddles.push_back(i);
    if (e.stability == Stability::kStableNode) sinks.push_back(i);
  }

  for (std::size_t si : saddles) {
    const auto& e = cat.points[si];
    Eigen::EigenSolver<Mat2> es(reduced_jacobian(e.y, rc));
    int k = es.eigenvalues()(0).real() > es.eigenvalues()(1).real() ? 0 : 1;
    Vec2 v = es.eigenvectors().col(k).real();
    v.normalize();
    for (int dir : {1, -1}) {
      const Vec2 start = e.y + dir * offset * A * v;
      CaptureOptions capture;
      capture.ignore = si;
      const Trajectory tr = integrate(rc, start, 1e-2, horizon, opts, &cat, capture);
      if (!tr.terminal_equilibrium) {
        out.diagnostics.push_back(
            fmt::format("saddle {} branch {:+d}: unresolved (final ({:.6g}, {:.6g}))", si, dir,
                        tr.final_state()(0), tr.final_state()(1)));
        continue;
      }
      const std::size_t target = *tr.terminal_equilibrium;
      if (cat.points[target].stability != Stability::kStableNode) {
        out.diagnostics.push_back(
            fmt::format("saddle {} branch {:+d}: reached non-sink {}", si, dir, target));
        continue;
      }
      out.connections.push_back({si, target, dir});
    }
  }

  // Single alternating cycle: every saddle has two distinct sink targets,
  // every sink is hit by exactly two saddles, and the graph is connected.
  const std::size_t n_nontrivial = cat.points.size() - 1;
  bool ok = n_nontrivial >= 2 && saddles.size() + sinks.size() == n_nontrivial &&
            saddles.size() == sinks.size() && out.connections.size() == 2 * saddles.size();
  if (!ok) out.diagnostics.push_back("equilibria or connections do not form a ring");
  std::vector<std::vector<std::size_t>> adj(cat.points.size());
  for (const Connection& c : out.connections) {
    adj[c.saddle].push_back(c.sink);
    adj[c.sink].push_back(c.saddle);
  }
  if (ok) {
    for (std::size_t i = 1; i < cat.points.size(); ++i) {
      if (adj[i].size() != 2 || adj[i][0] == adj[i][1]) {
        out.diagnostics.push_back(fmt::format("equilibrium {} has ring degree {}", i,
                                              adj[i].size()));
        ok = false;
      }
    }
  }
  if (ok) {
    std::size_t prev = 0;
    std::size_t cur = 1;
    std::size_t visited = 0;
    do {
      const std::size_t next = adj[cur][0] != prev ? adj[cur][0] : adj[cur][1];
      prev = cur;
      cur = next;
      ++visited;
    } while (cur != 1 && visited <= n_nontrivial);
    if (visited != n_nontrivial) {
      out.diagnostics.push_back("connection graph splits into several cycles");
      ok = false;
    }
  }
  out.is_circle = ok;
  return out;
}

}  // namespace chemo
