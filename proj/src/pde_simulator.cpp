#include "chemo/pde_simulator.hpp"

#include <fmt/format.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>

#include "chemo/errors.hpp"

namespace chemo {

namespace {

double phi1(double z) { return z == 0.0 ? 1.0 : std::expm1(z) / z; }

double mode_rho(std::size_t k1, std::size_t k2, const DomainGeometry& g) {
  return rho({static_cast<int>(k1), static_cast<int>(k2)}, g);
}

std::size_t padded_size(std::size_t n, int dealias_factor) {
  if (n < 4 || dealias_factor < 2) {
    throw ConfigError(0, "nonlinear terms need resolution >= 4 and dealias_factor >= 2");
  }
  return n * static_cast<std::size_t>(dealias_factor);
}

}  // namespace

SpectralField linear_rhs(const SpectralField& u, const ModelParams& p) {
  SpectralField out(u.n1(), u.n2(), u.geometry());
  for (std::size_t k1 = 0; k1 < u.n1(); ++k1) {
    for (std::size_t k2 = 0; k2 < u.n2(); ++k2) {
      out(k1, k2) = sigma(mode_rho(k1, k2, u.geometry()), p) * u(k1, k2);
    }
  }
  return out;
}

NonlinearEvaluator::NonlinearEvaluator(std::size_t n1, std::size_t n2, const DomainGeometry& g,
                                       const ModelParams& p, int dealias_factor,
                                       NonlinearForm form)
    : n1_(n1),
      n2_(n2),
      m1_(padded_size(n1, dealias_factor)),
      m2_(padded_size(n2, dealias_factor)),
      geometry_(g),
      params_(p),
      form_(form),
      padded_(padded_size(n1, dealias_factor), padded_size(n2, dealias_factor), n1, n2) {
  const std::size_t m = m1_ * m2_;
  rho_.resize(n1 * n2);
  for (std::size_t k1 = 0; k1 < n1; ++k1) {
    for (std::size_t k2 = 0; k2 < n2; ++k2) rho_[k1 * n2 + k2] = mode_rho(k1, k2, g);
  }
  for (auto* b : {&cu_, &cv_, &cd_, &gu_, &gv_, &gux_, &gvx_, &guy_, &gvy_, &glv_, &prod_}) {
    b->assign(m, 0.0);
  }
}

SpectralField NonlinearEvaluator::operator()(const SpectralField& u) const {
  return evaluate(u, nullptr);
}

SpectralField NonlinearEvaluator::operator()(const SpectralField& u,
                                             const SpectralField& v) const {
  return evaluate(u, &v);
}

SpectralField NonlinearEvaluator::evaluate(const SpectralField& u,
                                           const SpectralField* v_given) const {
  if (u.n1() != n1_ || u.n2() != n2_) throw DomainError("field size does not match evaluator");
  if (v_given != nullptr && (v_given->n1() != n1_ || v_given->n2() != n2_)) {
    throw DomainError("chemoattractant size does not match evaluator");
  }
  const double lam = params_.lambda;
  const double alpha = params_.alpha;
  const double c1 = kPi / geometry_.ell1;
  const double c2 = kPi / geometry_.ell2;

  // Only the n1 x n2 block is read by the band-limited transforms.
  for (std::size_t k1 = 0; k1 < n1_; ++k1) {
    for (std::size_t k2 = 0; k2 < n2_; ++k2) {
      const std::size_t idx = k1 * m2_ + k2;
      cu_[idx] = u(k1, k2);
      cv_[idx] = v_given != nullptr ? (*v_given)(k1, k2)
                                    : lam * u(k1, k2) / (1.0 + rho_[k1 * n2_ + k2]);
    }
  }

  padded_.inverse(cu_.data(), gu_.data());
  padded_.inverse(cv_.data(), gv_.data());

  const auto derivative = [&](const std::vector<double>& c, int axis, std::vector<double>& out) {
    for (std::size_t k1 = 0; k1 < n1_; ++k1) {
      for (std::size_t k2 = 0; k2 < n2_; ++k2) {
        const double f = axis == 1 ? -c1 * static_cast<double>(k1)
                                   : -c2 * static_cast<double>(k2);
        cd_[k1 * m2_ + k2] = f * c[k1 * m2_ + k2];
      }
    }
    if (axis == 1) {
      padded_.inverse(cd_.data(), out.data(), Parity::kSine, Parity::kCosine);
    } else {
      padded_.inverse(cd_.data(), out.data(), Parity::kCosine, Parity::kSine);
    }
  };
  derivative(cu_, 1, gux_);
  derivative(cv_, 1, gvx_);
  derivative(cu_, 2, guy_);
  derivative(cv_, 2, gvy_);

  const bool literal = v_given != nullptr || form_ == NonlinearForm::kLiteral;
  if (literal) {
    for (std::size_t k1 = 0; k1 < n1_; ++k1) {
      for (std::size_t k2 = 0; k2 < n2_; ++k2) {
        cd_[k1 * m2_ + k2] = -rho_[k1 * n2_ + k2] * cv_[k1 * m2_ + k2];
      }
    }
    padded_.inverse(cd_.data(), glv_.data());
  }

  const std::size_t m = m1_ * m2_;
  for (std::size_t i = 0; i < m; ++i) {
    const double uu = gu_[i];
    const double lap_v = literal ? glv_[i] : gv_[i] - lam * uu;
    prod_[i] = -(gux_[i] * gvx_[i] + guy_[i] * gvy_[i]) - uu * lap_v - 3.0 * alpha * uu * uu -
               alpha * uu * uu * uu;
  }
  padded_.forward(prod_.data(), cd_.data());

  SpectralField out(n1_, n2_, geometry_);
  for (std::size_t k1 = 0; k1 < n1_; ++k1) {
    for (std::size_t k2 = 0; k2 < n2_; ++k2) out(k1, k2) = cd_[k1 * m2_ + k2];
  }
  return out;
}

SpectralField nonlinear_rhs(const SpectralField& u, const ModelParams& p, int dealias_factor,
                            NonlinearForm form) {
  NonlinearEvaluator nl(u.n1(), u.n2(), u.geometry(), p, dealias_factor, form);
  return nl(u);
}

Stepper::Stepper(std::size_t n1, std::size_t n2, const DomainGeometry& g, const ModelParams& p,
                 double dt, bool nonlinear, int dealias_factor, NonlinearForm form)
    : dt_(dt),
      nonlinear_(nonlinear),
      nl_(n1, n2, g, p, dealias_factor, form) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const std::size_t m = n1 * n2;
  e_half_.resize(m);
  phi_half_.resize(m);
  e_full_.resize(m);
  phi_full_.resize(m);
  for (std::size_t k1 = 0; k1 < n1; ++k1) {
    for (std::size_t k2 = 0; k2 < n2; ++k2) {
      const double s = sigma(mode_rho(k1, k2, g), p);
      const std::size_t i = k1 * n2 + k2;
      e_half_[i] = std::exp(0.5 * s * dt);
      phi_half_[i] = 0.5 * dt * phi1(0.5 * s * dt);
      e_full_[i] = std::exp(s * dt);
      phi_full_[i] = dt * phi1(s * dt);
    }
  }
}

void Stepper::step(SpectralField& u, double t) const {
  auto c = u.data();
  if (!nonlinear_) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= e_full_[i];
  } else {
    const SpectralField n0 = nl_(u);
    SpectralField mid(u.n1(), u.n2(), u.geometry());
    auto cm = mid.data();
    auto c0 = n0.data();
    for (std::size_t i = 0; i < c.size(); ++i) cm[i] = e_half_[i] * c[i] + phi_half_[i] * c0[i];
    const SpectralField n1 = nl_(mid);
    auto c1 = n1.data();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = e_full_[i] * c[i] + phi_full_[i] * c1[i];
  }
  if (!u.all_finite()) {
    throw BlowUpError(t + dt_, fmt::format("non-finite state at t = {:.17g}", t + dt_));
  }
}

SpectralField step(const SpectralField& u, const ModelParams& p, double dt) {
  Stepper s(u.n1(), u.n2(), u.geometry(), p, dt);
  SpectralField out = u;
  s.step(out);
  return out;
}

SpectralField make_initial_field(std::size_t n1, std::size_t n2, const DomainGeometry& g,
                                 const InitialCondition& ic) {
  SpectralField u(n1, n2, g);
  if (ic.kind == InitialCondition::Kind::kModes) {
    for (const auto& [k, a] : ic.modes) {
      if (k.k1 < 0 || k.k2 < 0 || static_cast<std::size_t>(k.k1) >= n1 ||
          static_cast<std::size_t>(k.k2) >= n2) {
        throw ConfigError(0, fmt::format("initial mode ({},{}) outside resolution", k.k1, k.k2));
      }
      u(static_cast<std::size_t>(k.k1), static_cast<std::size_t>(k.k2)) += a;
    }
    return u;
  }
  std::mt19937_64 rng(ic.seed);
  std::uniform_real_distribution<double> dist(-ic.amplitude, ic.amplitude);
  const std::size_t top1 = std::min(n1, static_cast<std::size_t>(ic.max_mode) + 1);
  const std::size_t top2 = std::min(n2, static_cast<std::size_t>(ic.max_mode) + 1);
  for (std::size_t k1 = 0; k1 < top1; ++k1) {
    for (std::size_t k2 = 0; k2 < top2; ++k2) u(k1, k2) = dist(rng);
  }
  return u;
}

void SimConfig::validate() const {
  params.validate();
  geometry.validate();
  const auto pow2 = [](std::size_t n) { return n >= 32 && std::has_single_bit(n); };
  if (!pow2(n1) || !pow2(n2)) throw ConfigError(0, "resolution must be a power of two >= 32");
  if (!(dt > 0.0)) throw ConfigError(0, "dt must be positive");
  if (!(t_end > 0.0)) throw ConfigError(0, "t_end must be positive");
  if (nonlinear && dealias_factor < 2) {
    throw ConfigError(0, "dealias_factor must be >= 2 with cubic terms");
  }
  if (!(output_interval > 0.0)) throw ConfigError(0, "output_interval must be positive");
  if (critical_m < 0 || critical_n < 1) throw ConfigError(0, "invalid critical pair");
  if (initial_condition.kind == InitialCondition::Kind::kRandom &&
      !(initial_condition.amplitude >= 0.0)) {
    throw ConfigError(0, "random amplitude must be non-negative");
  }
  if (!(steady_window > 0.0) || !(steady_tolerance > 0.0)) {
    throw ConfigError(0, "steady-state window and tolerance must be positive");
  }
}

std::vector<ModeIndex> SimConfig::default_record_modes() const {
  const int m = critical_m;
  const int n = critical_n;
  return {{m, n}, {0, 2 * n}, {0, 0}, {2 * m, 0}, {m, 3 * n}, {0, 4 * n}, {2 * m, 2 * n}};
}

PatternClass pattern_fingerprint(double y1, double y2, double noise_floor) {
  const double a1 = std::abs(y1);
  const double a2 = std::abs(y2);
  if (std::max(a1, a2) <= noise_floor) return PatternClass::kTrivial;
  if (a1 <= 0.1 * a2) return PatternClass::kRoll;
  if (a2 <= 0.1 * a1) return PatternClass::kRectangle;
  const double r = y1 / y2;
  if (std::abs(r - 2.0) <= 0.25 || std::abs(r + 2.0) <= 0.25) return PatternClass::kHexagon;
  return PatternClass::kMixed;
}

namespace {

void record(Diagnostics& d, const SpectralField& u, double t) {
  d.times.push_back(t);
  d.l2_norm_series.push_back(u.l2_norm());
  for (auto& [k, series] : d.mode_series) series.push_back(u.amplitude(k));
}

void finish(Diagnostics& d, const SpectralField& u, double t, double noise_floor) {
  if (d.times.empty() || d.times.back() != t) record(d, u, t);
  d.t_final = t;
  d.final_critical = Vec2(u.amplitude({d.critical_m, d.critical_n}),
                          u.amplitude({0, 2 * d.critical_n}));
  d.final_fingerprint = pattern_fingerprint(d.final_critical(0), d.final_critical(1), noise_floor);
}

// Shared time loop; advance(u, t) performs one step.
template <typename Advance, typename State>
void run_loop(const SimConfig& cfg, Diagnostics& diag, State& state, SpectralField& u,
              Advance&& advance, std::vector<std::pair<double, GridField>>* snapshots) {
  const auto steps = static_cast<long>(std::llround(cfg.t_end / cfg.dt));
  const long out_every = std::max(1L, static_cast<long>(std::llround(cfg.output_interval / cfg.dt)));
  const long window = std::max(1L, static_cast<long>(std::llround(cfg.steady_window / cfg.dt)));
  std::vector<long> snap_steps;
  for (double ts : cfg.snapshot_times) snap_steps.push_back(std::llround(ts / cfg.dt));
  std::sort(snap_steps.begin(), snap_steps.end());
  std::size_t next_snap = 0;

  const auto maybe_snapshot = [&](long i) {
    while (snapshots != nullptr && next_snap < snap_steps.size() && snap_steps[next_snap] <= i) {
      if (snap_steps[next_snap] == i) {
        snapshots->emplace_back(static_cast<double>(i) * cfg.dt, transform_inverse(u));
      }
      ++next_snap;
    }
  };

  record(diag, u, 0.0);
  maybe_snapshot(0);
  SpectralField checkpoint = u;
  for (long i = 1; i <= steps; ++i) {
    const double t_prev = static_cast<double>(i - 1) * cfg.dt;
    try {
      advance(state, t_prev);
    } catch (const BlowUpError& e) {
      throw SimulationBlowUp(e.time(), e.what(), diag);
    }
    const double t = static_cast<double>(i) * cfg.dt;
    if (i % out_every == 0) record(diag, u, t);
    maybe_snapshot(i);
    if (cfg.stop_at_steady_state && i % window == 0) {
      SpectralField diff = u;
      diff += -1.0 * checkpoint;
      const double norm = u.l2_norm();
      const double rate = norm > 0.0 ? diff.l2_norm() / (norm * cfg.steady_window) : 0.0;
      if (norm > cfg.noise_floor && rate <= cfg.steady_tolerance) {
        diag.reached_steady_state = true;
        finish(diag, u, t, cfg.noise_floor);
        return;
      }
      checkpoint = u;
    }
  }
  finish(diag, u, static_cast<double>(steps) * cfg.dt, cfg.noise_floor);
}

Diagnostics make_diagnostics(const SimConfig& cfg) {
  Diagnostics d;
  d.critical_m = cfg.critical_m;
  d.critical_n = cfg.critical_n;
  const auto modes = cfg.record_modes.empty() ? cfg.default_record_modes() : cfg.record_modes;
  for (const ModeIndex& k : modes) d.mode_series[k];
  return d;
}

}  // namespace

SimResult simulate(const SimConfig& cfg) {
  cfg.validate();
  SimResult res;
  res.final = make_initial_field(cfg.n1, cfg.n2, cfg.geometry, cfg.initial_condition);
  res.diagnostics = make_diagnostics(cfg);
  const Stepper stepper(cfg.n1, cfg.n2, cfg.geometry, cfg.params, cfg.dt, cfg.nonlinear,
                        cfg.dealias_factor, cfg.form);
  SpectralField& u = res.final;
  run_loop(
      cfg, res.diagnostics, u, u, [&](SpectralField& s, double t) { stepper.step(s, t); },
      &res.snapshots);
  return res;
}

namespace {

std::string mode_column(const ModeIndex& k) { return fmt::format("y_{}_{}", k.k1, k.k2); }

}  // namespace

std::string format_snapshot(const GridField& g, const DomainGeometry& geometry, double t) {
  std::string out = fmt::format("# {} {} {:.17g} {:.17g} {:.17g}\n", g.n1, g.n2, geometry.ell1,
                                geometry.ell2, t);
  for (std::size_t i = 0; i < g.n1; ++i) {
    for (std::size_t j = 0; j < g.n2; ++j) {
      if (j != 0) out += ' ';
      out += fmt::format("{:.17g}", g(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_snapshot(const std::string& path, const GridField& g, const DomainGeometry& geometry,
                    double t) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << format_snapshot(g, geometry, t);
}

std::string format_mode_series(const Diagnostics& d) {
  std::string out = "t,l2_norm";
  for (const auto& [k, s] : d.mode_series) out += "," + mode_column(k);
  out += '\n';
  for (std::size_t i = 0; i < d.times.size(); ++i) {
    out += fmt::format("{:.17g},{:.17g}", d.times[i], d.l2_norm_series[i]);
    for (const auto& [k, s] : d.mode_series) out += fmt::format(",{:.17g}", s[i]);
    out += '\n';
  }
  return out;
}

void write_mode_series(const std::string& path, const Diagnostics& d) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << format_mode_series(d);
}

namespace {

// Per-mode exponential midpoint coefficients for the two-field linear block
// [[-mu rho - 2 alpha, rho], [lambda, -(1 + rho)]]. Only the u column of the
// phi blocks is kept because the nonlinearity acts on u alone.
struct BlockCoeffs {
  Eigen::Matrix2d e_half, e_full;
  Eigen::Vector2d p_half, p_full;
};

BlockCoeffs block_coeffs(double r, const ModelParams& p, double dt) {
  Eigen::Matrix2d a;
  a << -p.mu * r - 2.0 * p.alpha, r, p.lambda, -(1.0 + r);
  BlockCoeffs out;
  for (int half = 0; half < 2; ++half) {
    const double h = half == 0 ? 0.5 * dt : dt;
    Eigen::Matrix4d aug = Eigen::Matrix4d::Zero();
    aug.topLeftCorner<2, 2>() = h * a;
    aug.topRightCorner<2, 2>() = h * Eigen::Matrix2d::Identity();
    const Eigen::Matrix4d ex = aug.exp();
    const Eigen::Matrix2d e = ex.topLeftCorner<2, 2>();
    const Eigen::Vector2d phi = ex.topRightCorner<2, 2>().col(0);
    if (half == 0) {
      out.e_half = e;
      out.p_half = phi;
    } else {
      out.e_full = e;
      out.p_full = phi;
    }
  }
  return out;
}

}  // namespace

FullSimResult simulate_full_system(const SimConfig& cfg, InitialChemoattractant v0) {
  cfg.validate();
  FullSimResult res;
  res.final_u = make_initial_field(cfg.n1, cfg.n2, cfg.geometry, cfg.initial_condition);
  res.final_v = v0 == InitialChemoattractant::kQuasiStationary
                    ? helmholtz_inverse(res.final_u, cfg.params.lambda)
                    : SpectralField(cfg.n1, cfg.n2, cfg.geometry);
  res.diagnostics = make_diagnostics(cfg);

  const std::size_t m = cfg.n1 * cfg.n2;
  std::vector<BlockCoeffs> coeffs(m);
  for (std::size_t k1 = 0; k1 < cfg.n1; ++k1) {
    for (std::size_t k2 = 0; k2 < cfg.n2; ++k2) {
      coeffs[k1 * cfg.n2 + k2] = block_coeffs(mode_rho(k1, k2, cfg.geometry), cfg.params, cfg.dt);
    }
  }
  const NonlinearEvaluator nl(cfg.n1, cfg.n2, cfg.geometry, cfg.params, cfg.dealias_factor,
                              NonlinearForm::kLiteral);
  SpectralField& u = res.final_u;
  SpectralField& v = res.final_v;
  SpectralField um(cfg.n1, cfg.n2, cfg.geometry);
  SpectralField vm(cfg.n1, cfg.n2, cfg.geometry);
  SpectralField zero(cfg.n1, cfg.n2, cfg.geometry);

  const auto advance = [&](SpectralField&, double t) {
    const SpectralField n0 = cfg.nonlinear ? nl(u, v) : zero;
    for (std::size_t i = 0; i < m; ++i) {
      const BlockCoeffs& c = coeffs[i];
      const Eigen::Vector2d w(u.data()[i], v.data()[i]);
      const Eigen::Vector2d w_mid = c.e_half * w + c.p_half * n0.data()[i];
      um.data()[i] = w_mid(0);
      vm.data()[i] = w_mid(1);
    }
    const SpectralField n1 = cfg.nonlinear ? nl(um, vm) : zero;
    for (std::size_t i = 0; i < m; ++i) {
      const BlockCoeffs& c = coeffs[i];
      const Eigen::Vector2d w(u.data()[i], v.data()[i]);
      const Eigen::Vector2d w_new = c.e_full * w + c.p_full * n1.data()[i];
      u.data()[i] = w_new(0);
      v.data()[i] = w_new(1);
    }
    if (!u.all_finite() || !v.all_finite()) {
      throw BlowUpError(t + cfg.dt, fmt::format("non-finite state at t = {:.17g}", t + cfg.dt));
    }
  };
  run_loop(cfg, res.diagnostics, u, u, advance, nullptr);
  return res;
}

}  // namespace chemo
