#include "chemo/amplitude_reduction.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chemo/errors.hpp"

namespace chemo {

InteractionKernels interaction_kernels(double rho_i, double rho_j, const ModelParams& p) {
  return InteractionKernels{
      .P = -6.0 * p.alpha + p.lambda * (rho_i / (1.0 + rho_i) + rho_j / (1.0 + rho_j)),
      .Q = p.lambda * (1.0 / (1.0 + rho_i) + 1.0 / (1.0 + rho_j)),
  };
}

double quadratic_coefficient(const ModelParams& p, double rho_star) {
  return (-6.0 * p.alpha + p.lambda * rho_star / (1.0 + rho_star)) / 8.0;
}

QuadraticStrengths b_coefficients_kernel_form(const ModelParams& p, double rho_star) {
  const double r = rho_star;
  const InteractionKernels k0 = interaction_kernels(r, 0.0, p);
  const InteractionKernels k4 = interaction_kernels(r, 4.0 * r, p);
  const InteractionKernels k3 = interaction_kernels(r, 3.0 * r, p);
  return QuadraticStrengths{
      .a = k0.P,
      .b1 = 0.25 * k4.P - 0.5 * r * k4.Q,
      .b2 = 0.25 * k3.P - 0.375 * r * k3.Q,
  };
}

QuadraticStrengths b_coefficients(const ModelParams& p, double rho_star) {
  const double r = rho_star;
  const double lam = p.lambda;
  const double a = -6.0 * p.alpha + lam * r / (1.0 + r);
  const QuadraticStrengths closed{
      .a = a,
      .b1 = 0.25 * (a - 6.0 * lam * r * r / ((1.0 + r) * (1.0 + 4.0 * r))),
      .b2 = 0.25 * (a - 3.0 * lam * r * r / ((1.0 + r) * (1.0 + 3.0 * r))),
  };
  // First printed forms.
  const double b1_first = 0.25 * (-6.0 * p.alpha + lam * r * (2.0 / (1.0 + 4.0 * r) - 1.0 / (1.0 + r)));
  const double b2_first =
      0.25 * (-6.0 * p.alpha + 0.5 * lam * r * (3.0 / (1.0 + 3.0 * r) - 1.0 / (1.0 + r)));
  const double tol = 1e-12 * (1.0 + std::abs(p.alpha) + std::abs(lam));
  if (std::abs(b1_first - closed.b1) > tol || std::abs(b2_first - closed.b2) > tol) {
    throw std::logic_error("b coefficient forms disagree");
  }
  return closed;
}

SlavingGains kappa_coefficients(const ModelParams& p, const DomainGeometry& g, int m, int n) {
  const double r = rho({m, n}, g);
  const double s22 = sigma({2 * m, 2 * n}, p, g);
  const double s20 = sigma({2 * m, 0}, p, g);
  if (s22 == 0.0 || s20 == 0.0) {
    throw ResonanceError("slaved mode (2m,2n) or (2m,0) is neutral; reduction invalid");
  }
  return SlavingGains{
      .kappa1 = -(-6.0 * p.alpha + 4.0 * p.lambda * r / (r + 1.0)) / (8.0 * s22),
      .kappa2 = -(-6.0 * p.alpha + 3.0 * p.lambda * r / (r + 1.0)) / (8.0 * s20),
  };
}

double ReducedCoefficients::scale() const {
  return std::max({std::abs(sigma1), std::abs(sigma2), std::abs(frak_a), std::abs(frak_b1),
                   std::abs(frak_b2)});
}

ReducedCoefficients with_convention(ReducedCoefficients rc, CoefficientConvention convention) {
  rc.convention = convention;
  if (convention == CoefficientConvention::kFormula) {
    rc.frak_b1 = rc.formula_b1;
    rc.frak_b2 = rc.formula_b2;
  } else {
    rc.frak_b1 = rc.paper_b1;
    rc.frak_b2 = rc.paper_b2;
  }
  return rc;
}

ReducedCoefficients cubic_coefficients(const ModelParams& p, const DomainGeometry& g, int m,
                                       int n, CoefficientConvention convention) {
  p.validate();
  g.validate();
  ReducedCoefficients rc;
  rc.m = m;
  rc.n = n;
  rc.rho_star = rho({m, n}, g);
  rc.sigma1 = sigma({m, n}, p, g);
  rc.sigma2 = sigma({0, 2 * n}, p, g);
  rc.frak_a = quadratic_coefficient(p, rc.rho_star);
  const QuadraticStrengths q = b_coefficients(p, rc.rho_star);
  rc.a = q.a;
  rc.b1 = q.b1;
  rc.b2 = q.b2;
  const SlavingGains k = kappa_coefficients(p, g, m, n);
  rc.kappa1 = k.kappa1;
  rc.kappa2 = k.kappa2;
  rc.formula_b1 = 4.0 * rc.b1 * rc.kappa1 - 0.75 * rc.a - 0.75 * p.alpha;
  rc.formula_b2 = 4.0 * rc.b2 * rc.kappa2 - 0.375 * rc.a - 0.75 * p.alpha;
  rc.paper_b1 = -21.0 * p.mu / 80.0;
  rc.paper_b2 = -57.0 * p.mu / 128.0;
  return with_convention(rc, convention);
}

std::map<ModeIndex, double> slaved_modes(double y1, double y2, const ReducedCoefficients& rc) {
  const int m = rc.m;
  const int n = rc.n;
  return {
      {{0, 0}, -0.375 * y1 * y1 - 0.75 * y2 * y2},
      {{2 * m, 0}, rc.kappa2 * y1 * y1},
      {{m, 3 * n}, 4.0 * rc.kappa2 * y1 * y2},
      {{0, 4 * n}, 2.0 * rc.kappa1 * y2 * y2},
      {{2 * m, 2 * n}, rc.kappa1 * y1 * y1},
  };
}

Vec2 reduced_vector_field(const Vec2& y, const ReducedCoefficients& rc) {
  const double y1 = y(0);
  const double y2 = y(1);
  const double c = 0.25 * (rc.frak_b1 + 2.0 * rc.frak_b2);
  double f1 = rc.sigma1 * y1 + c * y1 * y1 * y1 + 2.0 * rc.frak_b2 * y1 * y2 * y2;
  double f2 = rc.sigma2 * y2 + rc.frak_b1 * y2 * y2 * y2 + rc.frak_b2 * y2 * y1 * y1;
  if (rc.placement == QuadraticPlacement::kProjected) {
    f1 += 4.0 * rc.frak_a * y1 * y2;
    f2 += rc.frak_a * y1 * y1;
  } else {
    f1 += 4.0 * rc.frak_a * y1 * y1;
    f2 += rc.frak_a * y1 * y2;
  }
  return {f1, f2};
}

Mat2 reduced_jacobian(const Vec2& y, const ReducedCoefficients& rc) {
  const double y1 = y(0);
  const double y2 = y(1);
  const double c = 0.25 * (rc.frak_b1 + 2.0 * rc.frak_b2);
  const double A = rc.frak_a;
  Mat2 J;
  if (rc.placement == QuadraticPlacement::kProjected) {
    J(0, 0) = rc.sigma1 + 4.0 * A * y2 + 3.0 * c * y1 * y1 + 2.0 * rc.frak_b2 * y2 * y2;
    J(0, 1) = 4.0 * A * y1 + 4.0 * rc.frak_b2 * y1 * y2;
    J(1, 0) = 2.0 * A * y1 + 2.0 * rc.frak_b2 * y1 * y2;
    J(1, 1) = rc.sigma2 + 3.0 * rc.frak_b1 * y2 * y2 + rc.frak_b2 * y1 * y1;
  } else {
    J(0, 0) = rc.sigma1 + 8.0 * A * y1 + 3.0 * c * y1 * y1 + 2.0 * rc.frak_b2 * y2 * y2;
    J(0, 1) = 4.0 * rc.frak_b2 * y1 * y2;
    J(1, 0) = A * y2 + 2.0 * rc.frak_b2 * y1 * y2;
    J(1, 1) = rc.sigma2 + A * y1 + 3.0 * rc.frak_b1 * y2 * y2 + rc.frak_b2 * y1 * y1;
  }
  return J;
}

std::string to_string(PatternClass c) {
  switch (c) {
    case PatternClass::kTrivial: return "trivial";
    case PatternClass::kRoll: return "roll";
    case PatternClass::kRectangle: return "rectangle";
    case PatternClass::kHexagon: return "hexagon";
    case PatternClass::kMixed: return "mixed";
    case PatternClass::kUnresolved: return "unresolved";
  }
  return "unresolved";
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::kStableNode: return "stable-node";
    case Stability::kSaddle: return "saddle";
    case Stability::kUnstable: return "unstable";
  }
  return "unstable";
}

std::string to_string(TransitionVerdict v) {
  return v == TransitionVerdict::kTypeI ? "Type-I" : "not-classified";
}

PatternClass equilibrium_pattern(const Vec2& y, double amplitude_scale) {
  const double tol = 1e-6 * amplitude_scale;
  const double y1 = y(0);
  const double y2 = y(1);
  if (std::max(std::abs(y1), std::abs(y2)) <= tol) return PatternClass::kTrivial;
  if (std::abs(y1) <= tol) return PatternClass::kRoll;
  if (std::abs(y2) <= tol) return PatternClass::kRectangle;
  if (std::abs(std::abs(y1) - 2.0 * std::abs(y2)) <= tol) return PatternClass::kHexagon;
  return PatternClass::kMixed;
}

double amplitude_scale(const ReducedCoefficients& rc) {
  const double s = std::max(std::abs(rc.sigma1), std::abs(rc.sigma2));
  const double b = std::min({std::abs(rc.frak_b1), 0.25 * std::abs(rc.frak_b1 + 2.0 * rc.frak_b2),
                             std::abs(rc.frak_b1 + 4.0 * rc.frak_b2)});
  if (!(b > 0.0) || !(s > 0.0)) return 1e-8;
  return std::max(std::sqrt(s / b), 1e-8);
}

namespace {

double residual_scale(const Vec2& y, const ReducedCoefficients& rc) {
  const double r = y.norm();
  const double s = std::max(std::abs(rc.sigma1), std::abs(rc.sigma2));
  const double b = std::max(std::abs(rc.frak_b1), std::abs(rc.frak_b2));
  return s * r + 8.0 * std::abs(rc.frak_a) * r * r + 4.0 * b * r * r * r;
}

}  // namespace

EquilibriumPoint classify_equilibrium(const Vec2& e, const ReducedCoefficients& rc) {
  EquilibriumPoint out;
  out.y = e;
  out.pattern = equilibrium_pattern(e, amplitude_scale(rc));
  out.residual = reduced_vector_field(e, rc).norm();
  const Mat2 J = reduced_jacobian(e, rc);
  out.trace = J.trace();
  out.det = J.determinant();
  const double disc = out.trace * out.trace - 4.0 * out.det;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    const double l1 = 0.5 * (out.trace + std::copysign(root, out.trace));
    const double l2 = l1 != 0.0 ? out.det / l1 : 0.0;
    out.eigen_re[0] = std::min(l1, l2);
    out.eigen_re[1] = std::max(l1, l2);
    out.eigen_im = 0.0;
  } else {
    out.eigen_re[0] = out.eigen_re[1] = 0.5 * out.trace;
    out.eigen_im = 0.5 * std::sqrt(-disc);
  }
  const double tol = kMarginalTolerance * std::max(rc.scale(), 1e-300);
  out.marginal = std::abs(out.eigen_re[0]) <= tol || std::abs(out.eigen_re[1]) <= tol;
  if (out.eigen_re[1] < 0.0) {
    out.stability = Stability::kStableNode;
  } else if (out.eigen_re[0] < 0.0 && out.eigen_re[1] > 0.0) {
    out.stability = Stability::kSaddle;
  } else {
    out.stability = Stability::kUnstable;
  }
  return out;
}

int analytic_det_sign(PatternClass c, const ReducedCoefficients& rc) {
  const double d = rc.b1_minus_2b2();
  const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
  switch (c) {
    case PatternClass::kRoll:
    case PatternClass::kRectangle: return s;
    case PatternClass::kHexagon: return -s;
    default: return 0;
  }
}

std::size_t EquilibriumCatalogue::count(PatternClass c) const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [c](const auto& e) { return e.pattern == c; }));
}

std::vector<Vec2> closed_form_equilibria(const ReducedCoefficients& rc) {
  std::vector<Vec2> out{Vec2::Zero()};
  const double roll_sq = -rc.sigma2 / rc.frak_b1;
  if (roll_sq > 0.0) {
    const double s = std::sqrt(roll_sq);
    out.emplace_back(0.0, s);
    out.emplace_back(0.0, -s);
  }
  const double rect_sq = -4.0 * rc.sigma1 / (rc.frak_b1 + 2.0 * rc.frak_b2);
  if (rect_sq > 0.0) {
    const double r = std::sqrt(rect_sq);
    out.emplace_back(r, 0.0);
    out.emplace_back(-r, 0.0);
  }
  const double hex_sq = -rc.sigma1 / (rc.frak_b1 + 4.0 * rc.frak_b2);
  if (hex_sq > 0.0) {
    const double t = std::sqrt(hex_sq);
    out.emplace_back(2.0 * t, t);
    out.emplace_back(-2.0 * t, t);
    out.emplace_back(-2.0 * t, -t);
    out.emplace_back(2.0 * t, -t);
  }
  return out;
}

namespace {

struct NewtonResult {
  Vec2 y = Vec2::Zero();
  bool converged = false;
  std::string failure;
};

NewtonResult damped_newton(Vec2 y, const ReducedCoefficients& rc, int max_iter, double scale) {
  NewtonResult out;
  Vec2 f = reduced_vector_field(y, rc);
  for (int it = 0; it < max_iter; ++it) {
    const Mat2 J = reduced_jacobian(y, rc);
    Eigen::FullPivLU<Mat2> lu(J);
    if (!lu.isInvertible()) {
      out.failure = "singular Jacobian";
      out.y = y;
      return out;
    }
    const Vec2 step = lu.solve(-f);
    double t = 1.0;
    Vec2 trial = y + step;
    Vec2 ft = reduced_vector_field(trial, rc);
    for (int k = 0; k < 40 && ft.norm() > f.norm() && t > 1e-12; ++k) {
      t *= 0.5;
      trial = y + t * step;
      ft = reduced_vector_field(trial, rc);
    }
    y = trial;
    f = ft;
    if (!y.allFinite() || y.norm() > 1e6 * scale) {
      out.failure = "diverged";
      out.y = y;
      return out;
    }
    if ((t * step).norm() <= 1e-15 * (scale + y.norm())) {
      out.converged = true;
      out.y = y;
      return out;
    }
  }
  out.y = y;
  out.converged = f.norm() <= 1e-13 * std::max(rc.scale(), 1e-300) * (1.0 + y.norm());
  if (!out.converged) out.failure = "iteration limit";
  return out;
}

}  // namespace

EquilibriumCatalogue numeric_equilibria(const ReducedCoefficients& rc,
                                        const EquilibriumOptions& opts) {
  EquilibriumCatalogue cat;
  const double A = amplitude_scale(rc);

  std::vector<Vec2> seeds{Vec2::Zero()};
  ReducedCoefficients guess = rc;
  guess.frak_a = 0.0;
  guess.sigma1 = guess.sigma2 = 0.5 * (rc.sigma1 + rc.sigma2);
  for (const Vec2& c : closed_form_equilibria(guess)) {
    if (c.norm() == 0.0) continue;
    for (const Vec2& d : {Vec2(1.05, 1.0), Vec2(0.95, 1.0), Vec2(1.0, 1.05), Vec2(1.0, 0.95)}) {
      Vec2 s = c.cwiseProduct(d);
      // Nudge off invariant axes so every seed explores both components.
      if (s(0) == 0.0) s(0) = 0.05 * A;
      if (s(1) == 0.0) s(1) = 0.05 * A;
      seeds.push_back(s);
    }
    seeds.push_back(c);
  }
  const int g = opts.grid_seeds_per_axis;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const double u = -1.5 + 3.0 * (i + 0.5) / g;
      const double v = -1.5 + 3.0 * (j + 0.5) / g;
      seeds.emplace_back(u * A, v * A);
    }
  }

  std::vector<Vec2> roots;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    NewtonResult r = damped_newton(seeds[s], rc, opts.newton_max_iterations, A);
    if (!r.converged) {
      cat.seed_failures.push_back("seed " + std::to_string(s) + ": " + r.failure);
      continue;
    }
    Vec2 y = r.y;
    // Snap round-off residue onto exact invariant axes when the snapped point is still a root.
    for (int c = 0; c < 2; ++c) {
      if (std::abs(y(c)) <= 1e-12 * A && y(c) != 0.0) {
        Vec2 snapped = y;
        snapped(c) = 0.0;
        if (reduced_vector_field(snapped, rc).norm() <=
            reduced_vector_field(y, rc).norm() + 1e-15 * rc.scale()) {
          y = snapped;
        }
      }
    }
    const double res = reduced_vector_field(y, rc).norm();
    if (res > opts.residual_tolerance * std::max(residual_scale(y, rc), 1e-300) && res > 0.0) {
      cat.seed_failures.push_back("seed " + std::to_string(s) + ": residual check failed");
      continue;
    }
    const bool duplicate = std::any_of(roots.begin(), roots.end(), [&](const Vec2& q) {
      return (q - y).norm() <= opts.dedup_radius * A;
    });
    if (!duplicate) roots.push_back(y);
  }

  std::sort(roots.begin(), roots.end(), [](const Vec2& p, const Vec2& q) {
    const double ap = std::atan2(p(1), p(0));
    const double aq = std::atan2(q(1), q(0));
    if (p.norm() == 0.0) return q.norm() != 0.0;
    if (q.norm() == 0.0) return false;
    return ap < aq;
  });
  for (const Vec2& y : roots) cat.points.push_back(classify_equilibrium(y, rc));
  if (cat.points.empty() || cat.points.front().y.norm() != 0.0) {
    cat.points.insert(cat.points.begin(), classify_equilibrium(Vec2::Zero(), rc));
  }
  return cat;
}

EquilibriumCatalogue equilibria(const ReducedCoefficients& rc, const EquilibriumOptions& opts) {
  const double tol = opts.zero_a_tolerance * std::max(rc.scale(), 1.0);
  const bool degenerate_a = std::abs(rc.frak_a) <= tol;
  const bool equal_rates =
      std::abs(rc.sigma1 - rc.sigma2) <= 1e-12 * std::max(1.0, std::abs(rc.sigma1));
  if (degenerate_a && equal_rates) {
    EquilibriumCatalogue cat;
    cat.closed_form = true;
    ReducedCoefficients exact = rc;
    exact.frak_a = 0.0;
    for (const Vec2& y : closed_form_equilibria(exact)) {
      cat.points.push_back(classify_equilibrium(y, rc));
    }
    return cat;
  }
  EquilibriumCatalogue cat = numeric_equilibria(rc, opts);
  // Under the projected placement y2 = 0 is not invariant once a != 0.
  if (!degenerate_a && rc.placement == QuadraticPlacement::kProjected) {
    for (const auto& e : cat.points) {
      if (e.pattern == PatternClass::kRectangle) {
        throw std::runtime_error(
            "pure rectangle equilibrium found with nonzero quadratic coefficient");
      }
    }
  }
  return cat;
}

TransitionVerdict transition_type(const ReducedCoefficients& rc, const TransitionOptions& opts) {
  const double b1 = rc.frak_b1;
  const double b2 = rc.frak_b2;
  if (!(b1 < 0.0 && b1 + 2.0 * b2 < 0.0 && b1 + 4.0 * b2 < 0.0)) {
    return TransitionVerdict::kNotClassified;
  }
  const double s = std::max({rc.sigma1, rc.sigma2, 0.0});
  const double threshold = opts.small_a_factor * std::sqrt(std::abs(b1) * s);
  return std::abs(rc.frak_a) <= threshold ? TransitionVerdict::kTypeI
                                          : TransitionVerdict::kNotClassified;
}

InnerProductTable inner_product_table(double rho_star) {
  const double r = rho_star;
  return InnerProductTable{
      .e_mn_e_2m0__e_mn = 1.0 / 8.0,
      .e_mn_e_m3n__e_02n = 1.0 / 8.0,
      .e_02n_e_m3n__e_mn = 1.0 / 8.0,
      .grad_mn_grad_2m0__e_mn = 3.0 * r / 16.0,
      .grad_mn_grad_m3n__e_02n = 3.0 * r / 16.0,
      .grad_02n_grad_m3n__e_mn = 3.0 * r / 16.0,
      .e_02n_e_04n__e_02n = 1.0 / 4.0,
      .e_mn_e_2m2n__e_mn = 1.0 / 16.0,
      .grad_02n_grad_04n__e_02n = r / 2.0,
      .grad_mn_grad_2m2n__e_mn = r / 8.0,
      .e_mn_e_00__e_mn = 1.0 / 4.0,
  };
}

}  // namespace chemo
