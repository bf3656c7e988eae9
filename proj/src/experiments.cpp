#include "chemo/experiments.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "chemo/errors.hpp"
#include "chemo/reduced_ode.hpp"
#include "json.hpp"

namespace chemo {

namespace {

using json = nlohmann::ordered_json;

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string modes_string(const std::vector<ModeIndex>& modes) {
  std::string out;
  for (const ModeIndex& k : modes) {
    if (!out.empty()) out += ";";
    out += fmt::format("({} {})", k.k1, k.k2);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

ReducedCoefficients with_placement(ReducedCoefficients rc, QuadraticPlacement placement) {
  rc.placement = placement;
  return rc;
}

json coefficients_json(const ReducedCoefficients& rc) {
  json j;
  j["m"] = rc.m;
  j["n"] = rc.n;
  j["rho_star"] = rc.rho_star;
  j["sigma1"] = rc.sigma1;
  j["sigma2"] = rc.sigma2;
  j["a"] = rc.frak_a;
  j["convention"] = to_string(rc.convention);
  j["b1"] = rc.frak_b1;
  j["b2"] = rc.frak_b2;
  j["formula_b1"] = rc.formula_b1;
  j["formula_b2"] = rc.formula_b2;
  j["paper_b1"] = rc.paper_b1;
  j["paper_b2"] = rc.paper_b2;
  j["strength_a"] = rc.a;
  j["strength_b1"] = rc.b1;
  j["strength_b2"] = rc.b2;
  j["kappa1"] = rc.kappa1;
  j["kappa2"] = rc.kappa2;
  j["placement"] = rc.placement == QuadraticPlacement::kProjected ? "projected" : "as-printed";
  return j;
}

json equilibria_json(const std::vector<EquilibriumPoint>& points) {
  json arr = json::array();
  for (const EquilibriumPoint& e : points) {
    json p;
    p["y1"] = e.y(0);
    p["y2"] = e.y(1);
    p["pattern"] = to_string(e.pattern);
    p["stability"] = to_string(e.stability);
    p["eigen_re"] = {e.eigen_re[0], e.eigen_re[1]};
    p["eigen_im"] = e.eigen_im;
    p["det"] = e.det;
    p["trace"] = e.trace;
    p["marginal"] = e.marginal;
    arr.push_back(std::move(p));
  }
  return arr;
}

bool is_stable(const EquilibriumPoint& e) { return e.stability == Stability::kStableNode; }

// Distance to the nearest catalogue point of the given class, relative to its norm.
std::optional<double> amplitude_deviation(const Vec2& y, PatternClass c,
                                          const EquilibriumCatalogue& cat) {
  std::optional<double> best;
  for (const EquilibriumPoint& e : cat.points) {
    if (e.pattern != c || e.y.norm() == 0.0) continue;
    const double d = (e.y - y).norm() / e.y.norm();
    if (!best || d < *best) best = d;
  }
  return best;
}

SimConfig seeded_run(const ExperimentConfig& cfg, const ModelParams& p, const DomainGeometry& g,
                     std::size_t grid, double t_end, std::uint64_t seed) {
  SimConfig s = cfg.simulation;
  s.params = p;
  s.geometry = g;
  s.n1 = s.n2 = grid;
  s.t_end = t_end;
  s.critical_m = cfg.geometry.m;
  s.critical_n = cfg.geometry.n;
  s.initial_condition.kind = InitialCondition::Kind::kRandom;
  s.initial_condition.seed = seed;
  s.stop_at_steady_state = true;
  s.snapshot_times.clear();
  return s;
}

void add_arbitration(VerificationReport& rep, const std::string& name, const Arbitration& a,
                     double tolerance, bool require_separation) {
  const bool separated = a.separation > 0.3;
  std::string observed = "none";
  if (a.winner) observed = to_string(*a.winner);
  const std::string note = fmt::format(
      "estimate {:.6g}; paper {:.6g} (error {:.1f}%), formula {:.6g} (error {:.1f}%); "
      "candidates differ by {:.1f}%",
      a.estimate, a.paper_value, 100.0 * a.paper_error, a.formula_value,
      100.0 * a.formula_error, 100.0 * a.separation);
  const bool pass = a.winner.has_value() && (!require_separation || separated);
  auto& c = rep.add_bool(name, "exactly one candidate within tolerance", observed, pass, note);
  c.tolerance = tolerance;
  c.relative = true;
  c.observed_value = a.estimate;
}

}  // namespace

ReducedCoefficients frozen_coefficients(const ModelParams& p, const DomainGeometry& g, int m,
                                        int n, CoefficientConvention convention) {
  ModelParams pc = p;
  pc.lambda = lambda_critical(p, g).lambda_c;
  ReducedCoefficients rc = cubic_coefficients(pc, g, m, n, convention);
  rc.sigma1 = sigma(ModeIndex{m, n}, p, g);
  rc.sigma2 = sigma(ModeIndex{0, 2 * n}, p, g);
  return rc;
}

double lambda_for_sigma(double s, const ModelParams& p, double rho_k) {
  return (s + p.mu * rho_k + 2.0 * p.alpha) * (1.0 + rho_k) / rho_k;
}

SaturationStudy saturation_study(const ModelParams& base, const DomainGeometry& g, int m, int n,
                                 PatternClass branch, const std::vector<double>& sigmas,
                                 std::size_t grid, double t_end) {
  if (branch != PatternClass::kRoll && branch != PatternClass::kHexagon) {
    throw DomainError("saturation study runs on the roll or hexagon branch");
  }
  SaturationStudy out;
  out.branch = branch;
  for (double s : sigmas) {
    SimConfig cfg;
    cfg.params = base;
    cfg.params.lambda = lambda_for_sigma(s, base, rho(ModeIndex{m, n}, g));
    cfg.geometry = g;
    cfg.n1 = cfg.n2 = grid;
    cfg.t_end = t_end;
    cfg.critical_m = m;
    cfg.critical_n = n;
    cfg.stop_at_steady_state = true;
    cfg.initial_condition.kind = InitialCondition::Kind::kModes;
    if (branch == PatternClass::kRoll) {
      cfg.initial_condition.modes = {{{0, 2 * n}, 1e-2}};
    } else {
      cfg.initial_condition.modes = {{{m, n}, 2e-2}, {{0, 2 * n}, 1e-2}};
    }
    const SimResult r = simulate(cfg);
    out.runs.push_back({sigma(ModeIndex{m, n}, cfg.params, g),
                        std::abs(r.diagnostics.final_critical(1))});
    out.fingerprints.push_back(r.diagnostics.final_fingerprint);
  }
  out.estimate = fit_saturation(out.runs, branch);
  return out;
}

Arbitration arbitrate(double estimate, double paper_value, double formula_value,
                      double tolerance) {
  Arbitration a;
  a.estimate = estimate;
  a.paper_value = paper_value;
  a.formula_value = formula_value;
  a.paper_error = std::abs(estimate - paper_value) / std::abs(paper_value);
  a.formula_error = std::abs(estimate - formula_value) / std::abs(formula_value);
  a.separation = std::abs(paper_value - formula_value) /
                 std::min(std::abs(paper_value), std::abs(formula_value));
  const bool paper_ok = a.paper_error <= tolerance;
  const bool formula_ok = a.formula_error <= tolerance;
  if (paper_ok != formula_ok) {
    a.winner = paper_ok ? CoefficientConvention::kPaper : CoefficientConvention::kFormula;
  }
  return a;
}

PatternClass perturbed_label(const Vec2& y, double amplitude_scale) {
  const double tol = 1e-9 * amplitude_scale;
  const double a1 = std::abs(y(0));
  const double a2 = std::abs(y(1));
  if (a1 <= tol && a2 <= tol) return PatternClass::kTrivial;
  if (a1 <= tol) return PatternClass::kRoll;
  if (a2 <= tol) return PatternClass::kRectangle;
  if (std::abs(a1 / a2 - 2.0) <= 0.25) return PatternClass::kHexagon;
  return PatternClass::kMixed;
}

ReducedCoefficients mirrored_override(const ReducedCoefficients& rc) {
  ReducedCoefficients out = rc;
  const double d = 2.0 * rc.frak_b2 - rc.frak_b1;
  out.frak_b2 = 0.5 * (rc.frak_b1 - d);
  return out;
}

VerificationReport run_verify_theorem1(const ExperimentConfig& cfg) {
  VerificationReport rep;
  rep.title = "verify-theorem1: hexagonal-point transition";
  const int m = cfg.geometry.m;
  const int n = cfg.geometry.n;
  const double tol = cfg.theorem1.analytic_tolerance;
  const ModelParams base{cfg.model.mu, cfg.model.alpha, 1.0};
  const DomainGeometry g = cfg.resolved_geometry();
  rep.notes.push_back(fmt::format("coefficient convention: {}", to_string(cfg.convention)));
  rep.notes.push_back(fmt::format(
      "quadratic placement: {}",
      cfg.placement == QuadraticPlacement::kProjected ? "projected" : "as-printed"));
  rep.notes.push_back(fmt::format("geometry ell1 = {}, ell2 = {}", num(g.ell1), num(g.ell2)));

  rep.add_numeric("hypothesis mu = 8 alpha", 8.0 * base.alpha, base.mu, tol, true);
  rep.add_numeric("hypothesis ell2 = 2 sqrt(2) n pi", 2.0 * std::sqrt(2.0) * n * kPi, g.ell2, tol,
                  true);
  rep.add_numeric("hypothesis sqrt(3) n ell1 = m ell2", m * g.ell2, std::sqrt(3.0) * n * g.ell1,
                  tol, true);

  double lambda_c = 0.0;
  try {
    const CriticalData cd = lambda_critical(base, g);
    lambda_c = cd.lambda_c;
    rep.add_numeric("critical coupling equals 9 mu / 4", 2.25 * base.mu, cd.lambda_c, tol, true);
    std::vector<ModeIndex> expected{{0, 2 * n}, {m, n}};
    std::sort(expected.begin(), expected.end());
    rep.add_bool("critical set is {(m, n), (0, 2n)}", modes_string(expected),
                 modes_string(cd.critical_modes), cd.critical_modes == expected);
  } catch (const std::exception& e) {
    rep.add_failure("critical coupling", e.what());
    return rep;
  }

  ModelParams pc = base;
  pc.lambda = lambda_c;
  try {
    const ReducedCoefficients rc0 = cubic_coefficients(pc, g, m, n, cfg.convention);
    rep.add_numeric("quadratic coefficient a vanishes", 0.0, rc0.frak_a, 1e-12);
    rep.add_bool("transition is type-I", to_string(TransitionVerdict::kTypeI), to_string(transition_type(rc0)),
                 transition_type(rc0) == TransitionVerdict::kTypeI);
    rep.add_bool("b1 - 2 b2 is positive", "> 0", num(rc0.b1_minus_2b2()),
                 rc0.b1_minus_2b2() > 0.0);
  } catch (const std::exception& e) {
    rep.add_failure("reduction at the critical coupling", e.what());
    return rep;
  }

  const ModelParams p = cfg.resolved_params();
  rep.notes.push_back(fmt::format("working coupling lambda = {} = {} lambda_c", num(p.lambda),
                                  num(p.lambda / lambda_c)));
  if (p.lambda <= lambda_c) {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& entry : pes_classification(p, g)) top = std::max(top, sigma(entry.first, p, g));
    rep.add_bool("trivial state is stable", "max sigma <= 0", num(top), top <= 0.0);
    rep.add_skipped("equilibrium catalogue", "coupling not above critical");
    rep.add_skipped("attractor ring", "coupling not above critical");
    rep.add_skipped("simulation fingerprints", "coupling not above critical");
    return rep;
  }

  ReducedCoefficients rc;
  EquilibriumCatalogue cat;
  try {
    rc = with_placement(frozen_coefficients(p, g, m, n, cfg.convention), cfg.placement);
    cat = equilibria(rc);
    rep.add_count("nontrivial equilibria", 8, static_cast<long>(cat.nontrivial_count()));
    rep.add_count("roll equilibria", 2, static_cast<long>(cat.count(PatternClass::kRoll)));
    rep.add_count("rectangle equilibria", 2,
                  static_cast<long>(cat.count(PatternClass::kRectangle)));
    rep.add_count("hexagon equilibria", 4, static_cast<long>(cat.count(PatternClass::kHexagon)));
    long hex_nodes = 0;
    long other_saddles = 0;
    long rule_matches = 0;
    for (std::size_t i = 1; i < cat.points.size(); ++i) {
      const EquilibriumPoint& e = cat.points[i];
      if (e.pattern == PatternClass::kHexagon && is_stable(e)) ++hex_nodes;
      if ((e.pattern == PatternClass::kRoll || e.pattern == PatternClass::kRectangle) &&
          e.stability == Stability::kSaddle) {
        ++other_saddles;
      }
      const int sign = e.det > 0.0 ? 1 : (e.det < 0.0 ? -1 : 0);
      if (sign == analytic_det_sign(e.pattern, rc)) ++rule_matches;
    }
    rep.add_count("Jacobian determinant signs match the closed-form rule", 8, rule_matches);
    rep.add_count("hexagons that are stable nodes", 4, hex_nodes,
                  "closed-form rule with b1 - 2 b2 > 0 makes hexagons saddles");
    rep.add_count("rolls and rectangles that are saddles", 4, other_saddles);
  } catch (const std::exception& e) {
    rep.add_failure("equilibrium catalogue", e.what());
    return rep;
  }

  try {
    const AttractorDescriptor ag = attractor_graph(rc);
    std::string diag;
    for (const std::string& d : ag.diagnostics) diag += d + "; ";
    rep.add_bool("equilibria and connections form a ring", "true",
                 ag.is_circle ? "true" : "false", ag.is_circle, diag);
    const double A = amplitude_scale(rc);
    const BasinSurvey bs = basin_survey(rc, cfg.ode.basin_radius * A, cfg.ode.basin_rays);
    long off_axis = 0;
    long to_hex = 0;
    std::map<PatternClass, long> tally;
    for (const RayResult& r : bs.rays) {
      if (r.start(0) == 0.0 || r.start(1) == 0.0) continue;
      ++off_axis;
      ++tally[r.label];
      if (r.label == PatternClass::kHexagon) ++to_hex;
    }
    std::string t;
    for (const auto& [c, k] : tally) t += fmt::format("{} {}, ", to_string(c), k);
    rep.add_count("off-axis rays captured by hexagons", off_axis, to_hex, t);
  } catch (const std::exception& e) {
    rep.add_failure("attractor", e.what());
  }

  const std::uint64_t seed0 = cfg.seed.value_or(1);
  const std::size_t grid = cfg.theorem1.sim_n;
  const double t_end = cfg.theorem1.sim_t_end;
  const int runs = cfg.theorem1.sim_seeds;
  if (runs > 0) {
    try {
      std::set<PatternClass> stable_classes;
      for (const EquilibriumPoint& e : cat.points) {
        if (is_stable(e)) stable_classes.insert(e.pattern);
      }
      long hex = 0;
      long consistent = 0;
      double worst = 0.0;
      std::map<PatternClass, long> tally;
      for (int i = 0; i < runs; ++i) {
        const SimResult r = simulate(seeded_run(cfg, p, g, grid, t_end, seed0 + i));
        const PatternClass f = r.diagnostics.final_fingerprint;
        ++tally[f];
        if (f == PatternClass::kHexagon) ++hex;
        if (stable_classes.contains(f)) ++consistent;
        const auto dev = amplitude_deviation(r.diagnostics.final_critical, f, cat);
        worst = std::max(worst, dev.value_or(std::numeric_limits<double>::infinity()));
      }
      std::string t;
      for (const auto& [c, k] : tally) t += fmt::format("{} {}, ", to_string(c), k);
      rep.add_count("seeded runs ending hexagonal", runs, hex, t);
      rep.add_count("seeded runs ending in a stable class of the reduction", runs, consistent);
      rep.add_numeric("worst terminal amplitude deviation from the reduced equilibrium", 0.0,
                      worst, cfg.theorem1.reduction_tolerance, false,
                      "relative distance to the nearest equilibrium of the same class");
    } catch (const std::exception& e) {
      rep.add_failure("seeded simulations", e.what());
    }
  }

  try {
    ModelParams ps = p;
    ps.lambda = cfg.theorem1.subcritical_factor * lambda_c;
    const SimResult r = simulate(seeded_run(cfg, ps, g, grid, std::min(t_end, 200.0), seed0));
    const double first = r.diagnostics.l2_norm_series.front();
    const double last = r.diagnostics.l2_norm_series.back();
    rep.add_bool("subcritical run decays", "final norm <= 1e-3 initial",
                 fmt::format("{:.3g}", last / first), last <= 1e-3 * first);
  } catch (const std::exception& e) {
    rep.add_failure("subcritical simulation", e.what());
  }

  if (cfg.theorem1.full_system) {
    try {
      const SimConfig sc = seeded_run(cfg, p, g, grid, t_end, seed0);
      const SimResult scalar = simulate(sc);
      const FullSimResult full = simulate_full_system(sc, cfg.chemoattractant);
      const PatternClass a = scalar.diagnostics.final_fingerprint;
      const PatternClass b = full.diagnostics.final_fingerprint;
      rep.add_bool("two-field system agrees in fingerprint", to_string(a), to_string(b), a == b);
    } catch (const std::exception& e) {
      rep.add_failure("two-field simulation", e.what());
    }
  }

  if (!cfg.theorem1.saturation_sigmas.empty()) {
    const double arb_tol = 0.1;
    const ReducedCoefficients ref = cubic_coefficients(pc, g, m, n);
    try {
      const SaturationStudy roll = saturation_study(base, g, m, n, PatternClass::kRoll,
                                                    cfg.theorem1.saturation_sigmas, grid, t_end);
      const Arbitration a = arbitrate(roll.estimate, ref.paper_b1, ref.formula_b1, arb_tol);
      add_arbitration(rep, "roll-branch arbitration of b1", a, arb_tol, true);
      rep.notes.push_back(fmt::format("roll branch selects the {} value of b1",
                                      a.winner ? to_string(*a.winner) : "neither"));
    } catch (const std::exception& e) {
      rep.add_failure("roll-branch saturation fit", e.what());
    }
    try {
      const SaturationStudy hex = saturation_study(base, g, m, n, PatternClass::kHexagon,
                                                   cfg.theorem1.saturation_sigmas, grid, t_end);
      const bool stayed = std::all_of(hex.fingerprints.begin(), hex.fingerprints.end(),
                                      [](PatternClass c) { return c == PatternClass::kHexagon; });
      rep.add_bool("hexagon-branch runs stay hexagonal", "true", stayed ? "true" : "false", stayed);
      const Arbitration a = arbitrate(hex.estimate, ref.paper_b1 + 4.0 * ref.paper_b2,
                                      ref.formula_b1 + 4.0 * ref.formula_b2, arb_tol);
      add_arbitration(rep, "hexagon-branch arbitration of b1 + 4 b2", a, arb_tol, false);
      rep.notes.push_back(fmt::format("hexagon branch selects the {} value of b1 + 4 b2",
                                      a.winner ? to_string(*a.winner) : "neither"));
    } catch (const std::exception& e) {
      rep.add_failure("hexagon-branch saturation fit", e.what());
    }
  }
  return rep;
}

VerificationReport run_verify_theorem2(const ExperimentConfig& cfg) {
  VerificationReport rep;
  rep.title = "verify-theorem2: perturbed-geometry transition";
  const int m = cfg.geometry.m;
  const int n = cfg.geometry.n;
  const ModelParams base{cfg.model.mu, cfg.model.alpha, 1.0};
  const DomainGeometry g0 = cfg.resolved_geometry();
  const double eps_l = cfg.theorem2.ell2_perturbation;
  const double eps_lambda = cfg.theorem2.lambda_perturbation;
  rep.notes.push_back(fmt::format("coefficient convention: {}", to_string(cfg.convention)));
  rep.notes.push_back(fmt::format("ell2 scaled by 1 + {}, lambda by 1 + {}", num(eps_l),
                                  num(eps_lambda)));

  double lambda_c = 0.0;
  try {
    lambda_c = lambda_critical(base, g0).lambda_c;
  } catch (const std::exception& e) {
    rep.add_failure("critical coupling", e.what());
    return rep;
  }
  const DomainGeometry g{g0.ell1, g0.ell2 * (1.0 + eps_l)};
  ModelParams p = base;
  p.lambda = lambda_c * (1.0 + eps_lambda);
  rep.add_bool("hypothesis ell2 above its critical value", "> 0", num(eps_l), eps_l > 0.0);
  rep.add_bool("hypothesis lambda above its critical value", "> 0", num(eps_lambda),
               eps_lambda > 0.0);

  ReducedCoefficients rc;
  try {
    rc = with_placement(cubic_coefficients(p, g, m, n, cfg.convention), cfg.placement);
  } catch (const std::exception& e) {
    rep.add_failure("reduction", e.what());
    return rep;
  }
  rep.notes.push_back(fmt::format("a = {}, b1 = {}, b2 = {}, sigma = ({}, {})", num(rc.frak_a),
                                  num(rc.frak_b1), num(rc.frak_b2), num(rc.sigma1),
                                  num(rc.sigma2)));
  if (rc.sigma1 <= 0.0 && rc.sigma2 <= 0.0) {
    rep.add_bool("trivial state is stable", "critical rates <= 0",
                 fmt::format("({:.3g}, {:.3g})", rc.sigma1, rc.sigma2), true);
    rep.add_skipped("equilibrium catalogue", "critical pair not unstable");
    return rep;
  }
  rep.add_bool("quadratic coefficient a is nonzero", "!= 0", num(rc.frak_a),
               std::abs(rc.frak_a) > 1e-12);

  struct Case {
    std::string name;
    ReducedCoefficients rc;
  };
  std::vector<Case> cases{{"computed", rc}, {"mirrored override", mirrored_override(rc)}};
  if (cfg.theorem2.override_b1 && cfg.theorem2.override_b2) {
    ReducedCoefficients o = rc;
    o.frak_b1 = *cfg.theorem2.override_b1;
    o.frak_b2 = *cfg.theorem2.override_b2;
    cases.push_back({"configured override", o});
  }

  std::vector<std::map<PatternClass, std::set<Stability>>> classes;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const Case& c = cases[ci];
    const double d = 2.0 * c.rc.frak_b2 - c.rc.frak_b1;
    const std::string tag = fmt::format("{} (2 b2 - b1 = {:.4g})", c.name, d);
    std::map<PatternClass, std::set<Stability>> by_class;
    try {
      const EquilibriumCatalogue cat = equilibria(c.rc);
      const double A = amplitude_scale(c.rc);
      std::map<PatternClass, long> counts;
      for (std::size_t i = 1; i < cat.points.size(); ++i) {
        const PatternClass l = perturbed_label(cat.points[i].y, A);
        ++counts[l];
        by_class[l].insert(cat.points[i].stability);
      }
      if (ci == 0) {
        rep.add_count("nontrivial equilibria", 8, static_cast<long>(cat.nontrivial_count()));
        rep.add_count("pure rectangle equilibria", 0, counts[PatternClass::kRectangle]);
        rep.add_count("mixed equilibria", 2, counts[PatternClass::kMixed]);
        rep.add_count("roll equilibria", 2, counts[PatternClass::kRoll]);
        rep.add_count("near-hexagonal equilibria", 4, counts[PatternClass::kHexagon]);
      } else {
        rep.add_count("nontrivial equilibria, " + tag, 8,
                      static_cast<long>(cat.nontrivial_count()));
      }
      // Published cases: negative 2 b2 - b1 pairs stable hexagons with saddle rolls and mixed points.
      const Stability hex_expected = d < 0.0 ? Stability::kStableNode : Stability::kSaddle;
      const Stability other_expected = d < 0.0 ? Stability::kSaddle : Stability::kStableNode;
      const bool ok = by_class[PatternClass::kHexagon] == std::set<Stability>{hex_expected} &&
                      by_class[PatternClass::kRoll] == std::set<Stability>{other_expected} &&
                      by_class[PatternClass::kMixed] == std::set<Stability>{other_expected};
      std::string observed;
      for (const auto& [l, st] : by_class) {
        for (Stability s : st) observed += to_string(l) + ":" + to_string(s) + " ";
      }
      rep.add_bool("classification follows the published case, " + tag,
                   fmt::format("hexagon:{} others:{}", to_string(hex_expected),
                               to_string(other_expected)),
                   observed, ok);
      const AttractorDescriptor ag = attractor_graph(c.rc);
      rep.add_bool("equilibria and connections form a ring, " + tag, "true",
                   ag.is_circle ? "true" : "false", ag.is_circle);
    } catch (const std::exception& e) {
      rep.add_failure("equilibria, " + tag, e.what());
    }
    classes.push_back(by_class);
  }

  if (classes.size() >= 2) {
    bool flips = true;
    for (PatternClass l : {PatternClass::kHexagon, PatternClass::kRoll, PatternClass::kMixed}) {
      const auto& a = classes[0][l];
      const auto& b = classes[1][l];
      flips = flips && a.size() == 1 && b.size() == 1 && *a.begin() != *b.begin();
    }
    rep.add_bool("stability of every class flips with the sign of 2 b2 - b1", "true",
                 flips ? "true" : "false", flips);
  }
  return rep;
}

std::vector<AtlasRow> run_sweep(const ExperimentConfig& cfg) {
  std::vector<AtlasRow> rows;
  const int m = cfg.geometry.m;
  const int n = cfg.geometry.n;
  const ModelParams base{cfg.model.mu, cfg.model.alpha, 1.0};
  const DomainGeometry g0 = cfg.resolved_geometry();
  for (double lf : cfg.sweep.lambda_factors) {
    for (double gs : cfg.sweep.geometry_scales) {
      AtlasRow row;
      row.lambda_factor = lf;
      row.geometry_scale = gs;
      try {
        const DomainGeometry g{g0.ell1, g0.ell2 * gs};
        const CriticalData cd = lambda_critical(base, g);
        row.lambda_c = cd.lambda_c;
        row.critical_modes = cd.critical_modes;
        ModelParams p = base;
        p.lambda = lf * cd.lambda_c;
        const ReducedCoefficients rc =
            with_placement(cubic_coefficients(p, g, m, n, cfg.convention), cfg.placement);
        row.frak_a = rc.frak_a;
        row.formula_b1 = rc.formula_b1;
        row.formula_b2 = rc.formula_b2;
        row.paper_b1 = rc.paper_b1;
        row.paper_b2 = rc.paper_b2;
        if (rc.sigma1 > 0.0 || rc.sigma2 > 0.0) {
          row.equilibrium_count = static_cast<long>(equilibria(rc).nontrivial_count());
        } else {
          row.equilibrium_count = 0;
        }
        if (cfg.sweep.simulate) {
          SimConfig s = seeded_run(cfg, p, g, cfg.sweep.sim_n, cfg.sweep.sim_t_end,
                                   cfg.seed.value_or(1));
          row.fingerprint = to_string(simulate(s).diagnostics.final_fingerprint);
        }
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_atlas(const std::vector<AtlasRow>& rows) {
  std::string out =
      "lambda_factor,geometry_scale,lambda_c,critical_modes,a,formula_b1,formula_b2,paper_b1,"
      "paper_b2,equilibria,fingerprint,error\n";
  for (const AtlasRow& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", num(r.lambda_factor),
                       num(r.geometry_scale), num(r.lambda_c), modes_string(r.critical_modes),
                       num(r.frak_a), num(r.formula_b1), num(r.formula_b2), num(r.paper_b1),
                       num(r.paper_b2), r.equilibrium_count, r.fingerprint, err);
  }
  return out;
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  write_text(dir / "config.ini", serialize(cfg));

  switch (cfg.kind) {
    case ExperimentKind::kLinear: {
      const ModelParams p = cfg.resolved_params();
      const DomainGeometry g = cfg.resolved_geometry();
      const CriticalData cd = lambda_critical(p, g);
      std::string csv = "k1,k2,rho,sigma,neutral_lambda\n";
      for (int k1 = 0; k1 <= 8; ++k1) {
        for (int k2 = 0; k2 <= 8; ++k2) {
          const ModeIndex k{k1, k2};
          const double r = rho(k, g);
          const double nl = r > 0.0 ? neutral_lambda(r, p) : std::numeric_limits<double>::infinity();
          csv += fmt::format("{},{},{},{},{}\n", k1, k2, num(r), num(sigma(r, p)), num(nl));
        }
      }
      write_text(dir / "linear.csv", csv);
      json j;
      j["lambda"] = p.lambda;
      j["lambda_c"] = cd.lambda_c;
      j["rho_star"] = cd.rho_star;
      j["continuum_rho_star"] = cd.continuum_rho_star;
      j["continuum_lambda_c"] = cd.continuum_lambda_c;
      json modes = json::array();
      for (const ModeIndex& k : cd.critical_modes) modes.push_back({k.k1, k.k2});
      j["critical_modes"] = modes;
      j["ell1"] = g.ell1;
      j["ell2"] = g.ell2;
      write_text(dir / "linear.json", j.dump(2) + "\n");
      log << fmt::format("lambda_c = {}  critical modes {}\n", num(cd.lambda_c),
                         modes_string(cd.critical_modes));
      return 0;
    }
    case ExperimentKind::kReduce: {
      const ReducedCoefficients rc = with_placement(
          cubic_coefficients(cfg.resolved_params(), cfg.resolved_geometry(), cfg.geometry.m,
                             cfg.geometry.n, cfg.convention),
          cfg.placement);
      json j;
      j["coefficients"] = coefficients_json(rc);
      j["transition"] = to_string(transition_type(rc));
      if (rc.sigma1 > 0.0 || rc.sigma2 > 0.0) {
        const EquilibriumCatalogue cat = equilibria(rc);
        j["closed_form"] = cat.closed_form;
        j["equilibria"] = equilibria_json(cat.points);
      }
      write_text(dir / "reduce.json", j.dump(2) + "\n");
      log << fmt::format("a = {}  b1 = {}  b2 = {}  ({})\n", num(rc.frak_a), num(rc.frak_b1),
                         num(rc.frak_b2), to_string(rc.convention));
      return 0;
    }
    case ExperimentKind::kOde: {
      const ReducedCoefficients rc = with_placement(
          cubic_coefficients(cfg.resolved_params(), cfg.resolved_geometry(), cfg.geometry.m,
                             cfg.geometry.n, cfg.convention),
          cfg.placement);
      const double t_end = cfg.ode.t_end > 0.0 ? cfg.ode.t_end : default_horizon(rc);
      const Trajectory tr = integrate(rc, Vec2(cfg.ode.y1, cfg.ode.y2), cfg.ode.dt, t_end);
      std::string csv = "t,y1,y2\n";
      for (std::size_t i = 0; i < tr.times.size(); ++i) {
        csv += fmt::format("{},{},{}\n", num(tr.times[i]), num(tr.states[i](0)),
                           num(tr.states[i](1)));
      }
      write_text(dir / "trajectory.csv", csv);
      json j;
      j["coefficients"] = coefficients_json(rc);
      j["diverged"] = tr.diverged;
      if (rc.sigma1 > 0.0 || rc.sigma2 > 0.0) {
        const AttractorDescriptor ag = attractor_graph(rc);
        j["equilibria"] = equilibria_json(ag.equilibria);
        json conns = json::array();
        for (const Connection& c : ag.connections) {
          conns.push_back({{"saddle", c.saddle}, {"sink", c.sink}, {"direction", c.direction}});
        }
        j["connections"] = conns;
        j["is_circle"] = ag.is_circle;
        j["diagnostics"] = ag.diagnostics;
        const BasinSurvey bs =
            basin_survey(rc, cfg.ode.basin_radius * amplitude_scale(rc), cfg.ode.basin_rays);
        std::string b = "angle,y1_start,y2_start,label,y1_end,y2_end\n";
        for (const RayResult& r : bs.rays) {
          b += fmt::format("{},{},{},{},{},{}\n", num(r.angle), num(r.start(0)), num(r.start(1)),
                           to_string(r.label), num(r.terminal(0)), num(r.terminal(1)));
        }
        write_text(dir / "basin.csv", b);
        log << fmt::format("attractor ring: {}\n", ag.is_circle ? "yes" : "no");
      }
      write_text(dir / "attractor.json", j.dump(2) + "\n");
      log << fmt::format("final state ({}, {})\n", num(tr.final_state()(0)),
                         num(tr.final_state()(1)));
      return 0;
    }
    case ExperimentKind::kSimulate:
    case ExperimentKind::kSimulateFull: {
      const SimConfig s = cfg.resolved_simulation();
      Diagnostics d;
      json j;
      if (cfg.kind == ExperimentKind::kSimulate) {
        const SimResult r = simulate(s);
        d = r.diagnostics;
        for (const auto& [t, grid] : r.snapshots) {
          write_snapshot((dir / fmt::format("snapshot_t{}.txt", num(t))).string(), grid,
                         s.geometry, t);
        }
        write_snapshot((dir / "final.txt").string(), transform_inverse(r.final), s.geometry,
                       d.t_final);
      } else {
        const FullSimResult r = simulate_full_system(s, cfg.chemoattractant);
        d = r.diagnostics;
        write_snapshot((dir / "final_u.txt").string(), transform_inverse(r.final_u), s.geometry,
                       d.t_final);
        write_snapshot((dir / "final_v.txt").string(), transform_inverse(r.final_v), s.geometry,
                       d.t_final);
      }
      write_mode_series((dir / "modes.csv").string(), d);
      j["fingerprint"] = to_string(d.final_fingerprint);
      j["y1"] = d.final_critical(0);
      j["y2"] = d.final_critical(1);
      j["t_final"] = d.t_final;
      j["steady"] = d.reached_steady_state;
      write_text(dir / "summary.json", j.dump(2) + "\n");
      log << fmt::format("t = {}  fingerprint {}  y = ({}, {})\n", num(d.t_final),
                         to_string(d.final_fingerprint), num(d.final_critical(0)),
                         num(d.final_critical(1)));
      return 0;
    }
    case ExperimentKind::kSweep: {
      const auto rows = run_sweep(cfg);
      write_text(dir / "atlas.csv", format_atlas(rows));
      const bool failed = std::any_of(rows.begin(), rows.end(),
                                      [](const AtlasRow& r) { return !r.error.empty(); });
      log << fmt::format("{} cells written\n", rows.size());
      return failed ? 1 : 0;
    }
    case ExperimentKind::kVerifyTheorem1:
    case ExperimentKind::kVerifyTheorem2: {
      const VerificationReport rep = cfg.kind == ExperimentKind::kVerifyTheorem1
                                         ? run_verify_theorem1(cfg)
                                         : run_verify_theorem2(cfg);
      write_text(dir / "report.txt", rep.to_text());
      write_text(dir / "report.json", rep.to_json());
      log << rep.to_text();
      return rep.passed() ? 0 : 1;
    }
  }
  return 2;
}

}  // namespace chemo
