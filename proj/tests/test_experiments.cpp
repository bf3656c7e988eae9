#include <filesystem>
#include <fstream>
#include <sstream>

#include "chemo/experiments.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace chemo;

namespace {

const Check* find_check(const VerificationReport& r, const std::string& prefix) {
  for (const Check& c : r.checks) {
    if (c.name.rfind(prefix, 0) == 0) return &c;
  }
  return nullptr;
}

ExperimentConfig analytic_theorem1() {
  ExperimentConfig c = parse_config("kind = verify-theorem1\n[theorem1]\nsim_seeds = 0\n"
                                    "full_system = false\n");
  c.theorem1.saturation_sigmas.clear();
  return c;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("frozen coefficients keep the critical cubic terms") {
    const ModelParams p{8.0, 1.0, 18.36};
    const DomainGeometry g = make_critical_geometry(1, 1, p);
    const auto rc = frozen_coefficients(p, g, 1, 1);
    CHECK(rc.frak_a == 0.0);
    CHECK(rc.frak_b1 == doctest::Approx(-3.0));
    CHECK(rc.sigma1 == doctest::Approx(-4.0 - 2.0 + 18.36 / 3.0));
    CHECK(rc.sigma2 == doctest::Approx(rc.sigma1));
  }

  TEST_CASE("coupling for a target growth rate") {
    const ModelParams p{8.0, 1.0, 1.0};
    for (double s : {-0.1, 0.0, 0.02, 0.1}) {
      ModelParams q = p;
      q.lambda = lambda_for_sigma(s, p, 0.5);
      CHECK(sigma(0.5, q) == doctest::Approx(s).epsilon(1e-12));
    }
    CHECK(lambda_for_sigma(0.0, p, 0.5) == doctest::Approx(18.0));
  }

  TEST_CASE("arbitration picks exactly one candidate") {
    auto a = arbitrate(-2.95, -2.1, -3.0, 0.1);
    REQUIRE(a.winner.has_value());
    CHECK(*a.winner == CoefficientConvention::kFormula);
    CHECK(a.separation == doctest::Approx(0.9 / 2.1));
    a = arbitrate(-2.15, -2.1, -3.0, 0.1);
    CHECK(*a.winner == CoefficientConvention::kPaper);
    a = arbitrate(-2.5, -2.1, -3.0, 0.1);
    CHECK_FALSE(a.winner.has_value());
    a = arbitrate(-1.0, -1.0, -1.05, 0.1);
    CHECK_FALSE(a.winner.has_value());
  }

  TEST_CASE("mirrored override flips the sign of 2 b2 - b1") {
    ReducedCoefficients rc;
    rc.frak_b1 = -3.1;
    rc.frak_b2 = -2.5;
    const auto m = mirrored_override(rc);
    CHECK(m.frak_b1 == rc.frak_b1);
    CHECK(2.0 * m.frak_b2 - m.frak_b1 == doctest::Approx(-(2.0 * rc.frak_b2 - rc.frak_b1)));
  }

  TEST_CASE("labels for roots of the perturbed field") {
    CHECK(perturbed_label(Vec2(0.0, 0.2), 0.2) == PatternClass::kRoll);
    CHECK(perturbed_label(Vec2(0.2, 0.0), 0.2) == PatternClass::kRectangle);
    CHECK(perturbed_label(Vec2(-0.21, 0.1), 0.2) == PatternClass::kHexagon);
    CHECK(perturbed_label(Vec2(0.17, 0.01), 0.2) == PatternClass::kMixed);
    CHECK(perturbed_label(Vec2(0.0, 0.0), 0.2) == PatternClass::kTrivial);
  }

  TEST_CASE("analytic part of the hexagonal-point verification") {
    const VerificationReport r = run_verify_theorem1(analytic_theorem1());
    for (const char* name : {"hypothesis mu = 8 alpha", "critical coupling equals 9 mu / 4",
                             "critical set", "quadratic coefficient a vanishes",
                             "transition is type-I", "b1 - 2 b2 is positive",
                             "nontrivial equilibria", "Jacobian determinant signs",
                             "equilibria and connections form a ring"}) {
      const Check* c = find_check(r, name);
      REQUIRE_MESSAGE(c != nullptr, name);
      CHECK_MESSAGE(c->status == CheckStatus::kPass, name);
    }
    // The computed Jacobians make hexagons saddles.
    CHECK(find_check(r, "hexagons that are stable nodes")->status == CheckStatus::kFail);
    CHECK(find_check(r, "hexagons that are stable nodes")->observed == "0");
  }

  TEST_CASE("violated hypothesis is named") {
    ExperimentConfig c = analytic_theorem1();
    c.model.mu = 6.0;
    const VerificationReport r = run_verify_theorem1(c);
    CHECK_FALSE(r.passed());
    CHECK(find_check(r, "hypothesis mu = 8 alpha")->status == CheckStatus::kFail);
    CHECK(find_check(r, "hypothesis sqrt(3) n ell1 = m ell2")->status == CheckStatus::kPass);
  }

  TEST_CASE("subcritical coupling skips the catalogue") {
    ExperimentConfig c = analytic_theorem1();
    c.model.lambda_factor = 0.95;
    const VerificationReport r = run_verify_theorem1(c);
    CHECK(r.passed());
    CHECK(find_check(r, "trivial state is stable")->status == CheckStatus::kPass);
    CHECK(find_check(r, "equilibrium catalogue")->status == CheckStatus::kSkipped);
  }

  TEST_CASE("perturbed-geometry verification") {
    const VerificationReport r = run_verify_theorem2(parse_config("kind = verify-theorem2\n"));
    CHECK(find_check(r, "nontrivial equilibria")->observed == "8");
    CHECK(find_check(r, "pure rectangle equilibria")->status == CheckStatus::kPass);
    CHECK(find_check(r, "mixed equilibria")->status == CheckStatus::kPass);
    CHECK(find_check(r, "quadratic coefficient a is nonzero")->status == CheckStatus::kPass);
    CHECK(find_check(r, "stability of every class flips")->status == CheckStatus::kPass);
    // Only the published-case mapping disagrees: the computed case has saddle hexagons.
    for (const Check& c : r.checks) {
      if (c.status == CheckStatus::kFail) {
        CHECK(c.name.rfind("classification follows the published case", 0) == 0);
      }
    }

    const auto j = nlohmann::json::parse(r.to_json());
    CHECK(j["overall"] == "fail");
    CHECK(j["checks"].size() == r.checks.size());
  }

  TEST_CASE("zero perturbation falls back to the critical point") {
    ExperimentConfig c = parse_config(
        "kind = verify-theorem2\n[theorem2]\nell2_perturbation = 0\nlambda_perturbation = 0\n");
    const VerificationReport r = run_verify_theorem2(c);
    CHECK_FALSE(r.passed());
    CHECK(find_check(r, "hypothesis ell2 above")->status == CheckStatus::kFail);
    CHECK(find_check(r, "equilibrium catalogue")->status == CheckStatus::kSkipped);
  }

  TEST_CASE("coupling perturbation alone already removes the rectangles") {
    ExperimentConfig c = parse_config(
        "kind = verify-theorem2\n[theorem2]\nell2_perturbation = 0\n");
    const VerificationReport r = run_verify_theorem2(c);
    CHECK(find_check(r, "quadratic coefficient a is nonzero")->status == CheckStatus::kPass);
    CHECK(find_check(r, "pure rectangle equilibria")->observed == "0");
  }

  TEST_CASE("configured override adds a case") {
    ExperimentConfig c = parse_config(
        "kind = verify-theorem2\n[theorem2]\noverride_b1 = -3\noverride_b2 = -1\n");
    const VerificationReport r = run_verify_theorem2(c);
    CHECK(find_check(r, "classification follows the published case, configured override") != nullptr);
  }

  TEST_CASE("sweep atlas") {
    ExperimentConfig c = parse_config("kind = sweep\n[sweep]\nsimulate = false\n");
    const auto rows = run_sweep(c);
    REQUIRE(rows.size() == 9);
    const AtlasRow& center = rows[4];
    CHECK(center.lambda_factor == 1.0);
    CHECK(center.geometry_scale == 1.0);
    CHECK(center.lambda_c == doctest::Approx(18.0));
    CHECK(std::abs(center.frak_a) <= 1e-12);
    CHECK(center.formula_b1 == doctest::Approx(-3.0));
    CHECK(center.paper_b1 == doctest::Approx(-2.1));
    for (const AtlasRow& r : rows) CHECK(r.error.empty());
    CHECK(rows[7].equilibrium_count == 8);
    CHECK(format_atlas(rows) == format_atlas(run_sweep(c)));

    c.sweep.lambda_factors.clear();
    CHECK(format_atlas(run_sweep(c)) ==
          "lambda_factor,geometry_scale,lambda_c,critical_modes,a,formula_b1,formula_b2,"
          "paper_b1,paper_b2,equilibria,fingerprint,error\n");
  }

  TEST_CASE("sweep with simulations is reproducible") {
    ExperimentConfig c = parse_config(
        "kind = sweep\nseed = 9\n[sweep]\nlambda_factors = 1.02\ngeometry_scales = 1\n"
        "sim_t_end = 20\n");
    CHECK(format_atlas(run_sweep(c)) == format_atlas(run_sweep(c)));
  }

  TEST_CASE("experiment files") {
    const auto dir = std::filesystem::temp_directory_path() / "chemo_experiment_test";
    std::filesystem::remove_all(dir);
    std::ostringstream log;
    ExperimentConfig c = parse_config("kind = reduce\n");
    c.output_dir = (dir / "reduce").string();
    CHECK(run_experiment(c, log) == 0);
    const auto j = nlohmann::json::parse(read_file(dir / "reduce" / "reduce.json"));
    CHECK(j.contains("coefficients"));
    CHECK(parse_config(read_file(dir / "reduce" / "config.ini")).kind == ExperimentKind::kReduce);

    c = parse_config("kind = linear\n");
    c.output_dir = (dir / "linear").string();
    CHECK(run_experiment(c, log) == 0);
    CHECK(read_file(dir / "linear" / "linear.csv").rfind("k1,k2,rho,sigma,neutral_lambda\n", 0) == 0);

    c = parse_config("kind = ode\n");
    c.output_dir = (dir / "ode").string();
    CHECK(run_experiment(c, log) == 0);
    for (const char* f : {"trajectory.csv", "attractor.json", "basin.csv"}) {
      CHECK(std::filesystem::exists(dir / "ode" / f));
    }
    std::filesystem::remove_all(dir);
  }
}
