#include <cmath>
#include <numeric>
#include <random>

#include "chemo/errors.hpp"
#include "chemo/spectral_core.hpp"
#include "chemo/spectral_field.hpp"
#include "doctest.h"

using namespace chemo;

namespace {

const ModelParams kHexPoint{8.0, 1.0, 18.0};

DomainGeometry hex_geometry() {
  const double ell2 = 2.0 * std::sqrt(2.0) * kPi;
  return {ell2 / std::sqrt(3.0), ell2};
}

}  // namespace

TEST_SUITE("spectral-core") {
  TEST_CASE("nondimensionalize substitutes the scaling formulas") {
    const ModelParams a = nondimensionalize({8, 1, 1, 18, 1, 1, 1});
    CHECK(a.mu == doctest::Approx(8.0));
    CHECK(a.alpha == doctest::Approx(1.0));
    CHECK(a.lambda == doctest::Approx(18.0));

    const ModelParams b = nondimensionalize({1, 1, 1, 1, 1, 1, 1});
    CHECK(b == ModelParams{1.0, 1.0, 1.0});

    const ModelParams c = nondimensionalize({2, 4, 3, 2, 2, 5, 4});
    CHECK(c.mu == doctest::Approx(0.5));
    CHECK(c.alpha == doctest::Approx(10.0));
    CHECK(c.lambda == doctest::Approx(1.5));

    CHECK_THROWS_AS(nondimensionalize({0, 1, 1, 1, 1, 1, 1}), DomainError);
    CHECK_THROWS_AS(nondimensionalize({1, 1, -1, 1, 1, 1, 1}), DomainError);
  }

  TEST_CASE("rho on the hexagonal rectangle") {
    const DomainGeometry g = hex_geometry();
    CHECK(rho({0, 0}, g) == 0.0);
    CHECK(rho({0, 2}, g) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(rho({1, 1}, g) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(rho({0, 2}, DomainGeometry{3.7, g.ell2}) == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("growth rates") {
    CHECK(sigma(0.0, ModelParams{3.0, 1.7, 5.0}) == doctest::Approx(-3.4));
    CHECK(std::abs(sigma(0.5, kHexPoint)) < 1e-14);
    CHECK(sigma(2.0, kHexPoint) == doctest::Approx(-6.0));
  }

  TEST_CASE("critical coupling on the hexagonal rectangle") {
    const CriticalData cd = lambda_critical(kHexPoint, hex_geometry(), 16);
    CHECK(cd.lambda_c == doctest::Approx(18.0).epsilon(1e-12));
    REQUIRE(cd.critical_modes.size() == 2);
    CHECK(cd.critical_modes[0] == ModeIndex{0, 2});
    CHECK(cd.critical_modes[1] == ModeIndex{1, 1});
    CHECK(cd.rho_star == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cd.continuum_rho_star == doctest::Approx(0.5));
    CHECK(cd.continuum_lambda_c == doctest::Approx(18.0));
  }

  TEST_CASE("critical coupling equals the envelope when the lattice attains the minimizer") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    for (int i = 0; i < 20; ++i) {
      const ModelParams p{u(rng) * 4.0, u(rng), 1.0};
      const DomainGeometry g = make_critical_geometry(1, 1, p);
      const CriticalData cd = lambda_critical(p, g, 64);
      const double root = std::sqrt(p.mu) + std::sqrt(2.0 * p.alpha);
      CHECK(cd.lambda_c == doctest::Approx(root * root).epsilon(1e-12));
    }
  }

  TEST_CASE("degenerate critical set on the square") {
    const CriticalData cd = lambda_critical({1.0, 1.0, 1.0}, {kPi, kPi}, 8);
    CHECK(cd.lambda_c == doctest::Approx(6.0).epsilon(1e-12));
    REQUIRE(cd.critical_modes.size() == 3);
    CHECK(cd.critical_modes[0] == ModeIndex{0, 1});
    CHECK(cd.critical_modes[1] == ModeIndex{1, 0});
    CHECK(cd.critical_modes[2] == ModeIndex{1, 1});
  }

  TEST_CASE("search box too small is inconclusive") {
    // rho* = 1/2 needs k2 = 2 on this rectangle.
    CHECK_THROWS_AS(lambda_critical(kHexPoint, hex_geometry(), 2), InconclusiveSearchError);
  }

  TEST_CASE("exchange of stability on the hexagonal rectangle") {
    const DomainGeometry g = hex_geometry();
    for (const auto& [k, s] : pes_classification({8.0, 1.0, 17.9}, g, 16)) CHECK(s == -1);
    for (const auto& [k, s] : pes_classification(kHexPoint, g, 16)) {
      const bool crit = k == ModeIndex{1, 1} || k == ModeIndex{0, 2};
      CHECK(s == (crit ? 0 : -1));
    }
    for (const auto& [k, s] : pes_classification({8.0, 1.0, 18.1}, g, 16)) {
      const bool crit = k == ModeIndex{1, 1} || k == ModeIndex{0, 2};
      CHECK(s == (crit ? 1 : -1));
    }
  }

  TEST_CASE("every nonzero mode decays below the critical coupling") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int i = 0; i < 50; ++i) {
      const ModelParams base{u(rng) * 4.0, u(rng), 1.0};
      const DomainGeometry g{u(rng) * 5.0, u(rng) * 5.0};
      const CriticalData cd = lambda_critical(base, g, 32);
      ModelParams p = base;
      p.lambda = cd.lambda_c * (1.0 - 1e-6);
      for (const auto& [k, s] : pes_classification(p, g, 32, 0.0)) CHECK(s == -1);
    }
  }

  TEST_CASE("neutral coupling has its continuum minimum at sqrt(2 alpha / mu)") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.2, 4.0);
    for (int i = 0; i < 20; ++i) {
      const ModelParams p{u(rng) * 4.0, u(rng), 1.0};
      const double star = std::sqrt(2.0 * p.alpha / p.mu);
      double best_r = 0.0;
      double best = INFINITY;
      for (int j = 1; j <= 200000; ++j) {
        const double r = 1e-4 * j;
        const double v = neutral_lambda(r, p);
        if (v < best) {
          best = v;
          best_r = r;
        }
      }
      CHECK(best_r == doctest::Approx(star).epsilon(1e-3));
      CHECK(std::abs(sigma(star, ModelParams{p.mu, p.alpha, neutral_lambda(star, p)})) < 1e-12);
    }
  }

  TEST_CASE("critical geometry") {
    const DomainGeometry g = make_critical_geometry(1, 1, kHexPoint);
    CHECK(g.ell2 == doctest::Approx(2.0 * std::sqrt(2.0) * kPi).epsilon(1e-14));
    CHECK(g.ell1 == doctest::Approx(2.0 * std::sqrt(2.0) * kPi / std::sqrt(3.0)).epsilon(1e-14));

    const DomainGeometry g2 = make_critical_geometry(2, 1, kHexPoint);
    CHECK(g2.ell2 == doctest::Approx(2.0 * std::sqrt(2.0) * kPi).epsilon(1e-14));
    CHECK(g2.ell1 == doctest::Approx(4.0 * std::sqrt(2.0) * kPi / std::sqrt(3.0)).epsilon(1e-14));

    const DomainGeometry g3 = make_critical_geometry(1, 1, {2.0, 1.0, 1.0});
    CHECK(g3.ell2 == doctest::Approx(2.0 * kPi).epsilon(1e-14));
    CHECK(g3.ell1 == doctest::Approx(2.0 * kPi / std::sqrt(3.0)).epsilon(1e-14));

    CHECK_THROWS_AS(make_critical_geometry(2, 2, kHexPoint), DomainError);
    CHECK_THROWS_AS(make_critical_geometry(0, 1, kHexPoint), DomainError);

    for (int m = 1; m <= 5; ++m) {
      for (int n = 1; n <= 5; ++n) {
        if (std::gcd(m, n) != 1) continue;
        const DomainGeometry h = make_critical_geometry(m, n, {3.0, 0.7, 1.0});
        CHECK(std::abs(rho({m, n}, h) - rho({0, 2 * n}, h)) <= 1e-12);
        CHECK(std::abs(std::sqrt(3.0) * n * h.ell1 - m * h.ell2) <= 1e-12 * h.ell2);
      }
    }
  }

  TEST_CASE("Helmholtz inverse") {
    const DomainGeometry g = hex_geometry();
    const SpectralField e0 = SpectralField::basis(8, 8, g, {0, 0});
    CHECK(helmholtz_inverse(e0, 1.0)(0, 0) == doctest::Approx(1.0));

    const SpectralField v = helmholtz_inverse(SpectralField::basis(8, 8, g, {0, 2}), 1.0);
    CHECK(v(0, 2) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(v.l2_norm() == doctest::Approx(2.0 / 3.0 * SpectralField::basis(8, 8, g, {0, 2}).l2_norm()));

    const SpectralField zero(8, 8, g);
    CHECK(helmholtz_inverse(zero, 3.0).l2_norm() == 0.0);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SpectralField a(8, 8, g);
    SpectralField b(8, 8, g);
    for (double& x : a.data()) x = u(rng);
    for (double& x : b.data()) x = u(rng);
    const double c = 2.5;
    const SpectralField lhs = helmholtz_inverse(a + 3.0 * b, c);
    const SpectralField rhs = helmholtz_inverse(a, c) + 3.0 * helmholtz_inverse(b, c);
    const SpectralField va = helmholtz_inverse(a, c);
    for (std::size_t k1 = 0; k1 < 8; ++k1) {
      for (std::size_t k2 = 0; k2 < 8; ++k2) {
        CHECK(std::abs(lhs(k1, k2) - rhs(k1, k2)) <= 1e-12);
        const double r = rho({static_cast<int>(k1), static_cast<int>(k2)}, g);
        CHECK(std::abs((1.0 + r) * va(k1, k2) - c * a(k1, k2)) <= 1e-12);
      }
    }
  }
}
