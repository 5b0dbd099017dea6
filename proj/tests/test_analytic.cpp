#include <doctest.h>

#include <cmath>
#include <random>

#include "bbm/analytic.hpp"
#include "bbm/bessel.hpp"
#include "bbm/engine.hpp"
#include "bbm/error.hpp"
#include "oracles.hpp"

using namespace bbm;

TEST_SUITE("analytic") {

TEST_CASE("principal eigenvalues") {
  CHECK(std::fabs(principal_eigenvalue(1, 1.0) - oracle::pi * oracle::pi / 8) < 1e-12);
  CHECK(std::fabs(principal_eigenvalue(3, 1.0) - oracle::pi * oracle::pi / 2) < 1e-12);
  CHECK(std::fabs(principal_eigenvalue(2, 1.0) - oracle::lambda2_frozen) < 1e-10);
  CHECK(principal_eigenvalue(2, 2.0) == doctest::Approx(0.7228982453683481).epsilon(1e-10));
  for (int d = 1; d <= 10; ++d) {
    const auto ev = unit_ball_eigenvalue(d);
    const double z = first_positive_zero(0.5 * d - 1.0);
    CHECK(ev.nu == 0.5 * d - 1.0);
    CHECK(ev.first_zero == z);
    CHECK(ev.lambda_d == z * z / 2);
    CHECK(principal_eigenvalue(d, 1.0) == ev.lambda_d);
  }
}

TEST_CASE("interval confinement series") {
  using M = ConfinementMode;
  CHECK(confinement_center(1, 1.0, 0.0, M::series) == 1.0);
  CHECK(confinement_center(3, 2.0, 0.0, M::leading_term) == 1.0);
  CHECK(confinement_center(5, 2.0, 0.0, M::monte_carlo) == 1.0);
  CHECK(confinement_center(1, 1.0, 1.0, M::series) ==
        doctest::Approx(oracle::series_d1_t1).epsilon(1e-12));
  CHECK(confinement_center(1, 1.0, 4.0, M::series) ==
        doctest::Approx(oracle::series_d1_t4).epsilon(1e-12));
  const double s10 = confinement_center(1, 1.0, 10.0, M::series);
  const double l10 = confinement_center(1, 1.0, 10.0, M::leading_term);
  CHECK(s10 == doctest::Approx(oracle::series_d1_t10).epsilon(1e-12));
  CHECK(std::fabs(s10 - l10) / s10 < 1e-6);
  // Short times use a different expansion internally.
  for (double t : {0.01, 0.05, 0.2, 0.49, 0.51, 0.8, 2.0, 7.0}) {
    CHECK(confinement_center(1, 1.0, t, M::series) ==
          doctest::Approx(oracle::interval_confinement(1.0, t)).epsilon(1e-12));
  }
}

TEST_CASE("series is a probability, decreasing, and bounded by its leading term") {
  using M = ConfinementMode;
  double prev = 1.0;
  for (int i = 1; i <= 400; ++i) {
    const double t = 0.025 * i;
    const double s = confinement_center(1, 1.0, t, M::series);
    CHECK(s > 0.0);
    CHECK(s <= 1.0);
    CHECK(s < prev);
    prev = s;
    // The first omitted term is negative, so the full sum sits below the
    // leading term once the probability is below one.
    CHECK(s <= confinement_center(1, 1.0, t, M::leading_term) * (1 + 1e-12));
  }
}

TEST_CASE("ball series in three dimensions") {
  using M = ConfinementMode;
  const double s = confinement_center(3, 1.0, 2.0, M::series);
  CHECK(s == doctest::Approx(2 * std::exp(-oracle::pi * oracle::pi)).epsilon(1e-6));
  CHECK(confinement_center(3, 1.0, 8.0, M::series) ==
        doctest::Approx(confinement_center(3, 1.0, 8.0, M::leading_term)).epsilon(1e-12));
  CHECK_THROWS_AS(confinement_center(2, 1.0, 1.0, M::series), Error);
  try {
    confinement_center(4, 1.0, 1.0, M::series);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported_mode);
  }
}

TEST_CASE("center leading coefficient") {
  CHECK(center_coefficient(1) == doctest::Approx(4 / oracle::pi).epsilon(1e-13));
  CHECK(center_coefficient(3) == doctest::Approx(2.0).epsilon(1e-13));
  // Limit of the off-center coefficient at the origin.
  for (int d = 1; d <= 6; ++d) {
    CHECK(offcenter_coefficient(d, 1e-7) == doctest::Approx(center_coefficient(d)).epsilon(1e-9));
  }
}

TEST_CASE("off-center confinement") {
  const auto oc = confinement_offcenter(3, 0.5, 1.0, 10.0);
  CHECK(oc.coefficient == doctest::Approx(oracle::offcenter_d3_coeff).epsilon(1e-12));
  CHECK(oc.probability == doctest::Approx(4.71342356574314e-22).epsilon(1e-11));
  CHECK(oc.asymptotic_regime);
  // Closed forms for nu = +-1/2.
  for (double rho : {0.1, 0.3, 0.5, 0.9}) {
    CHECK(offcenter_coefficient(1, rho) ==
          doctest::Approx(4 / oracle::pi * std::cos(oracle::pi * rho / 2)).epsilon(1e-12));
    CHECK(offcenter_coefficient(3, rho) ==
          doctest::Approx(2 * std::sin(oracle::pi * rho) / (oracle::pi * rho)).epsilon(1e-12));
  }
  for (int d = 1; d <= 5; ++d) {
    double prev = center_coefficient(d);
    for (int i = 1; i < 100; ++i) {
      const double c = offcenter_coefficient(d, 0.01 * i);
      CHECK(c < prev);
      prev = c;
    }
    CHECK(offcenter_coefficient(d, 1 - 1e-9) < 1e-7);
  }
  const auto a = confinement_offcenter(2, 0.3, 1.0, 3.0);
  const auto b = confinement_offcenter(2, 0.6, 2.0, 12.0);
  CHECK(a.probability == doctest::Approx(b.probability).epsilon(1e-12));
  CHECK_THROWS_AS(confinement_offcenter(2, 1.0, 1.0, 3.0), Error);
  CHECK_THROWS_AS(confinement_offcenter(2, 1.5, 1.0, 3.0), Error);
  const double j1 = first_positive_zero(0.0), j2 = second_positive_zero(0.0);
  CHECK(confinement_offcenter(2, 0.3, 1.0, 0.1).regime_time ==
        doctest::Approx(2 / (j2 * j2 - j1 * j1)).epsilon(1e-12));
  CHECK_FALSE(confinement_offcenter(2, 0.3, 1.0, 0.01).asymptotic_regime);
}

TEST_CASE("off-center leading term against Monte Carlo") {
  // At t = 0.5 the next mode is negligible, so the leading term is the answer.
  const double t = 0.5;
  const auto oc = confinement_offcenter(3, 0.5, 1.0, t);
  const auto mc = confinement_probability_mc(3, 1.0, t, 0.5, 0.001, true, 40000, 11, 0);
  CHECK(std::fabs(mc.value - oc.probability) < 4 * mc.std_error + 0.03 * oc.probability);
}

TEST_CASE("comparison constant") {
  CHECK(comparison_constant(1, 0.5) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(comparison_constant(3, 0.5) == doctest::Approx(oracle::pi / 2).epsilon(1e-12));
  for (int d = 1; d <= 5; ++d) {
    CHECK(comparison_constant(d, 1e-6) == doctest::Approx(1.0).epsilon(1e-8));
    const double t = 7.0;
    const double ratio = confinement_center(d, 1.0, t, ConfinementMode::leading_term) /
                         confinement_offcenter(d, 0.4, 1.0, t).probability;
    CHECK(ratio == doctest::Approx(comparison_constant(d, 0.4)).epsilon(1e-12));
  }
}

TEST_CASE("comparison constant bounds the simulated ratio") {
  const double bound = comparison_constant(1, 0.5) * 1.1;
  const auto p0 = confinement_probability_mc(1, 1.0, 3.0, 0.0, 0.002, true, 100000, 21, 0);
  const auto pa = confinement_probability_mc(1, 1.0, 3.0, 0.5, 0.002, true, 100000, 22, 0);
  CHECK(p0.value / pa.value <= bound);
}

TEST_CASE("expected mass") {
  ModelParams p;
  p.beta = 0.125;
  CHECK(expected_mass(p, 0.0, 1.0) == 0.0);
  CHECK(expected_mass(p, 80.0, 0.1) == doctest::Approx(10 + std::log(0.1)).epsilon(1e-14));
}

TEST_CASE("rate function") {
  CHECK(rate_function(1, 2).value == 1);
  CHECK(rate_function(3, 2).value == 2);
  CHECK(rate_function(2, 2).value == 2);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.01, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double beta = u(gen), k1 = u(gen), k2 = u(gen);
    const double i1 = rate_function(k1, beta).value, i2 = rate_function(k2, beta).value;
    CHECK(std::fabs(i1 - i2) <= std::fabs(k1 - k2) + 1e-15);
    const double crit = std::sqrt(2 * beta);
    CHECK(rate_function(crit + k1, beta).value == doctest::Approx(crit).epsilon(1e-15));
  }
}

TEST_CASE("strategy exponents") {
  const auto s = strategy_exponents(1.0, 2.0);
  CHECK(s.escape_exponent == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s.optimal_k == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(escape_cost(0.5, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
  const auto small = strategy_exponents(0.3, 0.125);
  CHECK(small.escape_exponent == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(small.optimal_k == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(small.suppression_exponent == 0.3);
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.01, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const double kappa = u(gen), beta = u(gen);
    const auto e = strategy_exponents(kappa, beta);
    CHECK(std::min(e.escape_exponent, e.suppression_exponent) ==
          doctest::Approx(rate_function(kappa, beta).value).epsilon(1e-13));
    // The optimal k really is a minimum of the escape cost.
    CHECK(escape_cost(e.optimal_k, beta) <= escape_cost(e.optimal_k * 1.01, beta));
    CHECK(escape_cost(e.optimal_k, beta) <= escape_cost(e.optimal_k * 0.99, beta));
  }
}

TEST_CASE("variational problem") {
  const auto v = variational_minimize(3.0, 2.0);
  CHECK(v.rho_star == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(v.f_min == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(v.upper_bound_exponent == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(v.interior_minimum);
  CHECK(variational_minimize(1.0, 2.0).upper_bound_exponent == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.01, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double kappa = u(gen), beta = u(gen);
    const auto r = variational_minimize(kappa, beta);
    CHECK(std::fabs(r.upper_bound_exponent - rate_function(kappa, beta).value) < 1e-10);
    CHECK(r.rho_star > 0.0);
    CHECK(r.rho_star <= 1.0);
    if (kappa > std::sqrt(2 * beta)) CHECK(r.rho_star < 0.5);
  }
}

TEST_CASE("variational minimum against a grid search") {
  for (auto [kappa, beta] : {std::pair{3.0, 2.0}, {0.9, 0.125}, {0.2, 0.125}, {5.0, 0.3}}) {
    // Coarse grid, then golden-section refinement on the best cell.
    const int n = 20000;
    double best = 1e300, best_rho = 1.0;
    for (int i = 1; i <= n; ++i) {
      const double rho = static_cast<double>(i) / n;
      const double f = rho * kappa / beta + 1 / (2 * kappa * rho);
      if (f < best) best = f, best_rho = rho;
    }
    double lo = std::max(best_rho - 1.0 / n, 1e-12), hi = std::min(best_rho + 1.0 / n, 1.0);
    const double g = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 200; ++it) {
      const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
      if (variational_objective(a, kappa, beta) < variational_objective(b, kappa, beta)) {
        hi = b;
      } else {
        lo = a;
      }
    }
    const double grid_min = variational_objective(0.5 * (lo + hi), kappa, beta);
    const auto r = variational_minimize(kappa, beta);
    CHECK(std::fabs(r.f_min - grid_min) < 1e-8);
    CHECK(std::fabs(r.rho_star - 0.5 * (lo + hi)) < 1e-6);
  }
}

}  // TEST_SUITE
