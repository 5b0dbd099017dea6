#include "bbm/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bbm/bessel.hpp"
#include "bbm/engine.hpp"
#include "bbm/error.hpp"

namespace bbm {
namespace {

constexpr double kPi = std::numbers::pi;

void require_dimension(int d) {
  if (d < 1) fail(ErrorCode::invalid_argument, "dimension must be >= 1");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// d = 1, started at the center of (-b, b).
double interval_series(double b, double t) {
  const double tau = t / (b * b);
  if (tau < 0.5) {
    // Method of images: sum_k (-1)^k [Phi((1 - 2k) b / sqrt t) - Phi((-1 - 2k) b / sqrt t)].
    const double s = 1.0 / std::sqrt(tau);
    double sum = normal_cdf(s) - normal_cdf(-s);
    for (int k = 1; k < 100; ++k) {
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      const double plus = normal_cdf((1.0 - 2.0 * k) * s) - normal_cdf((-1.0 - 2.0 * k) * s);
      const double minus = normal_cdf((1.0 + 2.0 * k) * s) - normal_cdf((-1.0 + 2.0 * k) * s);
      const double term = sign * (plus + minus);
      sum += term;
      if (std::abs(term) < 1e-18) break;
    }
    return sum;
  }
  // sum_n 4 (-1)^n / ((2n+1) pi) exp(-(2n+1)^2 pi^2 tau / 8)
  double sum = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const double m = 2.0 * n + 1.0;
    const double term = 4.0 / (m * kPi) * std::exp(-m * m * kPi * kPi * tau / 8.0);
    sum += (n % 2 == 0) ? term : -term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

// d = 3: zeros of J_{1/2} are n pi, coefficients 2 (-1)^{n+1}.
double ball3_series(double b, double t) {
  const double tau = t / (b * b);
  const int terms = static_cast<int>(std::ceil(std::sqrt(2.0 * 45.0 / (kPi * kPi * tau)))) + 2;
  double sum = 0.0;
  // summed from the tail so the small alternating terms are not swamped
  for (int n = terms; n >= 1; --n) {
    const double term = 2.0 * std::exp(-n * n * kPi * kPi * tau / 2.0);
    sum += (n % 2 == 1) ? term : -term;
  }
  return sum;
}

}  // namespace

Eigenvalue unit_ball_eigenvalue(int d) {
  require_dimension(d);
  Eigenvalue ev;
  ev.nu = 0.5 * d - 1.0;
  ev.first_zero = first_positive_zero(ev.nu);
  ev.lambda_d = ev.first_zero * ev.first_zero / 2.0;
  return ev;
}

double principal_eigenvalue(int d, double radius) {
  if (!(radius > 0.0)) fail(ErrorCode::invalid_argument, "radius must be positive");
  return unit_ball_eigenvalue(d).lambda_d / (radius * radius);
}

std::string_view to_string(ConfinementMode mode) {
  switch (mode) {
    case ConfinementMode::leading_term: return "leading_term";
    case ConfinementMode::series: return "series";
    case ConfinementMode::monte_carlo: return "monte_carlo";
  }
  return "series";
}

ConfinementMode parse_confinement_mode(std::string_view text) {
  if (text == "leading_term" || text == "leading") return ConfinementMode::leading_term;
  if (text == "series") return ConfinementMode::series;
  if (text == "monte_carlo" || text == "mc") return ConfinementMode::monte_carlo;
  fail(ErrorCode::unsupported_mode, "unknown confinement mode '" + std::string(text) + "'");
}

double center_coefficient(int d) {
  require_dimension(d);
  const double nu = 0.5 * d - 1.0;
  const double j = first_positive_zero(nu);
  return std::pow(j, nu - 1.0) /
         (std::pow(2.0, nu - 1.0) * std::tgamma(nu + 1.0) * bessel_j(nu + 1.0, j));
}

double offcenter_coefficient(int d, double ratio) {
  require_dimension(d);
  if (!(ratio > 0.0 && ratio < 1.0)) {
    fail(ErrorCode::invalid_argument, "start distance must satisfy 0 < a < b");
  }
  const double nu = 0.5 * d - 1.0;
  const double j = first_positive_zero(nu);
  return 2.0 * std::pow(1.0 / ratio, nu) * bessel_j(nu, ratio * j) / (j * bessel_j(nu + 1.0, j));
}

double confinement_center(int d, double b, double t, ConfinementMode mode,
                          const ConfinementMcOptions& mc) {
  require_dimension(d);
  if (!(b > 0.0)) fail(ErrorCode::invalid_argument, "ball radius must be positive");
  if (!(t >= 0.0)) fail(ErrorCode::domain_error, "time must be nonnegative");
  if (t == 0.0) return 1.0;
  switch (mode) {
    case ConfinementMode::leading_term: {
      const double j = first_positive_zero(0.5 * d - 1.0);
      return center_coefficient(d) * std::exp(-j * j * t / (2.0 * b * b));
    }
    case ConfinementMode::series:
      if (d == 1) return interval_series(b, t);
      if (d == 3) return ball3_series(b, t);
      fail(ErrorCode::unsupported_mode,
           "series mode is available for d = 1 and d = 3 only (got d = " + std::to_string(d) + ")");
    case ConfinementMode::monte_carlo: {
      const double dt = mc.dt > 0.0 ? mc.dt : 0.005 * b * b;
      return confinement_probability_mc(d, b, t, 0.0, std::min(dt, t), mc.bridge_correction,
                                        mc.paths, mc.seed, mc.threads)
          .value;
    }
  }
  fail(ErrorCode::unsupported_mode, "unknown confinement mode");
}

OffCenterConfinement confinement_offcenter(int d, double a, double b, double t) {
  require_dimension(d);
  if (!(a > 0.0) || !(a < b)) fail(ErrorCode::invalid_argument, "need 0 < a < b");
  if (!(t >= 0.0)) fail(ErrorCode::domain_error, "time must be nonnegative");
  const double nu = 0.5 * d - 1.0;
  const double j1 = first_positive_zero(nu);
  const double j2 = second_positive_zero(nu);
  OffCenterConfinement out;
  out.coefficient = offcenter_coefficient(d, a / b);
  out.probability = out.coefficient * std::exp(-j1 * j1 * t / (2.0 * b * b));
  out.regime_time = 2.0 * b * b / (j2 * j2 - j1 * j1);
  out.asymptotic_regime = t >= out.regime_time;
  return out;
}

double comparison_constant(int d, double ratio) {
  return center_coefficient(d) / offcenter_coefficient(d, ratio);
}

double expected_mass(const ModelParams& params, double t, double p_t) {
  if (!(t >= 0.0)) fail(ErrorCode::domain_error, "time must be nonnegative");
  if (!(p_t > 0.0 && p_t <= 1.0)) fail(ErrorCode::domain_error, "p_t must lie in (0, 1]");
  return std::log(p_t) + params.beta * t;
}

RateFunctionValue rate_function(double kappa, double beta) {
  if (!(kappa > 0.0) || !(beta > 0.0)) {
    fail(ErrorCode::invalid_argument, "kappa and beta must be positive");
  }
  return {kappa, beta, std::min(kappa, std::sqrt(2.0 * beta))};
}

double escape_cost(double k, double beta) { return beta * k + 1.0 / (2.0 * k); }

StrategyExponents strategy_exponents(double kappa, double beta) {
  if (!(kappa > 0.0) || !(beta > 0.0)) {
    fail(ErrorCode::invalid_argument, "kappa and beta must be positive");
  }
  StrategyExponents out;
  out.optimal_k = 1.0 / std::sqrt(2.0 * beta);
  out.escape_exponent = escape_cost(out.optimal_k, beta);
  out.suppression_exponent = kappa;
  return out;
}

double variational_objective(double rho, double kappa, double beta) {
  return rho * kappa / beta + 1.0 / (2.0 * kappa * rho);
}

VariationalResult variational_minimize(double kappa, double beta) {
  if (!(kappa > 0.0) || !(beta > 0.0)) {
    fail(ErrorCode::invalid_argument, "kappa and beta must be positive");
  }
  VariationalResult out;
  // Stationary point of f; inside (0, 1/2) exactly when kappa > sqrt(2 beta).
  const double stationary = std::sqrt(beta / 2.0) / kappa;
  out.rho_star = std::min(stationary, 1.0);
  out.f_min = variational_objective(out.rho_star, kappa, beta);
  out.interior_minimum = kappa > std::sqrt(2.0 * beta);
  out.upper_bound_exponent = beta * std::min(out.f_min, kappa / beta);
  return out;
}

}  // namespace bbm
