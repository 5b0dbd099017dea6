#pragma once

#include <cstdint>
#include <string_view>

#include "bbm/model.hpp"

namespace bbm {

struct BesselIndex {
  double nu = 0.0;

  static BesselIndex for_dimension(int d) { return {0.5 * d - 1.0}; }
};

struct Eigenvalue {
  double nu = 0.0;
  double first_zero = 0.0;  // j_{nu,1}
  double lambda_d = 0.0;    // j_{nu,1}^2 / 2, unit ball
};

// Principal Dirichlet eigenvalue of -1/2 Laplacian on the unit ball in R^d.
Eigenvalue unit_ball_eigenvalue(int d);

// j_{nu,1}^2 / (2 radius^2) with nu = d/2 - 1.
double principal_eigenvalue(int d, double radius);

enum class ConfinementMode { leading_term, series, monte_carlo };

std::string_view to_string(ConfinementMode mode);
ConfinementMode parse_confinement_mode(std::string_view text);

struct ConfinementMcOptions {
  std::int64_t paths = 200000;
  std::uint64_t seed = 1;
  double dt = 0.0;  // 0 picks 0.005 b^2
  bool bridge_correction = true;
  int threads = 0;
};

// Leading coefficient of P^0(tau_b >= t) as t -> infinity:
//   j^{nu-1} / (2^{nu-1} Gamma(nu+1) J_{nu+1}(j)),  j = j_{nu,1}.
// Equals the a -> 0 limit of offcenter_coefficient.
double center_coefficient(int d);

// 2 (b/a)^nu J_nu(a j / b) / (j J_{nu+1}(j)); depends on a/b only.
double offcenter_coefficient(int d, double ratio);

// P^0(tau_b >= t): probability that a d-dimensional Brownian motion started
// at the center stays in B(0, b) up to time t.
//
// leading_term returns the asymptotic leading mode (it exceeds 1 for small t).
// series is exact and available for d = 1 and d = 3, where the Bessel zeros
// are explicit; other dimensions raise ErrorCode::unsupported_mode.
// monte_carlo runs the engine on single paths with the bridge-corrected
// running maximum.
double confinement_center(int d, double b, double t, ConfinementMode mode,
                          const ConfinementMcOptions& mc = {});

struct OffCenterConfinement {
  double probability = 0.0;  // leading-order value
  double coefficient = 0.0;
  // t >= 2 b^2 / (j_{nu,2}^2 - j_{nu,1}^2): heuristic only, the second mode has
  // decayed by a factor e relative to the first.
  bool asymptotic_regime = false;
  double regime_time = 0.0;
};

OffCenterConfinement confinement_offcenter(int d, double a, double b, double t);

// Ratio of the center and off-center leading coefficients. The probability
// ratio P^0 / P^a converges to this value as t -> infinity.
double comparison_constant(int d, double ratio);

// log E[n_t] = log p_t + beta t (many-to-one).
double expected_mass(const ModelParams& params, double t, double p_t);

struct RateFunctionValue {
  double kappa = 0.0;
  double beta = 0.0;
  double value = 0.0;
};

RateFunctionValue rate_function(double kappa, double beta);

struct StrategyExponents {
  double escape_exponent = 0.0;       // sqrt(2 beta)
  double suppression_exponent = 0.0;  // kappa
  double optimal_k = 0.0;             // 1 / sqrt(2 beta)
};

// The two lower-bound strategies: kill all mass by running the initial
// particle out of the ball over time k r(t) without branching, or suppress
// branching long enough that the mass falls below the threshold.
StrategyExponents strategy_exponents(double kappa, double beta);

// beta k + 1 / (2 k): cost per unit radius of the escape strategy.
double escape_cost(double k, double beta);

struct VariationalResult {
  double rho_star = 0.0;
  double f_min = 0.0;  // inf of f over (0, 1]
  double upper_bound_exponent = 0.0;
  bool interior_minimum = false;  // true when kappa > sqrt(2 beta)
};

// f(rho) = rho kappa / beta + 1 / (2 kappa rho).
double variational_objective(double rho, double kappa, double beta);

// Minimizes f over (0, 1] and returns beta * min(inf f, kappa / beta).
VariationalResult variational_minimize(double kappa, double beta);

}  // namespace bbm
