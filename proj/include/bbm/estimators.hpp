#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bbm/engine.hpp"
#include "bbm/estimate.hpp"
#include "bbm/model.hpp"

namespace bbm {

struct LdOptions {
  EstimatorMode mode = EstimatorMode::stratified;
  // T0 = -(1/beta) log((1 - delta) gamma_t), capped at t.
  double delta = 0.5;
  std::int64_t pt_paths = 200000;
  // Supplying p_t skips the pilot run (used to compare estimators on equal footing).
  std::optional<Estimate> p_t;
  int threads = 0;
  std::int64_t max_particles = std::int64_t{1} << 22;
};

struct LdEstimate {
  Estimate probability;  // std_error includes the propagated p_t uncertainty
  Estimate p_t;
  DeviationThreshold threshold;
  double mc_std_error = 0.0;
  double pt_std_error_contribution = 0.0;
  // Stratified mode only.
  double t0 = 0.0;
  double stratum_weight = 0.0;  // P(A) = exp(-beta T0)
  Estimate stratum_no_branch;   // P(E | A)
  Estimate stratum_branch;      // P(E | A^c)
  std::int64_t truncated_runs = 0;
};

// P(n_t < gamma_t p_t e^{beta t}) with kappa taken from params.
//
// naive: fraction of unconditioned replicates below the threshold.
// stratified: P(E) = P(A) P(E | A) + P(A^c) P(E | A^c) with A the event that
// the initial particle does not branch before T0; replicates are split
// evenly between the two conditioned samplers.
LdEstimate estimate_ld_probability(const ModelParams& params, double t, std::int64_t replicates,
                                   std::uint64_t seed, const LdOptions& options = {});

// Strategy time f(t) = -(1/beta) log((1 - delta) gamma_t).
double suppression_time(const ModelParams& params, double t, double delta);

// Monte Carlo p_t for the ball B(0, r(t)) under the engine discretization.
Estimate estimate_confinement(const ModelParams& params, double t, std::int64_t paths,
                              std::uint64_t seed, int threads = 0);

struct MassEstimate {
  Estimate mean;          // plain sample mean of n_t
  double log_mean = 0.0;  // log of the sample mean
  double log_std_error = 0.0;
};

MassEstimate estimate_expected_mass(const ModelParams& params, double t, std::int64_t replicates,
                                    std::uint64_t seed, int threads = 0);

struct DecayPoint {
  double r = 0.0;
  double probability = 0.0;
  double std_error = 0.0;
};

struct DecayFit {
  std::vector<std::pair<double, double>> points;  // (r, log P)
  // log P = intercept - slope r
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_std_error = 0.0;  // propagated from per-point standard errors
};

DecayFit fit_decay_rate(std::span<const DecayPoint> points);

// (r(t))^2 (log n / t - beta)
double lln_value(double n, double t, double r, double beta);

struct LlnSummary {
  double t = 0.0;
  double r = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double fraction_within = 0.0;  // |statistic + lambda_d| <= epsilon, over all replicates
  double zero_fraction = 0.0;    // replicates with n_t = 0
  bool unreliable = false;       // zero_fraction > 0.2
  double target = 0.0;           // -lambda_d
  std::int64_t replicates = 0;

  double iqr() const { return q3 - q1; }
};

// One trajectory per replicate observed at every time in `times`, so the
// summaries at different times share randomness.
std::vector<LlnSummary> lln_statistic(const ModelParams& params, std::span<const double> times,
                                      std::int64_t replicates, std::uint64_t seed,
                                      double epsilon = 0.25, int threads = 0);

struct PropATest {
  double tv_distance = 0.0;
  bool tail_check = false;  // P(N_t > 10) within 3 SE of (1 - e^{-beta t})^10
  double tail_empirical = 0.0;
  double tail_expected = 0.0;
  double tail_std_error = 0.0;
  double mean = 0.0;
  double mean_std_error = 0.0;
  double expected_mean = 0.0;
  std::vector<std::int64_t> counts;  // counts[k] = #replicates with N_t = k

  double empirical_tail(std::int64_t k) const;  // P(N_t > k)
};

PropATest prop_a_distribution_test(double beta, double t, std::int64_t replicates,
                                   std::uint64_t seed, int threads = 0);

}  // namespace bbm
