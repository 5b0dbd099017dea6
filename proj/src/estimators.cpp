#include "bbm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bbm/analytic.hpp"
#include "bbm/error.hpp"
#include "bbm/parallel.hpp"
#include "bbm/rng.hpp"

namespace bbm {
namespace {

enum SeedTag : std::uint64_t {
  kTagConfinement = 10,
  kTagNaive = 11,
  kTagNoBranch = 12,
  kTagBranch = 13,
};

struct Sample {
  std::vector<std::int64_t> active;
  std::int64_t truncated = 0;
};

Sample sample_active(const ModelParams& params, double t, std::int64_t replicates,
                     std::uint64_t seed, const StrategyCondition& condition, int threads,
                     std::int64_t max_particles) {
  Sample out;
  out.active.assign(static_cast<std::size_t>(replicates), 0);
  std::vector<char> truncated(static_cast<std::size_t>(replicates), 0);
  SimulationOptions options;
  options.max_particles = max_particles;
  const double obs[] = {t};
  parallel_for(replicates, threads, [&](std::int64_t rep) {
    const auto res = simulate(params, obs, seed, condition, options, static_cast<std::uint64_t>(rep));
    if (res.snapshots.empty()) {
      truncated[static_cast<std::size_t>(rep)] = 1;
      out.active[static_cast<std::size_t>(rep)] = std::numeric_limits<std::int64_t>::max();
    } else {
      out.active[static_cast<std::size_t>(rep)] = res.snapshots.front().active;
    }
  });
  out.truncated = std::accumulate(truncated.begin(), truncated.end(), std::int64_t{0});
  return out;
}

std::int64_t hits_below(const std::vector<std::int64_t>& values, double threshold) {
  return std::count_if(values.begin(), values.end(),
                       [threshold](std::int64_t n) { return static_cast<double>(n) < threshold; });
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || std::isinf(sorted[lo])) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

double suppression_time(const ModelParams& params, double t, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCode::invalid_argument, "delta must be in (0, 1)");
  return -(std::log1p(-delta) + params.log_gamma_at(t)) / params.beta;
}

Estimate estimate_confinement(const ModelParams& params, double t, std::int64_t paths,
                              std::uint64_t seed, int threads) {
  const double b = params.radius.at(t);
  if (!(b > 0.0)) fail(ErrorCode::domain_error, "r(t) must be positive");
  return confinement_probability_mc(params.dimension, b, t, 0.0, std::min(params.dt, t),
                                    params.bridge_correction, paths, seed, threads);
}

LdEstimate estimate_ld_probability(const ModelParams& params, double t, std::int64_t replicates,
                                   std::uint64_t seed, const LdOptions& options) {
  params.validate();
  if (!(t > 0.0) || t > params.t_max) fail(ErrorCode::invalid_argument, "need 0 < t <= t_max");
  if (!(params.radius.at(t) > 0.0)) {
    fail(ErrorCode::invalid_argument, "gamma_t must be < 1, which needs r(t) > 0");
  }
  if (replicates < 2) fail(ErrorCode::invalid_argument, "need at least two replicates");

  LdEstimate out;
  out.p_t = options.p_t ? *options.p_t
                        : estimate_confinement(params, t, options.pt_paths,
                                               derive_seed(seed, kTagConfinement), options.threads);
  if (out.p_t.zero_hits || !(out.p_t.value > 0.0)) {
    fail(ErrorCode::insufficient_data,
         "p_t estimate has no confined paths; raise the confinement path count");
  }
  out.threshold = deviation_threshold(params, t, out.p_t.value);
  const double threshold = out.threshold.threshold();
  const double rel = out.p_t.std_error / out.p_t.value;
  const double thr_hi = threshold * (1.0 + rel);
  const double thr_lo = threshold * (1.0 - rel);

  if (options.mode == EstimatorMode::naive) {
    const Sample s = sample_active(params, t, replicates, derive_seed(seed, kTagNaive),
                                   StrategyCondition::none(), options.threads,
                                   options.max_particles);
    out.truncated_runs = s.truncated;
    out.probability = proportion_estimate(hits_below(s.active, threshold), replicates);
    out.mc_std_error = out.probability.std_error;
    const double p_hi = static_cast<double>(hits_below(s.active, thr_hi)) / replicates;
    const double p_lo = static_cast<double>(hits_below(s.active, thr_lo)) / replicates;
    out.pt_std_error_contribution = 0.5 * std::abs(p_hi - p_lo);
  } else {
    out.t0 = std::min(suppression_time(params, t, options.delta), t);
    out.stratum_weight = std::exp(-params.beta * out.t0);
    const double w = out.stratum_weight;
    const std::int64_t m_a = replicates / 2;
    const std::int64_t m_c = replicates - m_a;
    const Sample a = sample_active(params, t, m_a, derive_seed(seed, kTagNoBranch),
                                   StrategyCondition::no_branch_until(params.beta, out.t0),
                                   options.threads, options.max_particles);
    const Sample c = sample_active(params, t, m_c, derive_seed(seed, kTagBranch),
                                   StrategyCondition::branch_before(params.beta, out.t0),
                                   options.threads, options.max_particles);
    out.truncated_runs = a.truncated + c.truncated;
    const std::int64_t hits_a = hits_below(a.active, threshold);
    const std::int64_t hits_c = hits_below(c.active, threshold);
    out.stratum_no_branch = proportion_estimate(hits_a, m_a, EstimatorMode::stratified);
    out.stratum_branch = proportion_estimate(hits_c, m_c, EstimatorMode::stratified);

    const double pa = static_cast<double>(hits_a) / m_a;
    const double pc = static_cast<double>(hits_c) / m_c;
    Estimate& e = out.probability;
    e.mode = EstimatorMode::stratified;
    e.replicates = replicates;
    e.value = w * pa + (1.0 - w) * pc;
    e.std_error = std::sqrt(w * w * pa * (1.0 - pa) / m_a + (1.0 - w) * (1.0 - w) * pc * (1.0 - pc) / m_c);
    e.zero_hits = hits_a == 0 && hits_c == 0;
    e.upper_bound = w * out.stratum_no_branch.upper_bound + (1.0 - w) * out.stratum_branch.upper_bound;
    if (e.zero_hits) e.value = e.upper_bound;
    out.mc_std_error = e.std_error;

    auto combined = [&](double thr) {
      return w * static_cast<double>(hits_below(a.active, thr)) / m_a +
             (1.0 - w) * static_cast<double>(hits_below(c.active, thr)) / m_c;
    };
    out.pt_std_error_contribution = 0.5 * std::abs(combined(thr_hi) - combined(thr_lo));
  }
  out.probability.std_error = std::hypot(out.mc_std_error, out.pt_std_error_contribution);
  return out;
}

MassEstimate estimate_expected_mass(const ModelParams& params, double t, std::int64_t replicates,
                                    std::uint64_t seed, int threads) {
  if (replicates < 1) fail(ErrorCode::invalid_argument, "need at least one replicate");
  if (!(t >= 0.0)) fail(ErrorCode::domain_error, "time must be nonnegative");
  const double obs[] = {t};
  std::vector<double> n(static_cast<std::size_t>(replicates));
  parallel_for(replicates, threads, [&](std::int64_t rep) {
    const auto res = simulate(params, obs, seed, StrategyCondition::none(), {},
                              static_cast<std::uint64_t>(rep));
    if (res.truncated) fail(ErrorCode::budget_exceeded, "particle budget exceeded before t");
    n[static_cast<std::size_t>(rep)] = static_cast<double>(res.snapshots.front().active);
  });
  const double m = static_cast<double>(replicates);
  const double mean = std::accumulate(n.begin(), n.end(), 0.0) / m;
  double ss = 0.0;
  for (double x : n) ss += (x - mean) * (x - mean);
  MassEstimate out;
  out.mean.value = mean;
  out.mean.replicates = replicates;
  out.mean.std_error = replicates > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
  out.mean.upper_bound = mean;
  out.log_mean = std::log(mean);
  out.log_std_error = mean > 0.0 ? out.mean.std_error / mean : std::numeric_limits<double>::infinity();
  return out;
}

DecayFit fit_decay_rate(std::span<const DecayPoint> points) {
  if (points.size() < 3) fail(ErrorCode::insufficient_data, "decay fit needs at least 3 points");
  DecayFit fit;
  for (const auto& p : points) {
    if (!(p.probability > 0.0)) {
      fail(ErrorCode::insufficient_data,
           "decay fit needs positive probabilities; raise the replicate count");
    }
    fit.points.emplace_back(p.r, std::log(p.probability));
  }
  const double n = static_cast<double>(points.size());
  double mean_r = 0.0;
  double mean_y = 0.0;
  for (const auto& [r, logp] : fit.points) {
    mean_r += r;
    mean_y += -logp;
  }
  mean_r /= n;
  mean_y /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [r, logp] : fit.points) {
    sxx += (r - mean_r) * (r - mean_r);
    sxy += (r - mean_r) * (-logp - mean_y);
    syy += (-logp - mean_y) * (-logp - mean_y);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::insufficient_data, "decay fit needs distinct radii");
  fit.slope = sxy / sxx;
  fit.intercept = -(mean_y - fit.slope * mean_r);
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  double var = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double weight = (points[i].r - mean_r) / sxx;
    const double log_se = points[i].std_error / points[i].probability;
    var += weight * weight * log_se * log_se;
  }
  fit.slope_std_error = std::sqrt(var);
  return fit;
}

double lln_value(double n, double t, double r, double beta) {
  if (!(n > 0.0)) return -std::numeric_limits<double>::infinity();
  return r * r * (std::log(n) / t - beta);
}

std::vector<LlnSummary> lln_statistic(const ModelParams& params, std::span<const double> times,
                                      std::int64_t replicates, std::uint64_t seed, double epsilon,
                                      int threads) {
  params.validate();
  if (replicates < 100) fail(ErrorCode::invalid_argument, "LLN statistic needs >= 100 replicates");
  if (times.empty()) fail(ErrorCode::invalid_argument, "no observation times");
  for (double t : times) {
    if (!(t > 0.0)) fail(ErrorCode::invalid_argument, "LLN times must be positive");
  }
  const std::size_t nt = times.size();
  std::vector<std::int64_t> active(static_cast<std::size_t>(replicates) * nt, 0);
  parallel_for(replicates, threads, [&](std::int64_t rep) {
    const auto res = simulate(params, times, seed, StrategyCondition::none(), {},
                              static_cast<std::uint64_t>(rep));
    if (res.truncated) fail(ErrorCode::budget_exceeded, "particle budget exceeded");
    for (std::size_t j = 0; j < nt; ++j) {
      active[static_cast<std::size_t>(rep) * nt + j] = res.snapshots[j].active;
    }
  });

  const double target = -unit_ball_eigenvalue(params.dimension).lambda_d;
  std::vector<LlnSummary> out;
  for (std::size_t j = 0; j < nt; ++j) {
    LlnSummary s;
    s.t = times[j];
    s.r = params.radius.at(s.t);
    s.target = target;
    s.replicates = replicates;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(replicates));
    std::int64_t zeros = 0;
    std::int64_t within = 0;
    for (std::int64_t rep = 0; rep < replicates; ++rep) {
      const auto n = active[static_cast<std::size_t>(rep) * nt + j];
      if (n == 0) ++zeros;
      // n_t = 0 enters the order statistics as -infinity
      const double v = lln_value(static_cast<double>(n), s.t, s.r, params.beta);
      if (std::abs(v - target) <= epsilon) ++within;
      values.push_back(v);
    }
    std::sort(values.begin(), values.end());
    s.median = quantile(values, 0.5);
    s.q1 = quantile(values, 0.25);
    s.q3 = quantile(values, 0.75);
    s.zero_fraction = static_cast<double>(zeros) / replicates;
    s.fraction_within = static_cast<double>(within) / replicates;
    s.unreliable = s.zero_fraction > 0.2;
    out.push_back(s);
  }
  return out;
}

double PropATest::empirical_tail(std::int64_t k) const {
  const auto total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  std::int64_t above = 0;
  for (std::size_t i = static_cast<std::size_t>(std::max<std::int64_t>(k + 1, 0)); i < counts.size(); ++i) {
    above += counts[i];
  }
  return static_cast<double>(above) / static_cast<double>(total);
}

PropATest prop_a_distribution_test(double beta, double t, std::int64_t replicates,
                                   std::uint64_t seed, int threads) {
  if (!(beta > 0.0) || !(t >= 0.0) || replicates < 1) {
    fail(ErrorCode::invalid_argument, "need beta > 0, t >= 0, replicates >= 1");
  }
  std::vector<std::int64_t> population(static_cast<std::size_t>(replicates));
  const double obs[] = {t};
  parallel_for(replicates, threads, [&](std::int64_t rep) {
    population[static_cast<std::size_t>(rep)] =
        population_counts(beta, obs, seed, static_cast<std::uint64_t>(rep)).front();
  });

  PropATest out;
  const auto max_n = *std::max_element(population.begin(), population.end());
  out.counts.assign(static_cast<std::size_t>(max_n + 1), 0);
  for (auto n : population) ++out.counts[static_cast<std::size_t>(n)];

  const double m = static_cast<double>(replicates);
  const double stay = std::exp(-beta * t);  // P(N_t = 1)
  const double q = -std::expm1(-beta * t);  // 1 - e^{-beta t}
  double tv = 0.0;
  for (std::int64_t k = 1; k <= max_n; ++k) {
    const double pk = stay * std::pow(q, static_cast<double>(k - 1));
    tv += std::abs(static_cast<double>(out.counts[static_cast<std::size_t>(k)]) / m - pk);
  }
  tv += std::pow(q, static_cast<double>(max_n));  // unobserved tail mass
  out.tv_distance = 0.5 * tv;

  out.tail_expected = std::pow(q, 10.0);
  out.tail_empirical = out.empirical_tail(10);
  out.tail_std_error = std::sqrt(out.tail_expected * (1.0 - out.tail_expected) / m);
  out.tail_check = std::abs(out.tail_empirical - out.tail_expected) <= 3.0 * out.tail_std_error;

  double sum = 0.0;
  for (auto n : population) sum += static_cast<double>(n);
  out.mean = sum / m;
  double ss = 0.0;
  for (auto n : population) ss += (static_cast<double>(n) - out.mean) * (static_cast<double>(n) - out.mean);
  out.mean_std_error = replicates > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
  out.expected_mean = std::exp(beta * t);
  return out;
}

}  // namespace bbm
