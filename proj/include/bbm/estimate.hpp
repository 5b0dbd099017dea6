#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace bbm {

enum class EstimatorMode { naive, stratified };

inline std::string_view to_string(EstimatorMode mode) {
  return mode == EstimatorMode::naive ? "naive" : "stratified";
}

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t replicates = 0;
  EstimatorMode mode = EstimatorMode::naive;
  // No successes observed; value then carries the one-sided 95% upper bound.
  bool zero_hits = false;
  double upper_bound = 0.0;
};

// One-sided 95% Clopper-Pearson bound for zero successes in n trials.
inline double zero_hit_upper_bound(std::int64_t n) {
  return 1.0 - std::pow(0.05, 1.0 / static_cast<double>(n));
}

// Binomial proportion with the zero-hit convention above.
inline Estimate proportion_estimate(std::int64_t hits, std::int64_t n,
                                    EstimatorMode mode = EstimatorMode::naive) {
  Estimate e;
  e.replicates = n;
  e.mode = mode;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  e.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  e.upper_bound = hits == 0 ? zero_hit_upper_bound(n) : p;
  e.zero_hits = hits == 0;
  e.value = hits == 0 ? e.upper_bound : p;
  return e;
}

}  // namespace bbm
