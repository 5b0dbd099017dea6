#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "bbm/estimate.hpp"
#include "bbm/model.hpp"

namespace bbm {

struct ParticleRecord {
  std::vector<double> position;
  // Maximum of |ancestral position| over every sampled instant since time 0,
  // including the bridge draws when the correction is enabled.
  double running_max_radius = 0.0;
  double birth_time = 0.0;
  double next_branch_time = 0.0;
  std::int64_t lineage_id = 0;
  std::int64_t parent_id = -1;
};

struct Snapshot {
  double t = 0.0;
  std::int64_t total = 0;   // N_t
  std::int64_t active = 0;  // n_t
  double radius = 0.0;      // r(t)
};

// Conditioning on the lifetime of the initial particle.
//
// no_branch_until(T0) and branch_before(T0) split the sample space along
// A = {first branch after T0}; P(A) = exp(-beta T0) is known exactly, which
// is what the stratified estimator relies on. no_branch_and_escape also
// reports whether the initial particle left the checked radius before T0.
struct StrategyCondition {
  enum class Mode { none, no_branch_until, branch_before, no_branch_and_escape };

  Mode mode = Mode::none;
  double t0 = 0.0;
  double checked_radius = 0.0;
  double log_weight = 0.0;  // log P(condition)

  static StrategyCondition none() { return {}; }
  static StrategyCondition no_branch_until(double beta, double t0);
  static StrategyCondition branch_before(double beta, double t0);
  static StrategyCondition no_branch_and_escape(double beta, double t0, double checked_radius);
};

struct SimulationOptions {
  std::int64_t max_particles = std::int64_t{1} << 22;
  // Initial particle sits at this distance from the origin along the first axis.
  double start_distance = 0.0;
  // Collect a ParticleRecord for every particle alive at each observation time.
  bool keep_records = false;
  // Branching rate override; negative keeps params.beta. Zero is allowed here.
  double branching_rate = -1.0;
};

struct SimulationResult {
  std::vector<Snapshot> snapshots;
  // Set when the live population passed max_particles; snapshots then stop
  // before truncation_time.
  bool truncated = false;
  double truncation_time = std::numeric_limits<double>::infinity();
  bool initial_escaped = false;
  std::int64_t particles_created = 0;
  std::vector<std::vector<ParticleRecord>> records;  // parallel to snapshots
};

// One branching Brownian motion trajectory observed at `observation_times`.
//
// Branch times are exact exponential(beta) draws; motion is advanced with
// Gaussian increments on the grid k * dt refined by every birth, branch and
// observation time. Every (seed, replicate, particle) owns its own counter
// based streams, so results do not depend on scheduling.
SimulationResult simulate(const ModelParams& params, std::span<const double> observation_times,
                          std::uint64_t seed, const StrategyCondition& condition = {},
                          const SimulationOptions& options = {}, std::uint64_t replicate = 0);

std::int64_t active_count(std::span<const ParticleRecord> particles, double radius);

// Branching skeleton only: one entry per particle segment, in creation order.
struct Genealogy {
  std::vector<double> birth;
  std::vector<double> death;  // next branch time, may exceed the horizon
  std::vector<std::int64_t> parent;
  bool truncated = false;
  double truncation_time = std::numeric_limits<double>::infinity();

  std::int64_t size() const { return static_cast<std::int64_t>(birth.size()); }
  std::int64_t alive_at(double t) const;
};

Genealogy grow_genealogy(double beta, double horizon, std::uint64_t seed, std::uint64_t replicate,
                         const StrategyCondition& condition = {},
                         std::int64_t max_particles = std::int64_t{1} << 22);

// Total population N_t at each time, from the skeleton alone. Matches the
// totals reported by simulate() for the same seed and replicate.
std::vector<std::int64_t> population_counts(double beta, std::span<const double> times,
                                            std::uint64_t seed, std::uint64_t replicate);

// Monte Carlo P^a(tau_b >= t) for a single path in d dimensions, using the
// same discretization as the branching engine.
Estimate confinement_probability_mc(int d, double b, double t, double start_distance, double dt,
                                    bool bridge_correction, std::int64_t paths,
                                    std::uint64_t seed, int threads = 0);

struct DisplacementProbe {
  double k = 0.0;
  Estimate probability;
  double decay_rate = 0.0;  // -log(P) / t; a lower bound when zero_hits
  double reference_rate = 0.0;  // k^2 / 2
};

// P_0(sup_{s<=t} |X_s| > k t) for each k, on common paths.
std::vector<DisplacementProbe> displacement_tail_curve(std::span<const double> ks, double t, int d,
                                                       std::int64_t replicates, std::uint64_t seed,
                                                       double dt = 0.01, int threads = 0);

DisplacementProbe displacement_tail_probe(double k, double t, int d, std::int64_t replicates,
                                          std::uint64_t seed, double dt = 0.01, int threads = 0);

struct SplitProbe {
  std::vector<double> split_times;  // sorted
  std::int64_t resampled = 0;       // draws discarded because N_t < 2
  double fitted_rate = 0.0;
  double fit_lo = 0.0;
  double fit_hi = 0.0;

  // Empirical P(S > s).
  double survival(double s) const;
};

// Most-recent-common-ancestor split time of two distinct particles drawn
// uniformly among those alive at t. The tail rate is fitted to
// log P(S > s) = c + log s - rate * s over the central part of the sample.
SplitProbe mrca_split_probe(double beta, double t, std::int64_t pairs, std::uint64_t seed,
                            int threads = 0);

}  // namespace bbm
