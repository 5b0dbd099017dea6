#include "bbm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <utility>

#include "bbm/error.hpp"
#include "bbm/rng.hpp"

namespace bbm {

StrategyCondition StrategyCondition::no_branch_until(double beta, double t0) {
  if (!(t0 >= 0.0)) fail(ErrorCode::invalid_argument, "T0 must be nonnegative");
  return {Mode::no_branch_until, t0, 0.0, -beta * t0};
}

StrategyCondition StrategyCondition::branch_before(double beta, double t0) {
  if (!(t0 > 0.0) || !(beta > 0.0)) {
    fail(ErrorCode::invalid_argument, "branch_before needs beta > 0 and T0 > 0");
  }
  return {Mode::branch_before, t0, 0.0, std::log(-std::expm1(-beta * t0))};
}

StrategyCondition StrategyCondition::no_branch_and_escape(double beta, double t0,
                                                          double checked_radius) {
  if (!(t0 >= 0.0)) fail(ErrorCode::invalid_argument, "T0 must be nonnegative");
  return {Mode::no_branch_and_escape, t0, checked_radius, -beta * t0};
}

std::int64_t Genealogy::alive_at(double t) const {
  std::int64_t count = 0;
  for (std::size_t i = 0; i < birth.size(); ++i) {
    if (birth[i] <= t && t < death[i]) ++count;
  }
  return count;
}

namespace {

double root_lifetime(double beta, const StrategyCondition& condition, CounterStream& stream) {
  if (beta == 0.0) return std::numeric_limits<double>::infinity();
  switch (condition.mode) {
    case StrategyCondition::Mode::none:
      return stream.exponential(beta);
    case StrategyCondition::Mode::no_branch_until:
    case StrategyCondition::Mode::no_branch_and_escape:
      return condition.t0 + stream.exponential(beta);
    case StrategyCondition::Mode::branch_before:
      // inverse CDF of the exponential truncated to [0, T0)
      return -std::log1p(stream.uniform() * std::expm1(-beta * condition.t0)) / beta;
  }
  return stream.exponential(beta);
}

}  // namespace

Genealogy grow_genealogy(double beta, double horizon, std::uint64_t seed, std::uint64_t replicate,
                         const StrategyCondition& condition, std::int64_t max_particles) {
  if (!(beta >= 0.0)) fail(ErrorCode::invalid_argument, "branching rate must be >= 0");
  Genealogy g;
  {
    CounterStream stream(seed, replicate, 0, StreamPurpose::branch);
    g.birth.push_back(0.0);
    g.death.push_back(root_lifetime(beta, condition, stream));
    g.parent.push_back(-1);
  }
  using Event = std::pair<double, std::int64_t>;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> pending;
  if (g.death[0] <= horizon) pending.emplace(g.death[0], 0);

  std::int64_t live = 1;
  while (!pending.empty()) {
    const auto [when, who] = pending.top();
    pending.pop();
    if (live + 1 > max_particles) {
      g.truncated = true;
      g.truncation_time = when;
      break;
    }
    ++live;
    for (int child = 0; child < 2; ++child) {
      const auto idx = static_cast<std::int64_t>(g.birth.size());
      CounterStream stream(seed, replicate, static_cast<std::uint64_t>(idx), StreamPurpose::branch);
      const double death = when + stream.exponential(beta);
      g.birth.push_back(when);
      g.death.push_back(death);
      g.parent.push_back(who);
      if (death <= horizon) pending.emplace(death, idx);
    }
  }
  return g;
}

std::vector<std::int64_t> population_counts(double beta, std::span<const double> times,
                                            std::uint64_t seed, std::uint64_t replicate) {
  if (times.empty()) return {};
  const double horizon = *std::max_element(times.begin(), times.end());
  const Genealogy g = grow_genealogy(beta, horizon, seed, replicate);
  std::vector<std::int64_t> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(g.alive_at(t));
  return out;
}

std::int64_t active_count(std::span<const ParticleRecord> particles, double radius) {
  return std::count_if(particles.begin(), particles.end(), [radius](const ParticleRecord& p) {
    return p.running_max_radius <= radius;
  });
}

SimulationResult simulate(const ModelParams& params, std::span<const double> observation_times,
                          std::uint64_t seed, const StrategyCondition& condition,
                          const SimulationOptions& options, std::uint64_t replicate) {
  const int d = params.dimension;
  const double dt = params.dt;
  const double beta = options.branching_rate >= 0.0 ? options.branching_rate : params.beta;
  if (d < 1) fail(ErrorCode::invalid_argument, "dimension must be >= 1");
  if (!(dt > 0.0)) fail(ErrorCode::invalid_argument, "dt must be positive");
  if (!(beta >= 0.0)) fail(ErrorCode::invalid_argument, "branching rate must be >= 0");
  if (!(options.start_distance >= 0.0)) {
    fail(ErrorCode::invalid_argument, "start distance must be nonnegative");
  }
  for (std::size_t i = 0; i < observation_times.size(); ++i) {
    const double t = observation_times[i];
    if (!(t >= 0.0) || t > params.t_max * (1.0 + 1e-12)) {
      fail(ErrorCode::invalid_argument, "observation times must lie in [0, t_max]");
    }
    if (i > 0 && t < observation_times[i - 1]) {
      fail(ErrorCode::invalid_argument, "observation times must be sorted");
    }
  }

  SimulationResult result;
  if (observation_times.empty()) return result;

  const double horizon = observation_times.back();
  const Genealogy g =
      grow_genealogy(beta, horizon, seed, replicate, condition, options.max_particles);
  result.particles_created = g.size();

  std::vector<double> obs(observation_times.begin(), observation_times.end());
  if (g.truncated) {
    result.truncated = true;
    result.truncation_time = g.truncation_time;
    std::erase_if(obs, [&](double t) { return t >= g.truncation_time; });
    if (obs.empty()) return result;
  }
  const std::size_t nobs = obs.size();
  const double stop = obs.back();

  std::vector<double> radius(nobs);
  std::vector<double> suffix_max(nobs);
  for (std::size_t j = 0; j < nobs; ++j) radius[j] = params.radius.at(obs[j]);
  for (std::size_t j = nobs; j-- > 0;) {
    suffix_max[j] = j + 1 < nobs ? std::max(radius[j], suffix_max[j + 1]) : radius[j];
  }
  std::vector<std::int64_t> total(nobs, 0);
  std::vector<std::int64_t> active(nobs, 0);
  if (options.keep_records) result.records.resize(nobs);

  const bool escape_mode = condition.mode == StrategyCondition::Mode::no_branch_and_escape;
  const double escape_time = std::min(condition.t0, stop);

  const auto n = static_cast<std::size_t>(g.size());
  std::vector<double> end_position(n * static_cast<std::size_t>(d), 0.0);
  std::vector<double> end_max(n, 0.0);
  std::vector<char> frozen(n, 0);
  std::vector<double> pos(static_cast<std::size_t>(d));

  for (std::size_t i = 0; i < n; ++i) {
    const double birth = g.birth[i];
    const double death = g.death[i];
    if (birth > stop) continue;

    double runmax;
    bool is_frozen;
    if (i == 0) {
      std::fill(pos.begin(), pos.end(), 0.0);
      pos[0] = options.start_distance;
      runmax = options.start_distance;
      is_frozen = false;
    } else {
      const auto p = static_cast<std::size_t>(g.parent[i]);
      std::copy_n(end_position.begin() + static_cast<std::ptrdiff_t>(p * d), d, pos.begin());
      runmax = end_max[p];
      is_frozen = frozen[p] != 0;
    }

    auto j = static_cast<std::size_t>(std::lower_bound(obs.begin(), obs.end(), birth) - obs.begin());
    bool escape_pending = escape_mode && i == 0;
    const bool can_prune = !options.keep_records;

    auto record = [&](std::size_t at) {
      ++total[at];
      if (runmax <= radius[at]) ++active[at];
      if (options.keep_records) {
        ParticleRecord rec;
        rec.position = pos;
        rec.running_max_radius = runmax;
        rec.birth_time = birth;
        rec.next_branch_time = death;
        rec.lineage_id = static_cast<std::int64_t>(i);
        rec.parent_id = g.parent[i];
        result.records[at].push_back(std::move(rec));
      }
    };
    // A lineage whose running max already exceeds every remaining radius can
    // only contribute to N_t, and neither can its descendants.
    auto count_frozen_rest = [&] {
      for (; j < nobs && obs[j] < death; ++j) ++total[j];
    };

    if (can_prune && !escape_pending && j < nobs && runmax > suffix_max[j]) is_frozen = true;
    if (is_frozen) {
      count_frozen_rest();
      end_max[i] = runmax;
      frozen[i] = 1;
      continue;
    }

    CounterStream motion(seed, replicate, i, StreamPurpose::motion);
    CounterStream bridge(seed, replicate, i, StreamPurpose::bridge);

    double t = birth;
    auto k = static_cast<std::int64_t>(std::floor(birth / dt)) + 1;
    while (static_cast<double>(k) * dt <= t + 1e-9 * dt) ++k;
    while (j < nobs && obs[j] <= t) record(j++);
    if (escape_pending && escape_time <= t) {
      result.initial_escaped = runmax > condition.checked_radius;
      escape_pending = false;
    }

    const double end = std::min(death, stop);
    while (t < end) {
      if (can_prune && !escape_pending && j < nobs && runmax > suffix_max[j]) {
        is_frozen = true;
        count_frozen_rest();
        break;
      }
      if (j >= nobs && !escape_pending) break;
      double next = static_cast<double>(k) * dt;
      if (j < nobs) next = std::min(next, obs[j]);
      if (escape_pending) next = std::min(next, escape_time);
      next = std::min(next, end);
      const double h = next - t;

      double r0_sq = 0.0;
      double r1_sq = 0.0;
      const double sd = std::sqrt(h);
      for (int c = 0; c < d; ++c) {
        r0_sq += pos[c] * pos[c];
        pos[c] += sd * motion.normal();
        r1_sq += pos[c] * pos[c];
      }
      const double r0 = std::sqrt(r0_sq);
      const double r1 = std::sqrt(r1_sq);
      runmax = std::max(runmax, r1);
      if (params.bridge_correction && h > 0.0) {
        // Max of a Brownian bridge from r0 to r1 over h exceeds m with
        // probability exp(-2 (m - r0)(m - r1) / h). Uniforms are >= 2^-53, so
        // exponents above 40 can never produce a crossing.
        const double gap = 2.0 * (runmax - r0) * (runmax - r1) / h;
        if (gap < 40.0) {
          const double u = bridge.uniform();
          const double diff = r1 - r0;
          const double peak = 0.5 * (r0 + r1 + std::sqrt(diff * diff - 2.0 * h * std::log(u)));
          runmax = std::max(runmax, peak);
        }
      }
      t = next;
      if (static_cast<double>(k) * dt <= t + 1e-9 * dt) ++k;
      if (escape_pending && t >= escape_time) {
        result.initial_escaped = runmax > condition.checked_radius;
        escape_pending = false;
      }
      while (j < nobs && obs[j] <= t && obs[j] < death) record(j++);
    }

    std::copy_n(pos.begin(), d, end_position.begin() + static_cast<std::ptrdiff_t>(i * d));
    end_max[i] = runmax;
    frozen[i] = is_frozen ? 1 : 0;
  }

  result.snapshots.resize(nobs);
  for (std::size_t j = 0; j < nobs; ++j) {
    result.snapshots[j] = Snapshot{obs[j], total[j], active[j], radius[j]};
  }
  return result;
}

}  // namespace bbm
