#include <algorithm>
#include <cmath>
#include <numeric>

#include "bbm/engine.hpp"
#include "bbm/error.hpp"
#include "bbm/parallel.hpp"
#include "bbm/rng.hpp"

namespace bbm {

Estimate confinement_probability_mc(int d, double b, double t, double start_distance, double dt,
                                    bool bridge_correction, std::int64_t paths,
                                    std::uint64_t seed, int threads) {
  if (paths < 1) fail(ErrorCode::invalid_argument, "need at least one path");
  if (!(b > 0.0)) fail(ErrorCode::invalid_argument, "ball radius must be positive");
  if (!(start_distance < b)) fail(ErrorCode::invalid_argument, "start must lie inside the ball");
  if (t == 0.0) {
    Estimate e;
    e.value = 1.0;
    e.upper_bound = 1.0;
    e.replicates = paths;
    return e;
  }
  ModelParams params;
  params.dimension = d;
  params.t_max = t;
  params.dt = dt;
  params.radius = RadiusSchedule::fixed(b);
  params.bridge_correction = bridge_correction;
  SimulationOptions options;
  options.branching_rate = 0.0;
  options.start_distance = start_distance;

  const double obs[] = {t};
  std::vector<char> inside(static_cast<std::size_t>(paths), 0);
  parallel_for(paths, threads, [&](std::int64_t i) {
    const auto res = simulate(params, obs, seed, StrategyCondition::none(), options,
                              static_cast<std::uint64_t>(i));
    inside[static_cast<std::size_t>(i)] = res.snapshots.front().active > 0 ? 1 : 0;
  });
  const auto hits = std::accumulate(inside.begin(), inside.end(), std::int64_t{0});
  return proportion_estimate(hits, paths);
}

std::vector<DisplacementProbe> displacement_tail_curve(std::span<const double> ks, double t, int d,
                                                       std::int64_t replicates, std::uint64_t seed,
                                                       double dt, int threads) {
  if (replicates < 1) fail(ErrorCode::invalid_argument, "need at least one replicate");
  if (!(t > 0.0) || !(dt > 0.0) || d < 1) {
    fail(ErrorCode::invalid_argument, "displacement probe needs t > 0, dt > 0, d >= 1");
  }
  for (double k : ks) {
    if (!(k >= 0.0)) fail(ErrorCode::invalid_argument, "k must be nonnegative");
  }
  const double level_cap = ks.empty() ? 0.0 : *std::max_element(ks.begin(), ks.end()) * t;

  std::vector<double> sup(static_cast<std::size_t>(replicates));
  parallel_for(replicates, threads, [&](std::int64_t rep) {
    CounterStream motion(seed, static_cast<std::uint64_t>(rep), 0, StreamPurpose::motion);
    CounterStream bridge(seed, static_cast<std::uint64_t>(rep), 0, StreamPurpose::bridge);
    std::vector<double> x(static_cast<std::size_t>(d), 0.0);
    double s = 0.0;
    double runmax = 0.0;
    double r0 = 0.0;
    std::int64_t k = 1;
    // Once the largest level is crossed every indicator is settled.
    while (s < t && runmax <= level_cap) {
      const double next = std::min(static_cast<double>(k) * dt, t);
      const double h = next - s;
      const double sd = std::sqrt(h);
      double r1_sq = 0.0;
      for (auto& c : x) {
        c += sd * motion.normal();
        r1_sq += c * c;
      }
      const double r1 = std::sqrt(r1_sq);
      runmax = std::max(runmax, r1);
      const double gap = 2.0 * (runmax - r0) * (runmax - r1) / h;
      if (gap < 40.0) {
        const double diff = r1 - r0;
        const double peak =
            0.5 * (r0 + r1 + std::sqrt(diff * diff - 2.0 * h * std::log(bridge.uniform())));
        runmax = std::max(runmax, peak);
      }
      r0 = r1;
      s = next;
      ++k;
    }
    sup[static_cast<std::size_t>(rep)] = runmax;
  });

  std::vector<DisplacementProbe> out;
  out.reserve(ks.size());
  for (double k : ks) {
    const double level = k * t;
    const auto hits = std::count_if(sup.begin(), sup.end(), [level](double m) { return m > level; });
    DisplacementProbe probe;
    probe.k = k;
    probe.probability = proportion_estimate(hits, replicates);
    probe.decay_rate = -std::log(probe.probability.value) / t;
    probe.reference_rate = 0.5 * k * k;
    out.push_back(probe);
  }
  return out;
}

DisplacementProbe displacement_tail_probe(double k, double t, int d, std::int64_t replicates,
                                          std::uint64_t seed, double dt, int threads) {
  const double ks[] = {k};
  return displacement_tail_curve(ks, t, d, replicates, seed, dt, threads).front();
}

double SplitProbe::survival(double s) const {
  if (split_times.empty()) return 0.0;
  const auto above = split_times.end() - std::upper_bound(split_times.begin(), split_times.end(), s);
  return static_cast<double>(above) / static_cast<double>(split_times.size());
}

SplitProbe mrca_split_probe(double beta, double t, std::int64_t pairs, std::uint64_t seed,
                            int threads) {
  if (!(beta > 0.0) || !(t > 0.0) || pairs < 1) {
    fail(ErrorCode::invalid_argument, "split probe needs beta > 0, t > 0, pairs >= 1");
  }
  std::vector<double> split(static_cast<std::size_t>(pairs));
  std::vector<std::int64_t> discarded(static_cast<std::size_t>(pairs), 0);
  parallel_for(pairs, threads, [&](std::int64_t i) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      const Genealogy g = grow_genealogy(beta, t, derive_seed(seed, attempt),
                                         static_cast<std::uint64_t>(i));
      std::vector<std::int64_t> alive;
      for (std::int64_t u = 0; u < g.size(); ++u) {
        if (g.birth[static_cast<std::size_t>(u)] <= t && t < g.death[static_cast<std::size_t>(u)]) {
          alive.push_back(u);
        }
      }
      if (alive.size() < 2) {
        ++discarded[static_cast<std::size_t>(i)];
        continue;
      }
      CounterStream pick(derive_seed(seed, attempt), static_cast<std::uint64_t>(i), 0,
                         StreamPurpose::sampling);
      const auto m = alive.size();
      const auto first = static_cast<std::size_t>(pick.uniform() * static_cast<double>(m));
      auto second = static_cast<std::size_t>(pick.uniform() * static_cast<double>(m - 1));
      if (second >= first) ++second;
      std::int64_t a = alive[std::min(first, m - 1)];
      std::int64_t b = alive[std::min(second, m - 1)];
      // Parents precede children in creation order, so climbing the larger
      // index first meets the common ancestor.
      while (a != b) {
        if (a > b) {
          a = g.parent[static_cast<std::size_t>(a)];
        } else {
          b = g.parent[static_cast<std::size_t>(b)];
        }
      }
      split[static_cast<std::size_t>(i)] = g.death[static_cast<std::size_t>(a)];
      return;
    }
  });

  SplitProbe probe;
  probe.split_times = std::move(split);
  std::sort(probe.split_times.begin(), probe.split_times.end());
  probe.resampled = std::accumulate(discarded.begin(), discarded.end(), std::int64_t{0});

  // Fit window: from one mean branching time up to where 50 samples remain.
  const auto n = static_cast<std::int64_t>(probe.split_times.size());
  const double lo = 1.0 / beta;
  const double hi = n > 50 ? probe.split_times[static_cast<std::size_t>(n - 50)] : t;
  probe.fit_lo = lo;
  probe.fit_hi = hi;
  if (hi > lo) {
    constexpr int kPoints = 25;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int used = 0;
    for (int p = 0; p < kPoints; ++p) {
      const double s = lo + (hi - lo) * p / (kPoints - 1);
      const double surv = probe.survival(s);
      if (surv <= 0.0) continue;
      const double y = std::log(surv) - std::log(s);
      sx += s;
      sy += y;
      sxx += s * s;
      sxy += s * y;
      ++used;
    }
    if (used >= 2) {
      const double slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
      probe.fitted_rate = -slope;
    }
  }
  return probe;
}

}  // namespace bbm
