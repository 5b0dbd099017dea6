#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bbm/engine.hpp"
#include "bbm/error.hpp"

using namespace bbm;

namespace {

ModelParams walk_params(int d, double beta, double t_max) {
  ModelParams p;
  p.dimension = d;
  p.beta = beta;
  p.t_max = t_max;
  p.dt = 0.01;
  p.radius = RadiusSchedule::power(1.0, 0.4);
  return p;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("no branching keeps a single particle") {
  auto p = walk_params(2, 1.0, 10.0);
  SimulationOptions opt;
  opt.branching_rate = 0.0;
  const std::vector<double> times{0.0, 1.0, 5.0, 10.0};
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const auto res = simulate(p, times, 3, {}, opt, rep);
    REQUIRE(res.snapshots.size() == times.size());
    for (const auto& s : res.snapshots) CHECK(s.total == 1);
    CHECK(res.snapshots[0].active == 1);
  }
}

TEST_CASE("an unreachable boundary counts everyone") {
  auto p = walk_params(1, 0.5, 10.0);
  p.radius = RadiusSchedule::fixed(1e6);
  p.dt = 0.05;
  const std::vector<double> times{2.0, 6.0, 10.0};
  for (std::uint64_t rep = 0; rep < 1000; ++rep) {
    const auto res = simulate(p, times, 17, {}, {}, rep);
    for (const auto& s : res.snapshots) REQUIRE(s.active == s.total);
  }
}

TEST_CASE("population law at t = ln 2") {
  auto p = walk_params(1, 1.0, 1.0);
  p.dt = 0.5;  // motion is irrelevant for N_t
  const double t = std::log(2.0);
  const std::vector<double> times{t};
  const int n = 20000;
  std::vector<int> counts(64, 0);
  double sum = 0.0, sum2 = 0.0;
  for (int rep = 0; rep < n; ++rep) {
    const auto N = simulate(p, times, 99, {}, {}, rep).snapshots[0].total;
    REQUIRE(N >= 1);
    counts[std::min<std::int64_t>(N, 63)]++;
    sum += N;
    sum2 += double(N) * N;
  }
  for (int k = 1; k <= 4; ++k) {
    const double expect = std::pow(0.5, k);
    const double se = std::sqrt(expect * (1 - expect) / n);
    CHECK(std::fabs(counts[k] / double(n) - expect) < 4 * se);
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::fabs(mean - 2.0) < 3 * se);
}

TEST_CASE("totals match the branching skeleton") {
  auto p = walk_params(2, 0.7, 6.0);
  const std::vector<double> times{0.5, 2.0, 4.5, 6.0};
  for (std::uint64_t rep = 0; rep < 50; ++rep) {
    const auto res = simulate(p, times, 5, {}, {}, rep);
    const auto skel = population_counts(0.7, times, 5, rep);
    for (std::size_t j = 0; j < times.size(); ++j) CHECK(res.snapshots[j].total == skel[j]);
  }
}

TEST_CASE("active never exceeds total and records are consistent") {
  for (int d : {1, 2, 3}) {
    auto p = walk_params(d, 0.5, 8.0);
    p.radius = RadiusSchedule::power(0.8, 0.45);
    const std::vector<double> times{0.3, 1.0, 3.0, 8.0};
    SimulationOptions keep;
    keep.keep_records = true;
    for (std::uint64_t rep = 0; rep < 40; ++rep) {
      const auto full = simulate(p, times, 12, {}, keep, rep);
      const auto pruned = simulate(p, times, 12, {}, {}, rep);
      REQUIRE(full.snapshots.size() == times.size());
      for (std::size_t j = 0; j < times.size(); ++j) {
        const auto& s = full.snapshots[j];
        CHECK(s.active <= s.total);
        CHECK(s.total >= 1);
        CHECK(static_cast<std::int64_t>(full.records[j].size()) == s.total);
        CHECK(active_count(full.records[j], s.radius) == s.active);
        // Freezing hopeless lineages must not change any count.
        CHECK(pruned.snapshots[j].total == s.total);
        CHECK(pruned.snapshots[j].active == s.active);
        for (const auto& rec : full.records[j]) {
          double norm = 0.0;
          for (double x : rec.position) norm += x * x;
          CHECK(rec.running_max_radius >= std::sqrt(norm) - 1e-12);
          CHECK(rec.birth_time <= times[j]);
          CHECK(rec.next_branch_time > times[j]);
        }
      }
    }
  }
}

TEST_CASE("active count is monotone in the radius") {
  auto p = walk_params(2, 0.6, 6.0);
  SimulationOptions keep;
  keep.keep_records = true;
  const std::vector<double> times{6.0};
  for (std::uint64_t rep = 0; rep < 30; ++rep) {
    const auto res = simulate(p, times, 8, {}, keep, rep);
    const auto& recs = res.records[0];
    std::int64_t prev = 0;
    for (int i = 0; i <= 200; ++i) {
      const auto c = active_count(recs, 0.025 * i);
      CHECK(c >= prev);
      prev = c;
    }
    CHECK(active_count(recs, 0.0) == 0);
    CHECK(active_count(recs, std::numeric_limits<double>::infinity()) ==
          static_cast<std::int64_t>(recs.size()));
  }
}

TEST_CASE("running max is inherited and nondecreasing along lineages") {
  auto p = walk_params(2, 0.8, 5.0);
  SimulationOptions keep;
  keep.keep_records = true;
  const std::vector<double> times{1.0, 2.0, 3.0, 4.0, 5.0};
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const auto res = simulate(p, times, 4, {}, keep, rep);
    const auto g = grow_genealogy(0.8, 5.0, 4, rep);
    for (std::size_t j = 1; j < times.size(); ++j) {
      for (const auto& later : res.records[j]) {
        // Find the ancestor (or self) alive at the previous observation.
        std::int64_t u = later.lineage_id;
        while (g.birth[static_cast<std::size_t>(u)] > times[j - 1]) u = g.parent[static_cast<std::size_t>(u)];
        const auto& prev = res.records[j - 1];
        const auto it = std::find_if(prev.begin(), prev.end(),
                                     [u](const ParticleRecord& r) { return r.lineage_id == u; });
        REQUIRE(it != prev.end());
        CHECK(later.running_max_radius >= it->running_max_radius);
      }
    }
  }
}

TEST_CASE("reactivation happens") {
  // An ancestral line that left B(0, r(t1)) by t1 but stayed inside the larger
  // B(0, r(t2)) counts at t2 although it was excluded at t1.
  auto p = walk_params(1, 0.5, 6.0);
  p.radius = RadiusSchedule::power(1.0, 0.45);
  SimulationOptions keep;
  keep.keep_records = true;
  const std::vector<double> times{1.0, 6.0};
  int found = 0;
  for (std::uint64_t rep = 0; rep < 200 && found < 3; ++rep) {
    const auto res = simulate(p, times, 31, {}, keep, rep);
    const auto g = grow_genealogy(0.5, 6.0, 31, rep);
    const double r1 = res.snapshots[0].radius, r2 = res.snapshots[1].radius;
    for (const auto& late : res.records[1]) {
      if (late.running_max_radius > r2) continue;
      std::int64_t u = late.lineage_id;
      while (g.birth[static_cast<std::size_t>(u)] > times[0]) u = g.parent[static_cast<std::size_t>(u)];
      for (const auto& early : res.records[0]) {
        if (early.lineage_id == u && early.running_max_radius > r1) {
          ++found;
          CHECK(active_count(res.records[0], r1) < static_cast<std::int64_t>(res.records[0].size()));
        }
      }
    }
  }
  CHECK(found > 0);
}

TEST_CASE("reruns are bit identical") {
  auto p = walk_params(3, 0.5, 7.0);
  const std::vector<double> times{1.0, 3.5, 7.0};
  SimulationOptions keep;
  keep.keep_records = true;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    const auto a = simulate(p, times, 1234, {}, keep, rep);
    const auto b = simulate(p, times, 1234, {}, keep, rep);
    for (std::size_t j = 0; j < times.size(); ++j) {
      CHECK(a.snapshots[j].total == b.snapshots[j].total);
      CHECK(a.snapshots[j].active == b.snapshots[j].active);
      REQUIRE(a.records[j].size() == b.records[j].size());
      for (std::size_t k = 0; k < a.records[j].size(); ++k) {
        CHECK(a.records[j][k].running_max_radius == b.records[j][k].running_max_radius);
        CHECK(a.records[j][k].position == b.records[j][k].position);
      }
    }
  }
  const auto other = simulate(p, times, 1235, {}, keep, 0);
  const auto base = simulate(p, times, 1234, {}, keep, 0);
  CHECK(other.records.back()[0].position != base.records.back()[0].position);
}

TEST_CASE("bridge correction never adds active particles") {
  for (int d : {1, 2, 3}) {
    auto p = walk_params(d, 0.5, 8.0);
    p.dt = 0.05;
    auto raw = p;
    raw.bridge_correction = false;
    const std::vector<double> times{1.0, 2.0, 4.0, 8.0};
    bool strictly = false;
    for (std::uint64_t rep = 0; rep < 300; ++rep) {
      const auto with = simulate(p, times, 77, {}, {}, rep);
      const auto without = simulate(raw, times, 77, {}, {}, rep);
      for (std::size_t j = 0; j < times.size(); ++j) {
        REQUIRE(with.snapshots[j].total == without.snapshots[j].total);
        CHECK(with.snapshots[j].active <= without.snapshots[j].active);
        strictly |= with.snapshots[j].active < without.snapshots[j].active;
      }
    }
    CHECK(strictly);
  }
}

TEST_CASE("strategy conditions") {
  auto p = walk_params(1, 1.0, 5.0);
  const std::vector<double> times{0.5, 1.9, 5.0};
  const auto quiet = StrategyCondition::no_branch_until(1.0, 2.0);
  const auto early = StrategyCondition::branch_before(1.0, 2.0);
  CHECK(quiet.log_weight == doctest::Approx(-2.0));
  CHECK(early.log_weight == doctest::Approx(std::log(1 - std::exp(-2.0))));
  CHECK(StrategyCondition::no_branch_and_escape(1.0, 2.0, 1.0).log_weight == doctest::Approx(-2.0));
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    const auto q = simulate(p, times, 6, quiet, {}, rep);
    CHECK(q.snapshots[0].total == 1);
    CHECK(q.snapshots[1].total == 1);
    const auto g = grow_genealogy(1.0, 5.0, 6, rep, early);
    CHECK(g.death[0] < 2.0);
  }
  // P(escape) for a single path: leaving B(0, 0.5) by time 2 is near certain.
  int escaped = 0;
  const auto esc = StrategyCondition::no_branch_and_escape(1.0, 2.0, 0.5);
  for (std::uint64_t rep = 0; rep < 50; ++rep) escaped += simulate(p, times, 6, esc, {}, rep).initial_escaped;
  CHECK(escaped >= 45);
}

TEST_CASE("budget truncation") {
  auto p = walk_params(1, 1.0, 20.0);
  p.dt = 0.5;
  SimulationOptions small;
  small.max_particles = 200;
  const std::vector<double> times{1.0, 10.0, 20.0};
  const auto res = simulate(p, times, 2, {}, small, 0);
  CHECK(res.truncated);
  CHECK(res.truncation_time < 20.0);
  for (const auto& s : res.snapshots) {
    CHECK(s.t < res.truncation_time);
    CHECK(s.total <= 200);
  }
  CHECK(res.snapshots.size() < times.size());
}

TEST_CASE("input validation") {
  auto p = walk_params(1, 1.0, 5.0);
  const std::vector<double> unsorted{2.0, 1.0};
  const std::vector<double> late{6.0};
  CHECK_THROWS_AS(simulate(p, unsorted, 1), Error);
  CHECK_THROWS_AS(simulate(p, late, 1), Error);
  CHECK(simulate(p, std::vector<double>{}, 1).snapshots.empty());
}

TEST_CASE("single-path confinement against the interval series") {
  // P_0(sup |B| < 1, s <= 1) = 0.3707...; the bridge correction keeps the
  // discrete monitor close to the continuous one.
  const auto est = confinement_probability_mc(1, 1.0, 1.0, 0.0, 0.01, true, 100000, 3, 0);
  CHECK(std::fabs(est.value - 0.370777429799524) < 4 * est.std_error + 0.003);
  const auto raw = confinement_probability_mc(1, 1.0, 1.0, 0.0, 0.01, false, 100000, 3, 0);
  CHECK(raw.value > est.value);
  CHECK(confinement_probability_mc(2, 1.0, 0.0, 0.0, 0.01, true, 1000, 3, 0).value == 1.0);
}

TEST_CASE("displacement tail") {
  const std::vector<double> ks{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto curve = displacement_tail_curve(ks, 4.0, 1, 20000, 8, 0.01, 0);
  REQUIRE(curve.size() == ks.size());
  CHECK(curve[0].probability.value == 1.0);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].probability.value <= curve[i - 1].probability.value);
    CHECK(curve[i].reference_rate == doctest::Approx(ks[i] * ks[i] / 2));
  }
  // P(sup |B_s| > 2, s <= 4) in d = 1 is 1 - interval confinement at b = 2.
  const double exact = 1 - 0.370777429799524;  // Brownian scaling of the b = 1, t = 1 value
  CHECK(std::fabs(curve[2].probability.value - exact) < 4 * curve[2].probability.std_error + 0.005);
  const auto rare = displacement_tail_probe(5.0, 4.0, 1, 1000, 8);
  CHECK(rare.probability.zero_hits);
  CHECK(rare.probability.value > 0.0);
}

TEST_CASE("split times of sampled pairs") {
  const auto probe = mrca_split_probe(1.0, 0.2, 2000, 4, 0);
  CHECK(probe.split_times.size() == 2000u);
  CHECK(probe.resampled > 0);
  for (double s : probe.split_times) CHECK(s <= 0.2);
  double prev = 1.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = probe.survival(0.002 * i);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("split time tail rate") {
  const auto probe = mrca_split_probe(1.0, 6.0, 10000, 19, 0);
  CHECK(probe.fitted_rate == doctest::Approx(1.0).epsilon(0.25));
}

}  // TEST_SUITE
