#include "bbm/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "bbm/engine.hpp"
#include "bbm/error.hpp"
#include "bbm/estimators.hpp"
#include "bbm/rng.hpp"

#ifndef BBM_VERSION
#define BBM_VERSION "0.0.0"
#endif

namespace bbm {
namespace {

std::string integer(std::int64_t v) { return std::to_string(v); }
std::string boolean(bool v) { return v ? "true" : "false"; }

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::config_error, what);
}

void require_growing_radius(const ExperimentSpec& spec) {
  if (!spec.params.radius.grows_unbounded()) {
    fail(ErrorCode::fixed_radius_rejected,
         std::string(to_string(spec.recipe)) + " needs a radius that grows without bound");
  }
}

std::vector<double> default_times(const ExperimentSpec& spec) {
  return spec.times.empty() ? std::vector<double>{spec.params.t_max} : spec.times;
}

Table theorem1(const ExperimentSpec& spec) {
  Table table;
  table.header = {"kappa", "t", "r", "p_hat", "std_error", "zero_hits",
                  "fitted_slope", "slope_std_error", "rate_function"};
  // p_t depends on t only, so each time point uses one pilot run for all kappa.
  std::vector<Estimate> pilots;
  for (std::size_t i = 0; i < spec.times.size(); ++i) {
    pilots.push_back(estimate_confinement(spec.params, spec.times[i], 200000,
                                          derive_seed(spec.seed, 1000 + i), spec.threads));
  }
  for (double kappa : spec.kappas) {
    ModelParams params = spec.params;
    params.kappa = kappa;
    std::vector<DecayPoint> points;
    std::vector<LdEstimate> estimates;
    for (std::size_t i = 0; i < spec.times.size(); ++i) {
      LdOptions options;
      options.mode = spec.ld_mode;
      options.p_t = pilots[i];
      options.threads = spec.threads;
      const double t = spec.times[i];
      estimates.push_back(
          estimate_ld_probability(params, t, spec.replicates, derive_seed(spec.seed, i), options));
      points.push_back({params.radius.at(t), estimates.back().probability.value,
                        estimates.back().probability.std_error});
    }
    const DecayFit fit = fit_decay_rate(points);
    const double rate = rate_function(kappa, params.beta).value;
    for (std::size_t i = 0; i < spec.times.size(); ++i) {
      const auto& p = estimates[i].probability;
      table.rows.push_back({format_real(kappa), format_real(spec.times[i]),
                            format_real(points[i].r), format_real(p.value),
                            format_real(p.std_error), boolean(p.zero_hits),
                            format_real(fit.slope), format_real(fit.slope_std_error),
                            format_real(rate)});
    }
  }
  return table;
}

Table theorem2(const ExperimentSpec& spec) {
  Table table;
  table.header = {"t", "r", "median", "q1", "q3", "iqr", "fraction_within",
                  "zero_fraction", "unreliable", "target"};
  const auto summaries =
      lln_statistic(spec.params, spec.times, spec.replicates, spec.seed, spec.epsilon, spec.threads);
  for (const auto& s : summaries) {
    table.rows.push_back({format_real(s.t), format_real(s.r), format_real(s.median),
                          format_real(s.q1), format_real(s.q3), format_real(s.iqr()),
                          format_real(s.fraction_within), format_real(s.zero_fraction),
                          boolean(s.unreliable), format_real(s.target)});
  }
  return table;
}

Table propa(const ExperimentSpec& spec) {
  Table table;
  table.header = {"beta", "t", "replicates", "tv_distance", "tail_check", "mean_N",
                  "mean_std_error", "expected_mean"};
  for (double t : default_times(spec)) {
    const auto res =
        prop_a_distribution_test(spec.params.beta, t, spec.replicates, spec.seed, spec.threads);
    table.rows.push_back({format_real(spec.params.beta), format_real(t), integer(spec.replicates),
                          format_real(res.tv_distance), boolean(res.tail_check),
                          format_real(res.mean), format_real(res.mean_std_error),
                          format_real(res.expected_mean)});
  }
  return table;
}

Table expectation(const ExperimentSpec& spec) {
  Table table;
  table.header = {"t", "r", "mean_n", "std_error", "p_t", "p_t_source", "expected_mass", "z_score"};
  const int d = spec.params.dimension;
  const bool series = !spec.params.radius.grows_unbounded() && (d == 1 || d == 3);
  for (double t : default_times(spec)) {
    const double r = spec.params.radius.at(t);
    const double p_t =
        series ? confinement_center(d, r, t, ConfinementMode::series)
               : estimate_confinement(spec.params, t, 200000, derive_seed(spec.seed, 77), spec.threads).value;
    const auto mass = estimate_expected_mass(spec.params, t, spec.replicates, spec.seed, spec.threads);
    const double expected = std::exp(expected_mass(spec.params, t, p_t));
    const double z = mass.mean.std_error > 0.0 ? (mass.mean.value - expected) / mass.mean.std_error : 0.0;
    table.rows.push_back({format_real(t), format_real(r), format_real(mass.mean.value),
                          format_real(mass.mean.std_error), format_real(p_t),
                          series ? "series" : "monte_carlo", format_real(expected), format_real(z)});
  }
  return table;
}

Table confinement(const ExperimentSpec& spec) {
  Table table;
  table.header = {"d", "b", "t", "mode", "probability"};
  const std::vector<int> dims = spec.dimensions.empty() ? std::vector<int>{spec.params.dimension}
                                                        : spec.dimensions;
  const std::vector<double> radii =
      spec.ball_radii.empty() ? std::vector<double>{1.0} : spec.ball_radii;
  ConfinementMcOptions mc;
  mc.paths = spec.replicates;
  mc.seed = spec.seed;
  mc.bridge_correction = spec.params.bridge_correction;
  mc.threads = spec.threads;
  for (int d : dims) {
    for (double b : radii) {
      for (double t : default_times(spec)) {
        const double p = confinement_center(d, b, t, spec.conf_mode, mc);
        table.rows.push_back({integer(d), format_real(b), format_real(t),
                              std::string(to_string(spec.conf_mode)), format_real(p)});
      }
    }
  }
  return table;
}

Table eigen(const ExperimentSpec& spec) {
  Table table;
  table.header = {"d", "nu", "j_nu1", "lambda_d"};
  const std::vector<int> dims =
      spec.dimensions.empty() ? std::vector<int>{1, 2, 3} : spec.dimensions;
  for (int d : dims) {
    const auto ev = unit_ball_eigenvalue(d);
    table.rows.push_back({integer(d), format_real(ev.nu), format_real(ev.first_zero),
                          format_real(ev.lambda_d)});
  }
  return table;
}

}  // namespace

std::string_view to_string(Recipe recipe) {
  switch (recipe) {
    case Recipe::theorem1_rate_curve: return "theorem1_rate_curve";
    case Recipe::theorem2_lln_trend: return "theorem2_lln_trend";
    case Recipe::propa_check: return "propa_check";
    case Recipe::expectation_check: return "expectation_check";
    case Recipe::confinement_table: return "confinement_table";
    case Recipe::eigen_table: return "eigen_table";
  }
  return "eigen_table";
}

Recipe parse_recipe(std::string_view text) {
  for (Recipe r : {Recipe::theorem1_rate_curve, Recipe::theorem2_lln_trend, Recipe::propa_check,
                   Recipe::expectation_check, Recipe::confinement_table, Recipe::eigen_table}) {
    if (to_string(r) == text) return r;
  }
  fail(ErrorCode::config_error, "unknown recipe '" + std::string(text) + "'");
}

ExperimentSpec spec_from_config(const RunConfig& config) {
  ExperimentSpec spec;
  if (!config.recipe.empty()) spec.recipe = parse_recipe(config.recipe);
  spec.params = config.params;
  spec.kappas = config.kappas;
  spec.times = config.times;
  spec.dimensions = config.dimensions;
  spec.ball_radii = config.ball_radii;
  spec.conf_mode = parse_confinement_mode(config.conf_mode);
  spec.replicates = config.replicates;
  spec.seed = config.seed;
  spec.epsilon = config.epsilon;
  spec.threads = config.threads;
  spec.output_path = config.output;
  if (spec.kappas.empty()) spec.kappas = {config.params.kappa};
  return spec;
}

void validate(const ExperimentSpec& spec) {
  spec.params.validate();
  require(spec.replicates >= 1, "replicates must be >= 1");
  for (double t : spec.times) {
    require(t >= 0.0 && t <= spec.params.t_max, "grid times must lie in [0, t_max]");
  }
  for (std::size_t i = 1; i < spec.times.size(); ++i) {
    require(spec.times[i] > spec.times[i - 1], "grid times must be increasing");
  }
  switch (spec.recipe) {
    case Recipe::theorem1_rate_curve:
      require_growing_radius(spec);
      require(!spec.kappas.empty(), "theorem1_rate_curve needs grid.kappa");
      require(spec.times.size() >= 3, "theorem1_rate_curve needs at least 3 grid.t values");
      for (double k : spec.kappas) require(k > 0.0, "kappa values must be positive");
      for (double t : spec.times) require(t > 0.0, "grid times must be positive");
      break;
    case Recipe::theorem2_lln_trend:
      require_growing_radius(spec);
      require(!spec.times.empty(), "theorem2_lln_trend needs grid.t");
      require(spec.replicates >= 100, "theorem2_lln_trend needs >= 100 replicates");
      break;
    case Recipe::propa_check:
    case Recipe::expectation_check:
    case Recipe::confinement_table:
    case Recipe::eigen_table:
      break;
  }
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string Table::to_csv() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  return out;
}

Table run_recipe(const ExperimentSpec& spec) {
  validate(spec);
  switch (spec.recipe) {
    case Recipe::theorem1_rate_curve: return theorem1(spec);
    case Recipe::theorem2_lln_trend: return theorem2(spec);
    case Recipe::propa_check: return propa(spec);
    case Recipe::expectation_check: return expectation(spec);
    case Recipe::confinement_table: return confinement(spec);
    case Recipe::eigen_table: return eigen(spec);
  }
  fail(ErrorCode::config_error, "unknown recipe");
}

Table simulate_table(const ExperimentSpec& spec) {
  spec.params.validate();
  Table table;
  table.header = {"replicate", "t", "N_t", "n_t", "r_t"};
  const auto times = default_times(spec);
  std::vector<SimulationResult> results(static_cast<std::size_t>(spec.replicates));
  for (std::int64_t rep = 0; rep < spec.replicates; ++rep) {
    results[static_cast<std::size_t>(rep)] =
        simulate(spec.params, times, spec.seed, StrategyCondition::none(), {},
                 static_cast<std::uint64_t>(rep));
  }
  for (std::int64_t rep = 0; rep < spec.replicates; ++rep) {
    for (const auto& s : results[static_cast<std::size_t>(rep)].snapshots) {
      table.rows.push_back({integer(rep), format_real(s.t), integer(s.total), integer(s.active),
                            format_real(s.radius)});
    }
  }
  return table;
}

Table ld_table(const ExperimentSpec& spec) {
  spec.params.validate();
  require_growing_radius(spec);
  Table table;
  table.header = {"kappa", "t", "r", "mode", "threshold", "p_t", "p_hat", "std_error",
                  "zero_hits", "t0"};
  const auto times = default_times(spec);
  for (double kappa : spec.kappas) {
    ModelParams params = spec.params;
    params.kappa = kappa;
    for (std::size_t i = 0; i < times.size(); ++i) {
      LdOptions options;
      options.mode = spec.ld_mode;
      options.threads = spec.threads;
      const auto e =
          estimate_ld_probability(params, times[i], spec.replicates, derive_seed(spec.seed, i), options);
      table.rows.push_back({format_real(kappa), format_real(times[i]),
                            format_real(params.radius.at(times[i])),
                            std::string(to_string(spec.ld_mode)), format_real(e.threshold.threshold()),
                            format_real(e.p_t.value), format_real(e.probability.value),
                            format_real(e.probability.std_error), boolean(e.probability.zero_hits),
                            format_real(e.t0)});
    }
  }
  return table;
}

std::string version_string() { return std::string("bbm ") + BBM_VERSION; }

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string manifest_json(const ExperimentSpec& spec, const std::string& name,
                          const std::string& csv_file, const std::string& started_at,
                          double wall_clock_seconds) {
  const auto& p = spec.params;
  nlohmann::ordered_json radius = {{"kind", std::string(to_string(p.radius.kind()))},
                                   {"coefficient", p.radius.coefficient()}};
  if (p.radius.kind() == RadiusSchedule::Kind::power) radius["exponent"] = p.radius.exponent();
  nlohmann::ordered_json doc = {
      {"name", name},
      {"recipe", std::string(to_string(spec.recipe))},
      {"version", version_string()},
      {"seed", spec.seed},
      {"replicates", spec.replicates},
      {"threads", spec.threads},
      {"params",
       {{"dimension", p.dimension},
        {"beta", p.beta},
        {"kappa", p.kappa},
        {"t_max", p.t_max},
        {"dt", p.dt},
        {"bridge_correction", p.bridge_correction},
        {"radius", radius}}},
      {"grid",
       {{"kappa", spec.kappas},
        {"t", spec.times},
        {"dimension", spec.dimensions},
        {"b", spec.ball_radii},
        {"conf_mode", std::string(to_string(spec.conf_mode))},
        {"ld_mode", std::string(to_string(spec.ld_mode))},
        {"epsilon", spec.epsilon}}},
      {"csv", csv_file},
      {"started_at", started_at},
      {"wall_clock_seconds", wall_clock_seconds},
  };
  return doc.dump(2) + "\n";
}

RunOutcome write_outputs(const ExperimentSpec& spec, const std::string& name, const Table& table,
                         const std::string& started_at, double wall_clock_seconds) {
  RunOutcome outcome;
  outcome.table = table;
  if (spec.output_path.empty()) return outcome;

  namespace fs = std::filesystem;
  const fs::path dir(spec.output_path);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io_error, "cannot create output directory '" + dir.string() + "'");
  const fs::path csv = dir / (name + ".csv");
  const fs::path manifest = dir / (name + ".manifest.json");
  const fs::path csv_tmp = dir / (name + ".csv.partial");
  const fs::path manifest_tmp = dir / (name + ".manifest.json.partial");

  auto write = [](const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    out.close();
    if (!out) fail(ErrorCode::io_error, "cannot write '" + path.string() + "'");
  };
  try {
    write(csv_tmp, table.to_csv());
    write(manifest_tmp,
          manifest_json(spec, name, csv.filename().string(), started_at, wall_clock_seconds));
    fs::rename(csv_tmp, csv);
    fs::rename(manifest_tmp, manifest);
  } catch (...) {
    fs::remove(csv_tmp, ec);
    fs::remove(manifest_tmp, ec);
    fs::remove(csv, ec);
    fs::remove(manifest, ec);
    throw;
  }
  outcome.csv_path = csv.string();
  outcome.manifest_path = manifest.string();
  return outcome;
}

RunOutcome run(const ExperimentSpec& spec) {
  return run_and_write(spec, std::string(to_string(spec.recipe)), run_recipe);
}

}  // namespace bbm
