#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bbm/analytic.hpp"
#include "bbm/config.hpp"
#include "bbm/estimate.hpp"
#include "bbm/model.hpp"

namespace bbm {

enum class Recipe {
  theorem1_rate_curve,
  theorem2_lln_trend,
  propa_check,
  expectation_check,
  confinement_table,
  eigen_table,
};

std::string_view to_string(Recipe recipe);
Recipe parse_recipe(std::string_view text);

struct ExperimentSpec {
  Recipe recipe = Recipe::eigen_table;
  ModelParams params;
  std::vector<double> kappas;
  std::vector<double> times;
  std::vector<int> dimensions;
  std::vector<double> ball_radii;
  ConfinementMode conf_mode = ConfinementMode::series;
  EstimatorMode ld_mode = EstimatorMode::stratified;
  std::int64_t replicates = 1000;
  std::uint64_t seed = 1;
  double epsilon = 0.25;
  int threads = 0;
  std::string output_path;
};

ExperimentSpec spec_from_config(const RunConfig& config);

// Recipe-specific checks; the rate-curve and LLN recipes refuse radius schedules that do
// not grow (ErrorCode::fixed_radius_rejected).
void validate(const ExperimentSpec& spec);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
};

std::string format_real(double value);

Table run_recipe(const ExperimentSpec& spec);

// Per-replicate snapshot dump: replicate,t,N_t,n_t,r_t.
Table simulate_table(const ExperimentSpec& spec);

// Large-deviation probability at every (kappa, t) in the grid, no fit.
Table ld_table(const ExperimentSpec& spec);

struct RunOutcome {
  Table table;
  std::string csv_path;       // empty when nothing was written
  std::string manifest_path;  // idem
};

// Computes `name`'s table via `produce` and writes <out>/<name>.csv plus
// <out>/<name>.manifest.json. Nothing is left behind if anything fails.
// With an empty output path only the table is returned.
template <typename Producer>
RunOutcome run_and_write(const ExperimentSpec& spec, const std::string& name, Producer produce);

RunOutcome run(const ExperimentSpec& spec);

std::string manifest_json(const ExperimentSpec& spec, const std::string& name,
                          const std::string& csv_file, const std::string& started_at,
                          double wall_clock_seconds);

std::string version_string();

// Implementation detail of run_and_write.
RunOutcome write_outputs(const ExperimentSpec& spec, const std::string& name, const Table& table,
                         const std::string& started_at, double wall_clock_seconds);
std::string utc_timestamp();

template <typename Producer>
RunOutcome run_and_write(const ExperimentSpec& spec, const std::string& name, Producer produce) {
  const std::string started = utc_timestamp();
  const auto begin = std::chrono::steady_clock::now();
  Table table = produce(spec);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
  return write_outputs(spec, name, table, started, elapsed);
}

}  // namespace bbm
