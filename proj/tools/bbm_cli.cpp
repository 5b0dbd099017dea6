// Command-line front end: bbm <simulate|expect|ldp|lln|propa|conf|eigen|run> [options]

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bbm/config.hpp"
#include "bbm/error.hpp"
#include "bbm/experiment.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> replicates;
  std::optional<int> threads;
  std::string out;

  std::optional<int> dimension;
  std::optional<double> beta;
  std::optional<double> kappa;
  std::optional<double> t_max;
  std::optional<double> dt;
  std::optional<std::string> radius_kind;
  std::optional<double> radius_coefficient;
  std::optional<double> radius_exponent;
  std::optional<bool> bridge;
  std::string times;
  std::string kappas;
  std::string dims;
  std::string balls;
  std::string mode;
  std::optional<double> epsilon;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Flat key = value config file");
  cmd->add_option("--seed", o.seed, "64-bit seed");
  cmd->add_option("--replicates", o.replicates, "Replicates (or paths)");
  cmd->add_option("--threads", o.threads, "Worker threads, 0 = auto (BBM_THREADS fallback)");
  cmd->add_option("--out", o.out, "Output directory for CSV + manifest (default: CSV to stdout)");
  cmd->add_option("--dimension,-d", o.dimension, "Spatial dimension");
  cmd->add_option("--beta", o.beta, "Branching rate");
  cmd->add_option("--kappa", o.kappa, "Deviation parameter");
  cmd->add_option("--t-max", o.t_max, "Horizon");
  cmd->add_option("--dt", o.dt, "Motion step");
  cmd->add_option("--radius-kind", o.radius_kind, "power | logarithmic | fixed");
  cmd->add_option("--radius-coefficient", o.radius_coefficient, "A in A t^a, A log(1+t), or the fixed radius");
  cmd->add_option("--radius-exponent", o.radius_exponent, "a in A t^a");
  cmd->add_option("--bridge", o.bridge, "Brownian-bridge correction of the running max (true/false)");
  cmd->add_option("--times,-t", o.times, "Comma-separated observation times");
  cmd->add_option("--kappas", o.kappas, "Comma-separated kappa grid");
  cmd->add_option("--dims", o.dims, "Comma-separated dimensions");
  cmd->add_option("--balls", o.balls, "Comma-separated ball radii");
  cmd->add_option("--mode", o.mode, "conf: leading_term|series|monte_carlo; ldp: naive|stratified");
  cmd->add_option("--epsilon", o.epsilon, "LLN window half-width");
}

// Builds the config text so flags and files share one validation path.
bbm::RunConfig resolve(const CommonOptions& o, const std::string& recipe) {
  std::string text;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) bbm::fail(bbm::ErrorCode::io_error, "cannot read config '" + o.config + "'");
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  // Later keys replace earlier ones.
  std::map<std::string, std::string> overrides;
  auto set = [&overrides](const std::string& key, const std::string& value) { overrides[key] = value; };
  auto real = [](double v) { return bbm::format_real(v); };
  if (!recipe.empty()) set("recipe", recipe);
  if (o.seed) set("seed", std::to_string(*o.seed));
  if (o.replicates) set("replicates", std::to_string(*o.replicates));
  if (o.threads) set("threads", std::to_string(*o.threads));
  if (!o.out.empty()) set("output", o.out);
  if (o.dimension) set("dimension", std::to_string(*o.dimension));
  if (o.beta) set("beta", real(*o.beta));
  if (o.kappa) set("kappa", real(*o.kappa));
  if (o.t_max) set("t_max", real(*o.t_max));
  if (o.dt) set("dt", real(*o.dt));
  if (o.radius_kind) set("radius.kind", *o.radius_kind);
  if (o.radius_coefficient) set("radius.coefficient", real(*o.radius_coefficient));
  if (o.radius_exponent) set("radius.exponent", real(*o.radius_exponent));
  if (o.bridge) set("bridge_correction", *o.bridge ? "true" : "false");
  if (!o.times.empty()) set("grid.t", o.times);
  if (!o.kappas.empty()) set("grid.kappa", o.kappas);
  if (!o.dims.empty()) set("grid.dimension", o.dims);
  if (!o.balls.empty()) set("grid.b", o.balls);
  if (!o.mode.empty() && recipe == "confinement_table") set("conf.mode", o.mode);
  if (o.epsilon) set("epsilon", real(*o.epsilon));

  std::string merged;
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) {
      std::string key = line.substr(0, eq);
      key.erase(0, key.find_first_not_of(" \t"));
      key.erase(key.find_last_not_of(" \t") + 1);
      if (overrides.count(key)) continue;
    }
    merged += line + "\n";
  }
  for (const auto& [k, v] : overrides) merged += k + " = " + v + "\n";
  return bbm::parse_config(merged);
}

void emit(const bbm::RunOutcome& outcome) {
  if (outcome.csv_path.empty()) {
    std::cout << outcome.table.to_csv();
  } else {
    std::cerr << "wrote " << outcome.csv_path << " and " << outcome.manifest_path << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branching Brownian motion with deactivation at an expanding ball"};
  app.require_subcommand(1);

  CommonOptions o;
  std::string config_path;

  auto* simulate = app.add_subcommand("simulate", "Per-replicate snapshots: replicate,t,N_t,n_t,r_t");
  auto* expect = app.add_subcommand("expect", "Sample mean of n_t against p_t e^{beta t}");
  auto* ldp = app.add_subcommand("ldp", "Probability that n_t falls below gamma_t p_t e^{beta t}");
  auto* lln = app.add_subcommand("lln", "Distribution of r(t)^2 (log n_t / t - beta)");
  auto* propa = app.add_subcommand("propa", "Population law against the geometric distribution");
  auto* conf = app.add_subcommand("conf", "Confinement probabilities on a (d, b, t) grid");
  auto* eigen = app.add_subcommand("eigen", "First Bessel zeros and unit-ball eigenvalues");
  auto* runcmd = app.add_subcommand("run", "Run the recipe described by a config file");
  for (auto* cmd : {simulate, expect, ldp, lln, propa, conf, eigen, runcmd}) add_common(cmd, o);
  runcmd->add_option("config_file", config_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (runcmd->parsed()) {
      o.config = config_path;
      const auto cfg = resolve(o, "");
      if (cfg.recipe.empty()) bbm::fail(bbm::ErrorCode::config_error, "config needs a recipe");
      emit(bbm::run(bbm::spec_from_config(cfg)));
      return 0;
    }
    std::string recipe;
    if (expect->parsed()) recipe = "expectation_check";
    if (lln->parsed()) recipe = "theorem2_lln_trend";
    if (propa->parsed()) recipe = "propa_check";
    if (conf->parsed()) recipe = "confinement_table";
    if (eigen->parsed()) recipe = "eigen_table";

    auto spec = bbm::spec_from_config(resolve(o, recipe));
    if (simulate->parsed()) {
      if (!o.replicates) spec.replicates = 1;
      emit(bbm::run_and_write(spec, "simulate", bbm::simulate_table));
    } else if (ldp->parsed()) {
      if (!o.mode.empty()) {
        if (o.mode == "naive") {
          spec.ld_mode = bbm::EstimatorMode::naive;
        } else if (o.mode == "stratified") {
          spec.ld_mode = bbm::EstimatorMode::stratified;
        } else {
          bbm::fail(bbm::ErrorCode::unsupported_mode, "ldp mode must be naive or stratified");
        }
      }
      emit(bbm::run_and_write(spec, "ldp", bbm::ld_table));
    } else {
      emit(bbm::run(spec));
    }
    return 0;
  } catch (const bbm::Error& e) {
    std::cerr << "error: " << bbm::error_code_name(e.code()) << ": " << e.what() << "\n";
    return bbm::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << bbm::error_code_name(bbm::ErrorCode::io_error) << ": " << e.what()
              << "\n";
    return bbm::exit_code(bbm::ErrorCode::io_error);
  }
}
