#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bbm/model.hpp"

namespace bbm {

// Flat "key = value" configuration. '#' starts a comment, blank lines are
// ignored, list values are comma separated. Every key must be known.
//
// Model keys: dimension, beta, kappa, t_max, dt, radius.kind,
// radius.coefficient, radius.exponent, bridge_correction, seed, replicates.
// Experiment keys: recipe, grid.kappa, grid.t, grid.dimension, grid.b,
// conf.mode, epsilon, threads, output.
struct RunConfig {
  ModelParams params;
  bool dt_given = false;
  std::uint64_t seed = 1;
  std::int64_t replicates = 1000;

  std::string recipe;
  std::vector<double> kappas;
  std::vector<double> times;
  std::vector<int> dimensions;
  std::vector<double> ball_radii;
  std::string conf_mode = "series";
  double epsilon = 0.25;
  int threads = 0;
  std::string output;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

std::vector<double> parse_real_list(const std::string& text);

}  // namespace bbm
