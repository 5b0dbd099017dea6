#include "bbm/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "bbm/error.hpp"

namespace bbm {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorCode::config_error, "key '" + key + "': '" + value + "' is not a number");
  }
  return out;
}

std::int64_t to_integer(const std::string& key, const std::string& value) {
  std::int64_t out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorCode::config_error, "key '" + key + "': '" + value + "' is not an integer");
  }
  return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorCode::config_error, "key '" + key + "': '" + value + "' is not a 64-bit seed");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  fail(ErrorCode::config_error, "key '" + key + "': '" + value + "' is not a boolean");
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(to_real("list", item));
  }
  return out;
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::stringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      fail(ErrorCode::config_error, "line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      fail(ErrorCode::config_error, "line " + std::to_string(line_no) + ": empty key");
    }
    if (!entries.emplace(key, value).second) {
      fail(ErrorCode::config_error, "duplicate key '" + key + "'");
    }
  }

  RunConfig cfg;
  std::string radius_kind = "power";
  double radius_coefficient = 1.0;
  double radius_exponent = 0.4;

  for (const auto& [key, value] : entries) {
    if (key == "dimension") {
      cfg.params.dimension = static_cast<int>(to_integer(key, value));
    } else if (key == "beta") {
      cfg.params.beta = to_real(key, value);
    } else if (key == "kappa") {
      cfg.params.kappa = to_real(key, value);
    } else if (key == "t_max") {
      cfg.params.t_max = to_real(key, value);
    } else if (key == "dt") {
      cfg.params.dt = to_real(key, value);
      cfg.dt_given = true;
    } else if (key == "radius.kind") {
      radius_kind = value;
    } else if (key == "radius.coefficient") {
      radius_coefficient = to_real(key, value);
    } else if (key == "radius.exponent") {
      radius_exponent = to_real(key, value);
    } else if (key == "bridge_correction") {
      cfg.params.bridge_correction = to_bool(key, value);
    } else if (key == "seed") {
      cfg.seed = to_unsigned(key, value);
    } else if (key == "replicates") {
      cfg.replicates = to_integer(key, value);
    } else if (key == "recipe") {
      cfg.recipe = value;
    } else if (key == "grid.kappa") {
      cfg.kappas = parse_real_list(value);
    } else if (key == "grid.t") {
      cfg.times = parse_real_list(value);
    } else if (key == "grid.dimension") {
      for (double d : parse_real_list(value)) cfg.dimensions.push_back(static_cast<int>(d));
    } else if (key == "grid.b") {
      cfg.ball_radii = parse_real_list(value);
    } else if (key == "conf.mode") {
      cfg.conf_mode = value;
    } else if (key == "epsilon") {
      cfg.epsilon = to_real(key, value);
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(to_integer(key, value));
    } else if (key == "output") {
      cfg.output = value;
    } else {
      fail(ErrorCode::config_error, "unknown key '" + key + "'");
    }
  }

  switch (parse_radius_kind(radius_kind)) {
    case RadiusSchedule::Kind::power:
      cfg.params.radius = RadiusSchedule::power(radius_coefficient, radius_exponent);
      break;
    case RadiusSchedule::Kind::logarithmic:
      cfg.params.radius = RadiusSchedule::logarithmic(radius_coefficient);
      break;
    case RadiusSchedule::Kind::fixed:
      cfg.params.radius = RadiusSchedule::fixed(radius_coefficient);
      break;
  }

  if (!cfg.dt_given) {
    double t_ref = cfg.params.t_max;
    for (double t : cfg.times) {
      if (t > 0.0) t_ref = std::min(t_ref, t);
    }
    if (t_ref > 0.0) cfg.params.dt = std::min(default_step(cfg.params.radius, t_ref), t_ref);
  }
  if (cfg.replicates < 1) fail(ErrorCode::config_error, "replicates must be >= 1");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace bbm
