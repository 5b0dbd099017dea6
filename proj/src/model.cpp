#include "bbm/model.hpp"

#include <cmath>
#include <sstream>

#include "bbm/error.hpp"

namespace bbm {

RadiusSchedule RadiusSchedule::power(double coefficient, double exponent) {
  if (!(coefficient > 0.0) || !std::isfinite(coefficient)) {
    fail(ErrorCode::invalid_argument, "radius coefficient must be positive");
  }
  if (!(exponent > 0.0 && exponent < 0.5)) {
    std::ostringstream os;
    os << "power radius exponent " << exponent << " outside (0, 1/2)";
    fail(ErrorCode::subdiffusivity_violated, os.str());
  }
  return RadiusSchedule(Kind::power, coefficient, exponent);
}

RadiusSchedule RadiusSchedule::logarithmic(double coefficient) {
  if (!(coefficient > 0.0) || !std::isfinite(coefficient)) {
    fail(ErrorCode::invalid_argument, "radius coefficient must be positive");
  }
  return RadiusSchedule(Kind::logarithmic, coefficient, 0.0);
}

RadiusSchedule RadiusSchedule::fixed(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    fail(ErrorCode::invalid_argument, "fixed radius must be positive");
  }
  return RadiusSchedule(Kind::fixed, value, 0.0);
}

double RadiusSchedule::at(double t) const {
  if (t < 0.0) fail(ErrorCode::domain_error, "radius evaluated at negative time");
  switch (kind_) {
    case Kind::power: return coefficient_ * std::pow(t, exponent_);
    case Kind::logarithmic: return coefficient_ * std::log1p(t);
    case Kind::fixed: return coefficient_;
  }
  return coefficient_;
}

std::string RadiusSchedule::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::power: os << "power(" << coefficient_ << "," << exponent_ << ")"; break;
    case Kind::logarithmic: os << "logarithmic(" << coefficient_ << ")"; break;
    case Kind::fixed: os << "fixed(" << coefficient_ << ")"; break;
  }
  return os.str();
}

std::string_view to_string(RadiusSchedule::Kind kind) {
  switch (kind) {
    case RadiusSchedule::Kind::power: return "power";
    case RadiusSchedule::Kind::logarithmic: return "logarithmic";
    case RadiusSchedule::Kind::fixed: return "fixed";
  }
  return "power";
}

RadiusSchedule::Kind parse_radius_kind(std::string_view text) {
  if (text == "power") return RadiusSchedule::Kind::power;
  if (text == "logarithmic" || text == "log") return RadiusSchedule::Kind::logarithmic;
  if (text == "fixed") return RadiusSchedule::Kind::fixed;
  fail(ErrorCode::config_error, "unknown radius kind '" + std::string(text) + "'");
}

double radius_at(const RadiusSchedule& schedule, double t) { return schedule.at(t); }

double ModelParams::log_gamma_at(double t) const { return -kappa * radius.at(t); }

double ModelParams::gamma_at(double t) const { return std::exp(log_gamma_at(t)); }

void ModelParams::validate() const {
  if (dimension < 1) fail(ErrorCode::invalid_argument, "dimension must be >= 1");
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    fail(ErrorCode::invalid_argument, "beta must be positive");
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    fail(ErrorCode::invalid_argument, "kappa must be positive");
  }
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    fail(ErrorCode::invalid_argument, "t_max must be positive");
  }
  if (!(dt > 0.0) || dt > t_max) {
    fail(ErrorCode::invalid_argument, "dt must satisfy 0 < dt <= t_max");
  }
}

double default_step(const RadiusSchedule& schedule, double t_ref) {
  const double r = schedule.at(t_ref);
  if (!(r > 0.0)) fail(ErrorCode::invalid_argument, "default step needs r(t_ref) > 0");
  return 0.01 * r * r;
}

double DeviationThreshold::threshold() const { return std::exp(log_threshold); }

DeviationThreshold deviation_threshold(const ModelParams& params, double t, double p_t) {
  if (t < 0.0) fail(ErrorCode::domain_error, "threshold time must be nonnegative");
  if (!(p_t > 0.0 && p_t <= 1.0)) {
    fail(ErrorCode::domain_error, "p_t must lie in (0, 1]");
  }
  DeviationThreshold out;
  out.t = t;
  const double log_gamma = params.log_gamma_at(t);
  out.gamma_t = std::exp(log_gamma);
  out.p_t = p_t;
  out.log_threshold = log_gamma + std::log(p_t) + params.beta * t;
  return out;
}

}  // namespace bbm
