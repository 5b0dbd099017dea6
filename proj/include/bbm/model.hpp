#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace bbm {

// Radius r(t) of the centered ball B(0, r(t)) that decides which lineages are active.
//
// Three families are supported: power A t^a with 0 < a < 1/2, logarithmic
// A log(1 + t), and a constant. Only the first two grow without bound; the
// constant one exists for confinement checks at a fixed ball.
class RadiusSchedule {
 public:
  enum class Kind { power, logarithmic, fixed };

  static RadiusSchedule power(double coefficient, double exponent);
  static RadiusSchedule logarithmic(double coefficient);
  static RadiusSchedule fixed(double value);

  double at(double t) const;

  Kind kind() const { return kind_; }
  double coefficient() const { return coefficient_; }
  double exponent() const { return exponent_; }
  bool grows_unbounded() const { return kind_ != Kind::fixed; }

  std::string describe() const;

 private:
  RadiusSchedule(Kind kind, double coefficient, double exponent)
      : kind_(kind), coefficient_(coefficient), exponent_(exponent) {}

  Kind kind_;
  double coefficient_;
  double exponent_;
};

std::string_view to_string(RadiusSchedule::Kind kind);
RadiusSchedule::Kind parse_radius_kind(std::string_view text);

double radius_at(const RadiusSchedule& schedule, double t);

struct ModelParams {
  int dimension = 1;
  double beta = 0.125;
  double kappa = 0.25;
  double t_max = 80.0;
  RadiusSchedule radius = RadiusSchedule::power(1.0, 0.4);
  double dt = 0.01;
  bool bridge_correction = true;

  // Bessel index of the radial process.
  double nu() const { return 0.5 * dimension - 1.0; }
  double gamma_at(double t) const;
  double log_gamma_at(double t) const;

  // Throws bbm::Error(invalid_argument) unless d >= 1, beta > 0, kappa > 0
  // and 0 < dt <= t_max.
  void validate() const;
};

// dt = 0.01 r(t_ref)^2, the step that keeps the grid-crossing bias of the
// running maximum small relative to the ball size at t_ref.
double default_step(const RadiusSchedule& schedule, double t_ref);

struct DeviationThreshold {
  double t = 0.0;
  double gamma_t = 1.0;
  double p_t = 1.0;
  // log(gamma_t) + log(p_t) + beta t; the linear value overflows for large beta t.
  double log_threshold = 0.0;

  double threshold() const;
};

DeviationThreshold deviation_threshold(const ModelParams& params, double t, double p_t);

}  // namespace bbm
