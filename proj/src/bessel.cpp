#include "bbm/bessel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "bbm/error.hpp"

namespace bbm {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double series(double nu, double x) {
  const double half = 0.5 * x;
  double term = std::exp(nu * std::log(half) - std::lgamma(nu + 1.0));
  double sum = term;
  const double q = half * half;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (k * (k + nu));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

double hankel(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double p = 0.0;
  double q = 0.0;
  double term = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 60; ++k) {
    if (k > 0) {
      const double odd = 2.0 * k - 1.0;
      term *= (mu - odd * odd) / (k * 8.0 * x);
    }
    if (std::abs(term) > prev) break;  // asymptotic series started to diverge
    prev = std::abs(term);
    const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) {
      p += sign * term;
    } else {
      q += sign * term;
    }
    if (std::abs(term) < 1e-17) break;
  }
  const double chi = x - (0.5 * nu + 0.25) * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

// Miller's algorithm: recur f_{m-1} = 2(a + m)/x f_m - f_{m+1} downward from a
// large start order; J_{a+m} is proportional to f_m for every m reached.
double miller(double nu, double x) {
  const double base = std::floor(nu);
  const double alpha = nu - base;  // in [0, 1)
  const int target = static_cast<int>(base);  // >= -1
  const double scale_order = std::max(x, nu);
  int start = static_cast<int>(scale_order + 30.0 + 6.0 * std::sqrt(scale_order));
  if (start % 2 != 0) ++start;

  // Neumann coefficients c_k = (alpha + 2k) Gamma(alpha + k) / k!.
  std::vector<double> coeff(static_cast<std::size_t>(start / 2 + 1));
  coeff[0] = std::tgamma(alpha + 1.0);
  double g = coeff[0];
  for (std::size_t k = 1; k < coeff.size(); ++k) {
    if (k > 1) g *= (alpha + static_cast<double>(k) - 1.0) / static_cast<double>(k);
    coeff[k] = (alpha + 2.0 * static_cast<double>(k)) * g;
  }

  double f_next = 0.0;
  double f = 1e-300;
  double sum = 0.0;
  double f_target = 0.0;
  if (start == target) f_target = f;
  sum += coeff[static_cast<std::size_t>(start / 2)] * f;
  for (int m = start; m > std::min(target, 0); --m) {
    const double f_prev = 2.0 * (alpha + m) / x * f - f_next;
    f_next = f;
    f = f_prev;
    const int order = m - 1;
    if (order >= 0 && order % 2 == 0) sum += coeff[static_cast<std::size_t>(order / 2)] * f;
    if (order == target) f_target = f;
    if (std::abs(f) > 1e250) {
      f *= 1e-250;
      f_next *= 1e-250;
      sum *= 1e-250;
      f_target *= 1e-250;
    }
  }
  return f_target * std::pow(0.5 * x, alpha) / sum;
}

}  // namespace

double bessel_j(double nu, double x) {
  if (!(x >= 0.0)) fail(ErrorCode::domain_error, "bessel_j: x must be nonnegative");
  if (!(nu >= -0.5)) fail(ErrorCode::domain_error, "bessel_j: nu must be >= -1/2");
  if (x == 0.0) {
    if (nu == 0.0) return 1.0;
    if (nu > 0.0) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  if (x <= 2.0) return series(nu, x);
  if (x > 1000.0 && x > 20.0 * nu * nu) return hankel(nu, x);
  return miller(nu, x);
}

double first_positive_zero(double nu) {
  if (!(nu >= -0.5)) fail(ErrorCode::domain_error, "first_positive_zero: nu must be >= -1/2");
  // j_{nu,1} increases with nu; this bracket holds it and excludes j_{nu,2}.
  double lo = std::max(nu, 0.0) + 1.0;
  double hi = nu + 2.0 + 2.0 * std::cbrt(nu + 1.0);
  double f_lo = bessel_j(nu, lo);
  double f_hi = bessel_j(nu, hi);
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    std::ostringstream os;
    os << "first_positive_zero: no sign change in [" << lo << ", " << hi << "] for nu=" << nu;
    fail(ErrorCode::no_sign_change, os.str());
  }
  for (int it = 0; it < 200 && hi - lo > 4.0 * kEps * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = bessel_j(nu, mid);
    if (f_mid == 0.0) return mid;
    if (f_mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double second_positive_zero(double nu) {
  const double j1 = first_positive_zero(nu);
  double lo = j1 + 1.0;  // zeros are separated by more than pi - 1/2 for nu >= -1/2
  double f_lo = bessel_j(nu, lo);
  if (!(f_lo < 0.0)) fail(ErrorCode::no_sign_change, "second_positive_zero: bad seed");
  double hi = lo;
  double f_hi = f_lo;
  for (int it = 0; it < 100 && f_hi < 0.0; ++it) {
    lo = hi;
    hi += 0.25;
    f_hi = bessel_j(nu, hi);
  }
  if (!(f_hi > 0.0)) fail(ErrorCode::no_sign_change, "second_positive_zero: no sign change");
  for (int it = 0; it < 200 && hi - lo > 4.0 * kEps * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = bessel_j(nu, mid);
    if (f_mid == 0.0) return mid;
    if (f_mid < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace bbm
