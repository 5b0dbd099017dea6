#pragma once

namespace bbm {

// Bessel function of the first kind J_nu(x) for nu >= -1/2 and x >= 0.
//
// Power series for x <= 2, Miller backward recurrence normalized by the
// Neumann sum (x/2)^a = sum_k (a + 2k) Gamma(a + k) / k! J_{a+2k}(x) up to
// moderate x, Hankel's asymptotic expansion beyond. Absolute error is below
// 1e-12 on [0, 50] for the orders used here (|nu| <= 10).
double bessel_j(double nu, double x);

// First positive zero j_{nu,1}. Throws ErrorCode::no_sign_change if the
// seeded bracket does not straddle a root.
double first_positive_zero(double nu);

// Second positive zero j_{nu,2}; only used for the asymptotic-regime heuristic.
double second_positive_zero(double nu);

}  // namespace bbm
