#pragma once

namespace hulc {

/// Standard normal distribution function.
double normal_cdf(double z);

/// Inverse of `normal_cdf`, by bisection. Throws std::domain_error unless
/// 0 < p < 1.
double normal_quantile(double p);

/// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
/// `y` must equal 1 - x; passing it separately keeps precision when x is
/// close to 1.
double incomplete_beta(double a, double b, double x, double y);
double incomplete_beta(double a, double b, double x);

/// Student t distribution function with `df` degrees of freedom.
double student_t_cdf(double t, double df);

/// Inverse of `student_t_cdf`, by bisection. Throws std::domain_error for
/// df < 1 or p outside (0, 1).
double student_t_quantile(int df, double p);

}  // namespace hulc
