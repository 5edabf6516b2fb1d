#pragma once

namespace styleaudit::stats {

// Regularized incomplete beta function I_x(a, b), evaluated with a Lentz
// continued fraction; a, b > 0, x in [0, 1].
double ibeta_reg(double a, double b, double x);

// Inverse of I_x(a, b) in x for p in [0, 1]. Newton iteration with a
// bisection guard.
double ibeta_reg_inv(double a, double b, double p);

// CDF of Student's t with df degrees of freedom.
double student_t_cdf(double df, double t);

// Upper one-sided critical value: the t with P(T <= t) = confidence.
double student_t_quantile(double df, double confidence);

}  // namespace styleaudit::stats
