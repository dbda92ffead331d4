#pragma once

namespace caprisk {

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation, relative error around 1e-14 over sane (a, b).
double regularized_incomplete_beta(double x, double a, double b);

// Student's t CDF with (possibly fractional) degrees of freedom.
double student_t_cdf(double x, double dof);

// Inverse of student_t_cdf in x for p in (0, 1).
double student_t_quantile(double p, double dof);

} // namespace caprisk
