#pragma once

#include <span>

namespace srm {

// Pearson correlation. Throws NumericError for fewer than two points or zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  double operator()(double x) const { return intercept + slope * x; }
};

// Weighted least squares of y on x (unit weights when `w` is empty).
// Throws NumericError when x has no weighted variance.
Line fit_line(std::span<const double> x, std::span<const double> y, std::span<const double> w = {});

double mean(std::span<const double> v);
// Standard error of the mean (sample sd / sqrt(n)); 0 for n < 2.
double standard_error(std::span<const double> v);

// Regularized upper incomplete gamma Q(a, x): series for x < a + 1,
// Lentz continued fraction otherwise.
double regularized_gamma_q(double a, double x);

// P(X > x) for X ~ chi-squared with `df` degrees of freedom.
double chi_squared_sf(double x, double df);

struct ChiSquared {
  double chi2 = 0.0;
  double p_value = 1.0;
};

// Pooled two-proportion test, df = 1. A pooled proportion of 0 or 1 gives
// chi2 = 0, p = 1.
ChiSquared two_proportion_chisq(long k1, long n1, long k2, long n2, bool yates = false);

}  // namespace srm
