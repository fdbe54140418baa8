#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace breachcat {

// Inverted-CDF (type 1) empirical quantile: the smallest order statistic
// x_(k) with k/n >= p. `sorted` must be ascending and non-empty.
double quantile_type1(std::span<const double> sorted, double p);
std::vector<double> quantiles_type1(std::vector<double> values, std::span<const double> probs);

inline constexpr const char* kQuantileConvention = "inverted-cdf (type 1)";

double mean(std::span<const double> xs);
// Sample variance with divisor n - 1 (0 when n < 2).
double variance(std::span<const double> xs);

double normal_cdf(double z);
double normal_sf(double z);
double normal_quantile(double p);
// log of the standard normal survival function, accurate far into the tail.
double log_normal_sf(double z);

// Upper tail probability of a chi-square variate.
double chi2_sf(double x, double df);
// Two-sided p-value for a Student t statistic.
double student_t_two_sided(double t, double df);

// Simple least squares of y on x.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
    double residual_sd = 0.0;
    std::size_t n = 0;
};
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

} // namespace breachcat
