#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace breachcat {

struct TrendPoint {
    double t = 0.0;    // years
    double ids = 0.0;  // breach size, > 0
};

// Linear tau-quantile regression of ln(ids) on t.
struct QuantFit {
    double tau = 0.5;
    double a = 0.0;  // intercept, log-ids
    double b = 0.0;  // slope, log-ids per year
    double loss = 0.0;
    double p_slope = std::numeric_limits<double>::quiet_NaN();
    std::size_t n = 0;
};

double pinball(double residual, double tau);

// Exact solver: every line through two points with distinct t, plus the
// horizontal lines through each point, is scored and the smallest pinball
// loss wins. Ties go to the smallest |b|, then the smallest a.
QuantFit quantile_fit(std::span<const TrendPoint> points, double tau);

struct SlopeTest {
    double b_hat = 0.0;
    double p_value = 1.0;
    std::size_t replicates = 0;
    double boot_mean = 0.0;
    double boot_sd = 0.0;
};

// Pairs bootstrap of the slope. Replicate slopes are centred at their mean
// and p = (1 + #{|b* - mean b*| >= |b_hat|}) / (B + 1). Replicate k draws
// from a seed derived from (seed, k), so results do not depend on `threads`.
SlopeTest slope_test(std::span<const TrendPoint> points, double tau, std::size_t B, std::uint64_t seed,
                     unsigned threads = 1);
double slope_pvalue(std::span<const TrendPoint> points, double tau, std::size_t B, std::uint64_t seed,
                    unsigned threads = 1);

} // namespace breachcat
