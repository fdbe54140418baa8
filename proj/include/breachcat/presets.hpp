#pragma once

#include "breachcat/aggregate.hpp"
#include "breachcat/date.hpp"
#include "breachcat/freq.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

// Published configurations, so each reproduction is a single call.
namespace breachcat::presets {

inline constexpr std::array<double, 4> kFreqThresholds{1e4, 1e5, 1e6, 1e7};
inline constexpr std::array<double, 3> kTailThresholds{25e3, 1e5, 1e6};
inline constexpr double kTailMax = 3e9;          // largest HACK event
inline constexpr double kRollingU = 25e3;
inline constexpr std::size_t kRollingWindow = 50;
inline constexpr double kTrendU = 1e4;
inline constexpr double kTrendTau = 0.9;
// Severity sample size for the alpha bootstrap (post-2014 HACK, u = 25k).
inline constexpr std::size_t kSeverityBootstrapN = 167;

Date study_start();       // 2005-01-01
Date study_end();         // 2017-10-01 (exclusive)
Date tail_since();        // 2014-01-01
DateRange study_period();

// Half-year midpoints of the 25 complete bins 2005-H1 .. 2017-H1.
std::vector<double> historical_grid();

struct PublishedFreq {
    double u;
    std::size_t n;
    double beta0, beta0_se;
    double beta1, beta1_se;
    double theta, theta_se;
    double lr_p;   // over-dispersion LR p-value
    double gof_p;  // deviance chi-square p-value
};

inline constexpr std::array<PublishedFreq, 4> kPublishedExpMean{{
    {1e4, 623, 2.65, 0.13, 0.08, 0.02, 14.8, 7.0, 0.0003, 0.28},
    {1e5, 242, 1.45, 0.19, 0.11, 0.02, 11.9, 7.5, 0.05, 0.38},
    {1e6, 88, -0.23, 0.36, 0.19, 0.04, 4.6, 3.3, 0.15, 0.21},
    {1e7, 41, -0.79, 0.48, 0.17, 0.06, 3.2, 2.8, 0.47, 0.35},
}};

inline constexpr PublishedFreq kPublishedLinMean{1e4, 623, 13.1, 2.3, 1.7, 0.4, 14.3, 6.65, 0.0, 0.0};

// FreqFit carrying published coefficients on the historical grid.
FreqFit published_fit(const PublishedFreq& p, MeanFamily family);
FreqFit published_expmean_fit(double u);
FreqFit published_linmean_fit();

struct PublishedTail {
    double u;
    std::size_t n;
    double alpha, alpha_se, logL_pareto;
    double alpha1, alpha1_se, logL_trunc;
    double mu, mu_se, sigma2, sigma2_se, logL_lognormal;
};

inline constexpr std::array<PublishedTail, 3> kPublishedTail{{
    {25e3, 167, 0.35, 0.03, -341, 0.3, 0.03, -338, -12.8, 13, 7.1, 3, -340},
    {1e5, 101, 0.35, 0.03, -208, 0.3, 0.03, -204, -2.9, 4.0, 4.7, 1.3, -205},
    {1e6, 47, 0.40, 0.05, -90, 0.3, 0.05, -87, -4.1, 7.4, 4.5, 2.1, -89},
}};

enum class Table6Horizon { H2_2012, H1_2013 };

ForecastConfig table5(std::uint64_t seed = 42);
ForecastConfig table6(std::uint64_t seed = 42, Table6Horizon horizon = Table6Horizon::H2_2012);

inline constexpr std::array<double, 6> kTable5Median{1.6, 2.6, 0.5, 5.4, 7.8, 11.4};
inline constexpr std::array<double, 6> kTable6Median{0.19, 0.27, 0.07, 0.57, 0.81, 1.18};

std::vector<std::string> names();

} // namespace breachcat::presets
