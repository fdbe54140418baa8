#pragma once

#include "breachcat/events.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace breachcat {

// Trend of the expected count per half-year bin.
//   ExpMean  mu(t) = exp(beta0 + beta1 t)   (log link)
//   LinMean  mu(t) = beta0 + beta1 t        (identity link, mu > 0 enforced)
enum class MeanFamily { ExpMean, LinMean };

std::string_view to_string(MeanFamily f);

struct FreqSe {
    double beta0 = 0.0;
    double beta1 = 0.0;
    double theta = 0.0;
};

// Negative binomial count regression; variance mu + mu^2/theta. A fit whose
// dispersion ran to the Poisson boundary has theta = +inf.
struct FreqFit {
    MeanFamily mean_family = MeanFamily::ExpMean;
    double beta0 = 0.0;
    double beta1 = 0.0;
    double theta = 1.0;
    FreqSe se;
    std::array<std::array<double, 2>, 2> cov{};  // (beta0, beta1) block
    double logL = 0.0;
    double deviance = 0.0;
    std::size_t n_bins = 0;

    std::vector<double> t;       // time covariate of each fitted bin, years
    std::vector<double> counts;  // observed counts
    std::vector<double> fitted;  // mu at each bin
    bool theta_at_bound = false;
    int iterations = 0;

    double mean_at(double time) const;
};

struct FreqFitOptions {
    bool include_partial = false;  // keep partial first/last bins
    int max_iter = 500;
    double tol = 1e-11;
    double theta_max = 1e8;  // beyond this the fit is reported as Poisson
};

// Joint MLE of (beta0, beta1, theta): Newton beta steps at fixed theta
// alternating with a golden-section profile maximization in ln(theta).
FreqFit fit_nb(const BinnedCounts& counts, MeanFamily family, const FreqFitOptions& opts = {});
FreqFit fit_nb(std::span<const double> t, std::span<const double> y, MeanFamily family,
               const FreqFitOptions& opts = {});
// Same mean model with Poisson counts (theta fixed at infinity).
FreqFit fit_poisson(std::span<const double> t, std::span<const double> y, MeanFamily family,
                    const FreqFitOptions& opts = {});

// Log probability mass of NB(mu, theta) at integer y; Poisson when theta is infinite.
double nb_log_pmf(double y, double mu, double theta);
double nb_loglik(std::span<const double> y, std::span<const double> mu, double theta);

struct OverdispersionTest {
    double theta = 0.0;
    double statistic = 0.0;
    double p_value = 1.0;       // 1/2 chi2_0 + 1/2 chi2_1 boundary mixture
    double p_value_chi2 = 1.0;  // plain chi2_1
    double logL_nb = 0.0;
    double logL_poisson = 0.0;
};

// LR test of the fit against the Poisson model with the same mean family,
// on the series stored in the fit.
OverdispersionTest overdispersion_test(const FreqFit& fit);

struct GofTest {
    double deviance = 0.0;
    int df = 0;
    double p_value = 1.0;
};

// Residual deviance against chi2 with n_bins - 3 degrees of freedom.
GofTest deviance_gof(const FreqFit& fit);

struct ZTest {
    double z = 0.0;
    double p_value = 0.5;
};

// One-sided test of H1: growth rate of a exceeds growth rate of b.
ZTest growth_z_test(const FreqFit& a, const FreqFit& b);

// Two-sided Wald p-value for beta1 = 0.
double slope_wald_p(const FreqFit& fit);

struct Quartiles {
    std::uint64_t q25 = 0;
    std::uint64_t q50 = 0;
    std::uint64_t q75 = 0;
};

// Smallest k with NB CDF(k) >= p, by summing the mass function.
std::uint64_t nb_quantile(double mu, double theta, double p);
Quartiles nb_quartiles(const FreqFit& fit, double time);

// Expected count per half-year bin. Throws PreconditionError if a linear
// mean is not positive at `time`.
double predict_mean(const FreqFit& fit, double time);

} // namespace breachcat
