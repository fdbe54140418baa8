#pragma once

#include "breachcat/date.hpp"
#include "breachcat/rng.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace breachcat {

enum class TailFamily { Pareto, TruncPareto, TruncLognormal };

std::string_view to_string(TailFamily f);
std::optional<TailFamily> tail_family_from_string(std::string_view s);

// Severity model for breach sizes above a lower threshold u.
//   Pareto          Pr{X > x} = (x/u)^-alpha,                         x >= u
//   TruncPareto     Pareto conditioned on u <= X <= m
//   TruncLognormal  ln X ~ Normal(mu, sigma2) conditioned on X >= u
struct TailModel {
    TailFamily family = TailFamily::Pareto;
    double u = 1.0;
    std::optional<double> m;
    double alpha = 1.0;
    double mu = 0.0;
    double sigma2 = 1.0;

    static TailModel pareto(double alpha, double u);
    static TailModel trunc_pareto(double alpha, double u, double m);
    static TailModel trunc_lognormal(double mu, double sigma2, double u);

    void validate() const;
    double cdf(double x) const;
    // Inverse CDF at level v in [0, 1].
    double quantile(double v) const;
    // Infinite for an untruncated Pareto with alpha <= 1.
    double mean() const;
};

struct TailFit {
    TailModel model;
    std::map<std::string, double> se;  // keyed by parameter name: alpha, mu, sigma2
    // Log-likelihood of the sizes x (density in x).
    double logL = 0.0;
    // Log-likelihood of the log-sizes ln x, i.e. logL + sum(ln x). This is
    // the scale on which tail fits are commonly tabulated.
    double logL_log_scale = 0.0;
    std::size_t n = 0;
    std::optional<Date> window_end;
};

// Closed-form Pareto MLE: alpha = n / sum ln(x/u), se = alpha / sqrt(n).
TailFit fit_pareto(std::span<const double> xs, double u);

struct TruncParetoOptions {
    int max_iter = 200;
    double tol = 1e-12;
};

// Upper-truncated Pareto MLE on [u, m] by safeguarded Newton in ln(alpha),
// started at the untruncated closed form, with a golden-section fallback.
TailFit fit_truncated_pareto(std::span<const double> xs, double u, double m, const TruncParetoOptions& opts = {});

// Lower-truncated lognormal MLE by restarted Nelder-Mead from the
// untruncated moment estimates. Standard errors from a central-difference
// observed-information matrix; the sigma2 error uses the delta method.
TailFit fit_truncated_lognormal(std::span<const double> xs, double u);

struct LrTest {
    double statistic = 0.0;
    double p_value = 1.0;
    int df = 1;
};

// Likelihood-ratio test of a nested null model against an alternative
// fitted to the same sample.
LrTest lr_test(const TailFit& fit_null, const TailFit& fit_alt, int df);

struct DatedSeverity {
    Date date;
    double ids = 0.0;
};

struct RollingPoint {
    Date window_end;
    double alpha = 0.0;
    double se = 0.0;
};

struct RollingAlpha {
    std::vector<RollingPoint> points;
    std::vector<std::string> warnings;
};

// Pareto exponent on sliding windows of `window` consecutive events
// (events below u are dropped first). Input must be date-sorted.
RollingAlpha rolling_alpha(std::span<const DatedSeverity> events, double u, std::size_t window);

struct SurvivalPoint {
    double x = 0.0;
    double ccdf = 0.0;  // fraction of the sample >= x
};

std::vector<SurvivalPoint> survival_export(std::span<const double> xs, double u);

// Inverse-CDF sampler with per-model constants precomputed.
class SeveritySampler {
public:
    explicit SeveritySampler(const TailModel& model);
    double operator()(Rng& rng) const { return draw(rng.uniform()); }
    double draw(double v) const;

private:
    TailModel model_;
    double c_ = 0.0;       // 1 - (u/m)^alpha
    double inv_a_ = 0.0;   // 1 / alpha
    double sigma_ = 0.0;
    double su_ = 1.0;      // normal survival at the lower threshold
};

std::vector<double> sample_severity(const TailModel& model, std::size_t n, std::uint64_t seed);

} // namespace breachcat
