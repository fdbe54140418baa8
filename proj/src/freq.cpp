#include "breachcat/freq.hpp"

#include "breachcat/errors.hpp"
#include "breachcat/optimize.hpp"
#include "breachcat/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace breachcat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Series {
    std::span<const double> t;
    std::span<const double> y;
};

double mean_value(MeanFamily fam, double b0, double b1, double t)
{
    return fam == MeanFamily::ExpMean ? std::exp(b0 + b1 * t) : b0 + b1 * t;
}

// lgamma(y + theta) - lgamma(theta) for integer-valued y.
double log_rising(double y, double theta)
{
    if (y < 1e4 && y == std::floor(y)) {
        double s = 0.0;
        for (int k = 0; k < static_cast<int>(y); ++k) s += std::log(theta + k);
        return s;
    }
    return std::lgamma(y + theta) - std::lgamma(theta);
}

double loglik_at(const Series& s, MeanFamily fam, double b0, double b1, double theta)
{
    double ll = 0.0;
    for (std::size_t i = 0; i < s.y.size(); ++i) {
        const double mu = mean_value(fam, b0, b1, s.t[i]);
        if (!(mu > 0.0)) return -kInf;
        ll += nb_log_pmf(s.y[i], mu, theta);
    }
    return ll;
}

// Newton steps on beta at fixed theta using the observed information, or
// the expected information where the observed one is not positive definite.
// Step halving keeps the mean positive and the likelihood non-decreasing.
bool beta_step(const Series& s, MeanFamily fam, double& b0, double& b1, double theta, double tol)
{
    double ll = loglik_at(s, fam, b0, b1, theta);
    for (int it = 0; it < 200; ++it) {
        double g0 = 0.0, g1 = 0.0;
        std::array<double, 3> obs{}, exp_info{};  // (00, 01, 11)
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            const double t = s.t[i], y = s.y[i];
            const double mu = mean_value(fam, b0, b1, t);
            double g, h, w;  // d l / d eta, -d2 l / d eta2, expected information
            if (fam == MeanFamily::ExpMean) {
                g = std::isinf(theta) ? y - mu : theta * (y - mu) / (mu + theta);
                h = std::isinf(theta) ? mu : theta * mu * (y + theta) / ((mu + theta) * (mu + theta));
                w = std::isinf(theta) ? mu : theta * mu / (mu + theta);
            } else {
                g = std::isinf(theta) ? y / mu - 1.0 : y / mu - (y + theta) / (mu + theta);
                h = std::isinf(theta) ? y / (mu * mu) : y / (mu * mu) - (y + theta) / ((mu + theta) * (mu + theta));
                w = std::isinf(theta) ? 1.0 / mu : theta / (mu * (mu + theta));
            }
            g0 += g;
            g1 += g * t;
            for (auto [m, v] : {std::pair{&obs, h}, std::pair{&exp_info, w}}) {
                (*m)[0] += v;
                (*m)[1] += v * t;
                (*m)[2] += v * t * t;
            }
        }
        auto solve = [&](const std::array<double, 3>& m, double& d0, double& d1) {
            const double det = m[0] * m[2] - m[1] * m[1];
            if (!(det > 0.0 && m[0] > 0.0)) return false;
            d0 = (m[2] * g0 - m[1] * g1) / det;
            d1 = (m[0] * g1 - m[1] * g0) / det;
            return true;
        };
        double d0 = 0.0, d1 = 0.0;
        if (!solve(obs, d0, d1) && !solve(exp_info, d0, d1)) return false;
        const double decrement = g0 * d0 + g1 * d1;
        if (decrement < 1e-24 * (1.0 + std::fabs(ll))) return true;

        double step = 1.0;
        double nb0 = b0 + d0, nb1 = b1 + d1;
        double nll = loglik_at(s, fam, nb0, nb1, theta);
        int halvings = 0;
        while (!(nll >= ll) && halvings < 60) {
            step *= 0.5;
            nb0 = b0 + step * d0;
            nb1 = b1 + step * d1;
            nll = loglik_at(s, fam, nb0, nb1, theta);
            ++halvings;
        }
        if (halvings == 60) return std::fabs(g0) + std::fabs(g1) < 1e-6;
        const double change = std::fabs(nb0 - b0) + std::fabs(nb1 - b1);
        b0 = nb0;
        b1 = nb1;
        ll = nll;
        if (change < 1e-3 * tol * (1.0 + std::fabs(b0) + std::fabs(b1))) return true;
    }
    return true;
}

double theta_step(const Series& s, MeanFamily fam, double b0, double b1, double current, double theta_max,
                  bool& at_bound)
{
    std::vector<double> mu(s.y.size());
    for (std::size_t i = 0; i < mu.size(); ++i) mu[i] = mean_value(fam, b0, b1, s.t[i]);
    auto negll = [&](double phi) { return -nb_loglik(s.y, mu, std::exp(phi)); };
    const double lo = std::log(1e-4), hi = std::log(theta_max);
    const double phi = golden_section_min(negll, lo, hi, 1e-13, 400);
    at_bound = phi > hi - 1e-3 && negll(phi) >= -nb_loglik(s.y, mu, kInf) - 1e-9;
    if (at_bound) return kInf;
    // Keep the incumbent unless the new value is strictly better; on a flat
    // profile the search otherwise alternates between rounding-equal points.
    if (std::isfinite(current) && !(negll(phi) < negll(std::log(current)))) return current;
    return std::exp(phi);
}

FreqFit fit_impl(std::span<const double> t, std::span<const double> y, MeanFamily fam,
                 const FreqFitOptions& opts, bool poisson)
{
    if (t.size() != y.size()) throw PreconditionError("fit_nb: t and counts differ in length");
    if (y.size() < 4) throw PreconditionError("fit_nb: at least 4 bins are required");
    double total = 0.0;
    for (double v : y) {
        if (!(v >= 0.0) || v != std::floor(v)) throw PreconditionError("fit_nb: counts must be non-negative integers");
        total += v;
    }
    if (total == 0.0) throw PreconditionError("fit_nb: all counts are zero");
    if (*std::min_element(t.begin(), t.end()) == *std::max_element(t.begin(), t.end()))
        throw PreconditionError("fit_nb: time covariate is constant");

    Series s{t, y};
    const double ybar = mean(y);
    double b0 = 0.0, b1 = 0.0;
    if (fam == MeanFamily::ExpMean) {
        std::vector<double> ly(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) ly[i] = std::log(y[i] + 0.5);
        auto ls = least_squares(t, ly);
        b0 = ls.intercept;
        b1 = ls.slope;
    } else {
        auto ls = least_squares(t, y);
        b0 = ls.intercept;
        b1 = ls.slope;
        bool feasible = true;
        for (double ti : t) feasible = feasible && (b0 + b1 * ti > 0.0);
        if (!feasible) {
            b0 = ybar;
            b1 = 0.0;
        }
    }
    const double v = variance(y);
    double theta = poisson ? kInf : (v > ybar ? std::clamp(ybar * ybar / (v - ybar), 1e-2, opts.theta_max) : 1e3);

    bool at_bound = poisson;
    double ll = loglik_at(s, fam, b0, b1, theta);
    int it = 0;
    bool converged = false;
    for (; it < opts.max_iter; ++it) {
        const double pb0 = b0, pb1 = b1, ptheta = theta;
        if (!beta_step(s, fam, b0, b1, theta, opts.tol))
            throw NumericalError("fit_nb: singular information in the beta step", {b0, b1, theta});
        if (!poisson) theta = theta_step(s, fam, b0, b1, theta, opts.theta_max, at_bound);
        const double nll = loglik_at(s, fam, b0, b1, theta);
        const double dtheta = (std::isinf(theta) && std::isinf(ptheta)) ? 0.0 : std::fabs(std::log(theta / ptheta));
        const double change = std::fabs(b0 - pb0) + std::fabs(b1 - pb1) + (std::isnan(dtheta) ? 1.0 : dtheta);
        const bool small = std::fabs(nll - ll) < opts.tol * (1.0 + std::fabs(nll)) && change < 1e-8;
        ll = nll;
        if (small) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NumericalError("fit_nb: alternating maximization did not converge", {b0, b1, theta});

    FreqFit fit;
    fit.mean_family = fam;
    fit.beta0 = b0;
    fit.beta1 = b1;
    fit.theta = theta;
    fit.theta_at_bound = at_bound && !poisson;
    fit.logL = ll;
    fit.n_bins = y.size();
    fit.iterations = it + 1;
    fit.t.assign(t.begin(), t.end());
    fit.counts.assign(y.begin(), y.end());
    for (double ti : t) fit.fitted.push_back(mean_value(fam, b0, b1, ti));
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double yi = y[i], mi = fit.fitted[i];
        const double a = yi > 0.0 ? yi * std::log(yi / mi) : 0.0;
        const double b = std::isinf(theta) ? (yi - mi) : (yi + theta) * std::log1p((yi - mi) / (mi + theta));
        fit.deviance += 2.0 * (a - b);
    }

    // Observed information by central differences of the log-likelihood.
    if (std::isinf(theta)) {
        Objective f = [&](const std::vector<double>& p) { return loglik_at(s, fam, p[0], p[1], kInf); };
        auto H = numeric_hessian(f, {b0, b1}, 1e-5);
        auto cov = invert_symmetric({{-H[0][0], -H[0][1]}, {-H[1][0], -H[1][1]}});
        fit.se = {std::sqrt(cov[0][0]), std::sqrt(cov[1][1]), kInf};
        fit.cov = {{{cov[0][0], cov[0][1]}, {cov[1][0], cov[1][1]}}};
    } else {
        Objective f = [&](const std::vector<double>& p) { return loglik_at(s, fam, p[0], p[1], p[2]); };
        auto H = numeric_hessian(f, {b0, b1, theta}, 1e-5);
        std::vector<std::vector<double>> info(3, std::vector<double>(3));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) info[i][j] = -H[i][j];
        auto cov = invert_symmetric(info);
        fit.se = {std::sqrt(std::max(cov[0][0], 0.0)), std::sqrt(std::max(cov[1][1], 0.0)),
                  std::sqrt(std::max(cov[2][2], 0.0))};
        fit.cov = {{{cov[0][0], cov[0][1]}, {cov[1][0], cov[1][1]}}};
    }
    return fit;
}

} // namespace

std::string_view to_string(MeanFamily f) { return f == MeanFamily::ExpMean ? "exp_mean" : "lin_mean"; }

double FreqFit::mean_at(double time) const { return mean_value(mean_family, beta0, beta1, time); }

double nb_log_pmf(double y, double mu, double theta)
{
    if (std::isinf(theta)) return y * std::log(mu) - mu - std::lgamma(y + 1.0);
    return log_rising(y, theta) - std::lgamma(y + 1.0) - theta * std::log1p(mu / theta) +
           (y > 0.0 ? y * std::log(mu / (mu + theta)) : 0.0);
}

double nb_loglik(std::span<const double> y, std::span<const double> mu, double theta)
{
    double ll = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) ll += nb_log_pmf(y[i], mu[i], theta);
    return ll;
}

FreqFit fit_nb(std::span<const double> t, std::span<const double> y, MeanFamily family, const FreqFitOptions& opts)
{
    return fit_impl(t, y, family, opts, false);
}

FreqFit fit_poisson(std::span<const double> t, std::span<const double> y, MeanFamily family,
                    const FreqFitOptions& opts)
{
    return fit_impl(t, y, family, opts, true);
}

FreqFit fit_nb(const BinnedCounts& counts, MeanFamily family, const FreqFitOptions& opts)
{
    const BinnedCounts used = opts.include_partial ? counts : counts.full_bins_only();
    std::vector<double> y(used.counts.begin(), used.counts.end());
    return fit_nb(used.t_mid, y, family, opts);
}

OverdispersionTest overdispersion_test(const FreqFit& fit)
{
    OverdispersionTest out;
    out.theta = fit.theta;
    out.logL_nb = fit.logL;
    auto pois = fit_poisson(fit.t, fit.counts, fit.mean_family);
    out.logL_poisson = pois.logL;
    out.statistic = std::max(0.0, 2.0 * (fit.logL - pois.logL));
    out.p_value_chi2 = chi2_sf(out.statistic, 1.0);
    out.p_value = out.statistic > 0.0 ? 0.5 * out.p_value_chi2 : 1.0;
    return out;
}

GofTest deviance_gof(const FreqFit& fit)
{
    GofTest g;
    g.deviance = fit.deviance;
    g.df = static_cast<int>(fit.n_bins) - 3;
    if (g.df < 1) throw PreconditionError("deviance_gof: need more than 3 bins");
    g.p_value = chi2_sf(std::max(fit.deviance, 0.0), g.df);
    return g;
}

ZTest growth_z_test(const FreqFit& a, const FreqFit& b)
{
    if (a.mean_family != MeanFamily::ExpMean || b.mean_family != MeanFamily::ExpMean)
        throw PreconditionError("growth_z_test: both fits must use the exponential mean");
    const double se = std::sqrt(a.se.beta1 * a.se.beta1 + b.se.beta1 * b.se.beta1);
    if (!(se > 0.0) || !std::isfinite(se)) throw PreconditionError("growth_z_test: combined standard error is zero");
    ZTest out;
    out.z = (a.beta1 - b.beta1) / se;
    out.p_value = normal_sf(out.z);
    return out;
}

double slope_wald_p(const FreqFit& fit)
{
    if (!(fit.se.beta1 > 0.0)) return fit.beta1 == 0.0 ? 1.0 : 0.0;
    return 2.0 * normal_sf(std::fabs(fit.beta1 / fit.se.beta1));
}

std::uint64_t nb_quantile(double mu, double theta, double p)
{
    if (!(p > 0.0 && p < 1.0)) throw PreconditionError("nb_quantile: p must lie in (0, 1)");
    if (!(mu > 0.0)) return 0;
    double cdf = 0.0;
    for (std::uint64_t k = 0;; ++k) {
        cdf += std::exp(nb_log_pmf(static_cast<double>(k), mu, theta));
        if (cdf >= p - 1e-12) return k;
        if (k > 100000000ULL) throw NumericalError("nb_quantile: CDF summation did not reach p");
    }
}

Quartiles nb_quartiles(const FreqFit& fit, double time)
{
    const double mu = predict_mean(fit, time);
    return {nb_quantile(mu, fit.theta, 0.25), nb_quantile(mu, fit.theta, 0.5), nb_quantile(mu, fit.theta, 0.75)};
}

double predict_mean(const FreqFit& fit, double time)
{
    const double mu = fit.mean_at(time);
    if (!(mu > 0.0)) throw PreconditionError("predict_mean: linear mean is not positive at t = " + std::to_string(time));
    return mu;
}

} // namespace breachcat
