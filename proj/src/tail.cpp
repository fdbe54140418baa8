#include "breachcat/tail.hpp"

#include "breachcat/csv.hpp"
#include "breachcat/errors.hpp"
#include "breachcat/optimize.hpp"
#include "breachcat/stats.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace breachcat {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

void check_sample(std::span<const double> xs, double u, std::size_t min_n, const char* who)
{
    if (!(u > 0.0)) throw PreconditionError(std::string(who) + ": threshold u must be > 0");
    if (xs.size() < min_n)
        throw PreconditionError(std::string(who) + ": need at least " + std::to_string(min_n) + " observations");
    for (double x : xs)
        if (!(x >= u)) throw PreconditionError(std::string(who) + ": observation below threshold u");
}

double sum_log(std::span<const double> xs)
{
    double s = 0.0;
    for (double x : xs) s += std::log(x);
    return s;
}

// ln(1 - e^{a}) for a < 0.
double log1m_exp(double a) { return a > -0.693 ? std::log(-std::expm1(a)) : std::log1p(-std::exp(a)); }

} // namespace

std::string_view to_string(TailFamily f)
{
    switch (f) {
    case TailFamily::Pareto: return "pareto";
    case TailFamily::TruncPareto: return "trunc_pareto";
    case TailFamily::TruncLognormal: return "trunc_lognormal";
    }
    return "unknown";
}

std::optional<TailFamily> tail_family_from_string(std::string_view s)
{
    const auto l = csv::lower(s);
    if (l == "pareto") return TailFamily::Pareto;
    if (l == "trunc_pareto" || l == "truncpareto") return TailFamily::TruncPareto;
    if (l == "trunc_lognormal" || l == "trunclognormal" || l == "lognormal") return TailFamily::TruncLognormal;
    return std::nullopt;
}

TailModel TailModel::pareto(double alpha, double u)
{
    TailModel m;
    m.family = TailFamily::Pareto;
    m.alpha = alpha;
    m.u = u;
    m.validate();
    return m;
}

TailModel TailModel::trunc_pareto(double alpha, double u, double upper)
{
    TailModel m;
    m.family = TailFamily::TruncPareto;
    m.alpha = alpha;
    m.u = u;
    m.m = upper;
    m.validate();
    return m;
}

TailModel TailModel::trunc_lognormal(double mu, double sigma2, double u)
{
    TailModel m;
    m.family = TailFamily::TruncLognormal;
    m.mu = mu;
    m.sigma2 = sigma2;
    m.u = u;
    m.validate();
    return m;
}

void TailModel::validate() const
{
    if (!(u > 0.0)) throw PreconditionError("tail model: u must be > 0");
    switch (family) {
    case TailFamily::TruncPareto:
        if (!m || !(*m > u)) throw PreconditionError("tail model: truncation m must exceed u");
        [[fallthrough]];
    case TailFamily::Pareto:
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw PreconditionError("tail model: alpha must be > 0");
        break;
    case TailFamily::TruncLognormal:
        if (!(sigma2 > 0.0) || !std::isfinite(mu)) throw PreconditionError("tail model: sigma2 must be > 0");
        break;
    }
}

double TailModel::cdf(double x) const
{
    if (x <= u) return 0.0;
    switch (family) {
    case TailFamily::Pareto:
        return -std::expm1(-alpha * std::log(x / u));
    case TailFamily::TruncPareto: {
        if (x >= *m) return 1.0;
        return std::expm1(-alpha * std::log(x / u)) / std::expm1(-alpha * std::log(*m / u));
    }
    case TailFamily::TruncLognormal: {
        const double s = std::sqrt(sigma2);
        const double lz = log_normal_sf((std::log(x) - mu) / s) - log_normal_sf((std::log(u) - mu) / s);
        return -std::expm1(lz);
    }
    }
    return 0.0;
}

double TailModel::quantile(double v) const
{
    if (!(v >= 0.0 && v <= 1.0)) throw PreconditionError("tail quantile level must lie in [0, 1]");
    return SeveritySampler(*this).draw(v);
}

double TailModel::mean() const
{
    switch (family) {
    case TailFamily::Pareto:
        return alpha > 1.0 ? u * alpha / (alpha - 1.0) : std::numeric_limits<double>::infinity();
    case TailFamily::TruncPareto: {
        const double L = std::log(*m / u);
        const double denom = -std::expm1(-alpha * L);  // 1 - (u/m)^alpha
        if (std::fabs(alpha - 1.0) < 1e-12) return u * L / denom;
        // u * alpha/(alpha-1) * (1 - (m/u)^(1-alpha)) / (1 - (u/m)^alpha)
        return u * alpha / (alpha - 1.0) * (-std::expm1((1.0 - alpha) * L)) / denom;
    }
    case TailFamily::TruncLognormal: {
        const double s = std::sqrt(sigma2);
        const double c = std::log(u);
        return std::exp(mu + 0.5 * sigma2 + log_normal_sf((c - mu - sigma2) / s) - log_normal_sf((c - mu) / s));
    }
    }
    return 0.0;
}

SeveritySampler::SeveritySampler(const TailModel& model) : model_(model)
{
    model_.validate();
    switch (model_.family) {
    case TailFamily::Pareto:
        inv_a_ = 1.0 / model_.alpha;
        break;
    case TailFamily::TruncPareto:
        inv_a_ = 1.0 / model_.alpha;
        c_ = -std::expm1(-model_.alpha * std::log(*model_.m / model_.u));
        break;
    case TailFamily::TruncLognormal:
        sigma_ = std::sqrt(model_.sigma2);
        su_ = normal_sf((std::log(model_.u) - model_.mu) / sigma_);
        break;
    }
}

double SeveritySampler::draw(double v) const
{
    switch (model_.family) {
    case TailFamily::Pareto:
        if (v >= 1.0) return std::numeric_limits<double>::infinity();
        return model_.u * std::pow(1.0 - v, -inv_a_);
    case TailFamily::TruncPareto:
        if (v >= 1.0) return *model_.m;
        return std::min(model_.u * std::pow(1.0 - v * c_, -inv_a_), *model_.m);
    case TailFamily::TruncLognormal: {
        if (v <= 0.0) return model_.u;
        if (v >= 1.0) return std::numeric_limits<double>::infinity();
        const double s = (1.0 - v) * su_;
        const double z = boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>{}, s));
        return std::max(model_.u, std::exp(model_.mu + sigma_ * z));
    }
    }
    return model_.u;
}

std::vector<double> sample_severity(const TailModel& model, std::size_t n, std::uint64_t seed)
{
    if (n < 1) throw PreconditionError("sample_severity: n must be >= 1");
    SeveritySampler sampler(model);
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = sampler(rng);
    return out;
}

TailFit fit_pareto(std::span<const double> xs, double u)
{
    check_sample(xs, u, 2, "fit_pareto");
    const auto n = static_cast<double>(xs.size());
    const double S = sum_log(xs);
    double T = 0.0;
    for (double x : xs) T += std::log(x / u);
    if (!(T > 0.0)) throw DegenerateSampleError("fit_pareto: every observation equals u; the MLE diverges");
    const double alpha = n / T;

    TailFit fit;
    fit.model = TailModel::pareto(alpha, u);
    fit.se["alpha"] = alpha / std::sqrt(n);
    fit.n = xs.size();
    fit.logL = n * std::log(alpha) + n * alpha * std::log(u) - (alpha + 1.0) * S;
    fit.logL_log_scale = fit.logL + S;
    return fit;
}

TailFit fit_truncated_pareto(std::span<const double> xs, double u, double m, const TruncParetoOptions& opts)
{
    check_sample(xs, u, 2, "fit_truncated_pareto");
    if (!(m > u)) throw PreconditionError("fit_truncated_pareto: m must exceed u");
    for (double x : xs)
        if (x > m) throw PreconditionError("fit_truncated_pareto: observation above truncation m");

    const auto n = static_cast<double>(xs.size());
    const double S = sum_log(xs);
    double T = 0.0;
    for (double x : xs) T += std::log(x / u);
    const double L = std::log(m / u);
    if (!(T > 0.0)) throw DegenerateSampleError("fit_truncated_pareto: every observation equals u");
    // As alpha -> 0 the score tends to n (L/2 - T/n); a non-positive limit
    // means the likelihood increases towards alpha = 0.
    if (!(T / n < 0.5 * L))
        throw NumericalError("fit_truncated_pareto: no interior maximum (sample too flat for truncation m)",
                             {0.0});

    // Log-likelihood of the log-sizes as a function of beta = ln(alpha).
    auto loglik = [&](double beta) {
        const double a = std::exp(beta);
        return n * beta - a * T - n * log1m_exp(-a * L);
    };
    auto score_alpha = [&](double a) {  // d/d alpha
        return n / a - T - n * L / std::expm1(a * L);
    };
    auto dscore_alpha = [&](double a) {
        const double em = std::expm1(a * L);
        const double w = em + 1.0;
        return -n / (a * a) + n * L * L * w / (em * em);
    };

    double beta = std::log(n / T);
    double ll = loglik(beta);
    bool converged = false;
    for (int it = 0; it < opts.max_iter; ++it) {
        const double a = std::exp(beta);
        const double g = a * score_alpha(a);
        const double h = g + a * a * dscore_alpha(a);  // d2/d beta2 = a S + a^2 S'
        if (std::fabs(g) <= opts.tol * n) {
            converged = true;
            break;
        }
        if (!(h < 0.0)) break;
        double step = -g / h;
        step = std::clamp(step, -2.0, 2.0);
        double next = beta + step;
        double ll_next = loglik(next);
        int halvings = 0;
        while (!(ll_next >= ll - 1e-14 * std::fabs(ll)) && halvings < 60) {
            step *= 0.5;
            next = beta + step;
            ll_next = loglik(next);
            ++halvings;
        }
        if (halvings == 60) break;
        beta = next;
        ll = ll_next;
        if (std::fabs(step) < 1e-15) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        // Bracket the maximum on a wide ln(alpha) interval and polish.
        beta = golden_section_min([&](double b) { return -loglik(b); }, std::log(1e-8), std::log(1e3), 1e-15);
        const double a = std::exp(beta);
        if (!(std::fabs(a * score_alpha(a)) <= 1e-6 * n))
            throw NumericalError("fit_truncated_pareto: did not converge", {a});
        ll = loglik(beta);
    }

    const double alpha = std::exp(beta);
    const double info = -dscore_alpha(alpha);
    if (!(info > 0.0)) throw NumericalError("fit_truncated_pareto: non-positive observed information", {alpha});

    TailFit fit;
    fit.model = TailModel::trunc_pareto(alpha, u, m);
    fit.se["alpha"] = 1.0 / std::sqrt(info);
    fit.n = xs.size();
    fit.logL_log_scale = ll;
    fit.logL = ll - S;
    return fit;
}

TailFit fit_truncated_lognormal(std::span<const double> xs, double u)
{
    check_sample(xs, u, 3, "fit_truncated_lognormal");
    const auto n = static_cast<double>(xs.size());
    double sy = 0.0, syy = 0.0;
    const double lo = *std::min_element(xs.begin(), xs.end());
    const double hi = *std::max_element(xs.begin(), xs.end());
    if (lo == hi) throw DegenerateSampleError("fit_truncated_lognormal: all observations are equal");
    for (double x : xs) {
        const double y = std::log(x);
        sy += y;
        syy += y * y;
    }
    const double c = std::log(u);
    const double ybar = sy / n;
    const double var0 = std::max(syy / n - ybar * ybar, 1e-12);

    // Log-likelihood of the log-sizes in (mu, sigma).
    auto loglik = [&](double mu, double sigma) {
        if (!(sigma > 0.0)) return -std::numeric_limits<double>::infinity();
        const double ss = syy - 2.0 * mu * sy + n * mu * mu;
        return -0.5 * n * kLogTwoPi - 0.5 * ss / (sigma * sigma) - n * std::log(sigma) -
               n * log_normal_sf((c - mu) / sigma);
    };
    Objective nll = [&](const std::vector<double>& p) { return -loglik(p[0], std::exp(p[1])); };

    NelderMeadOptions nm;
    nm.initial_step = 0.5;
    nm.max_evaluations = 40000;
    nm.max_restarts = 30;
    auto res = nelder_mead(nll, {ybar, 0.5 * std::log(var0)}, nm);
    const double mu = res.x[0];
    const double sigma = std::exp(res.x[1]);
    if (!res.converged || !std::isfinite(res.value))
        throw NumericalError("fit_truncated_lognormal: optimizer did not converge", {mu, sigma * sigma});
    if (std::fabs(mu) > 1e3 || sigma > 1e3)
        throw NumericalError("fit_truncated_lognormal: likelihood is flat, no interior maximum", {mu, sigma * sigma});

    Objective ll2 = [&](const std::vector<double>& p) { return loglik(p[0], p[1]); };
    auto H = numeric_hessian(ll2, {mu, sigma}, 1e-5);
    std::vector<std::vector<double>> info{{-H[0][0], -H[0][1]}, {-H[1][0], -H[1][1]}};
    auto cov = invert_symmetric(info);
    if (!(cov[0][0] > 0.0 && cov[1][1] > 0.0))
        throw NumericalError("fit_truncated_lognormal: observed information is not positive definite", {mu, sigma * sigma});

    const double S = sy;
    TailFit fit;
    fit.model = TailModel::trunc_lognormal(mu, sigma * sigma, u);
    fit.se["mu"] = std::sqrt(cov[0][0]);
    fit.se["sigma2"] = 2.0 * sigma * std::sqrt(cov[1][1]);
    fit.n = xs.size();
    fit.logL_log_scale = -res.value;
    fit.logL = fit.logL_log_scale - S;
    return fit;
}

LrTest lr_test(const TailFit& fit_null, const TailFit& fit_alt, int df)
{
    if (fit_null.n != fit_alt.n) throw PreconditionError("lr_test: fits are on samples of different size");
    if (df < 1) throw PreconditionError("lr_test: df must be >= 1");
    if (fit_alt.logL < fit_null.logL - 1e-6)
        throw PreconditionError("lr_test: alternative log-likelihood below the nested null");
    LrTest t;
    t.df = df;
    t.statistic = std::max(0.0, 2.0 * (fit_alt.logL - fit_null.logL));
    t.p_value = chi2_sf(t.statistic, df);
    return t;
}

RollingAlpha rolling_alpha(std::span<const DatedSeverity> events, double u, std::size_t window)
{
    if (window < 10) throw PreconditionError("rolling_alpha: window must be >= 10");
    std::vector<DatedSeverity> kept;
    for (const auto& e : events)
        if (e.ids >= u) kept.push_back(e);
    for (std::size_t i = 1; i < kept.size(); ++i)
        if (kept[i].date < kept[i - 1].date) throw PreconditionError("rolling_alpha: events must be date-sorted");

    RollingAlpha out;
    if (kept.size() < window) {
        out.warnings.push_back("fewer events (" + std::to_string(kept.size()) + ") than the window (" +
                               std::to_string(window) + ")");
        return out;
    }
    std::vector<double> xs(window);
    for (std::size_t end = window; end <= kept.size(); ++end) {
        for (std::size_t k = 0; k < window; ++k) xs[k] = kept[end - window + k].ids;
        try {
            auto fit = fit_pareto(xs, u);
            out.points.push_back({kept[end - 1].date, fit.model.alpha, fit.se.at("alpha")});
        } catch (const DegenerateSampleError&) {
            out.warnings.push_back("window ending " + kept[end - 1].date.iso() + " is degenerate; skipped");
        }
    }
    return out;
}

std::vector<SurvivalPoint> survival_export(std::span<const double> xs, double u)
{
    std::vector<double> kept;
    for (double x : xs)
        if (x >= u) kept.push_back(x);
    std::sort(kept.begin(), kept.end());
    std::vector<SurvivalPoint> out;
    const auto n = static_cast<double>(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (i > 0 && kept[i] == kept[i - 1]) continue;
        out.push_back({kept[i], static_cast<double>(kept.size() - i) / n});
    }
    return out;
}

} // namespace breachcat
