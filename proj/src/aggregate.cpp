#include "breachcat/aggregate.hpp"

#include "breachcat/errors.hpp"
#include "breachcat/parallel.hpp"
#include "breachcat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace breachcat {

namespace {

constexpr std::uint64_t kOuterStream = 0x61676772ULL;
constexpr int kMaxAttemptsPerReplicate = 100;

std::vector<double> cumulative(const std::vector<double>& probs)
{
    std::vector<double> cdf(probs.size());
    double s = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i] >= 0.0)) throw PreconditionError("probabilities must be non-negative");
        s += probs[i];
        cdf[i] = s;
    }
    if (std::fabs(s - 1.0) > 1e-9) throw PreconditionError("probabilities must sum to 1");
    cdf.back() = 1.0;
    return cdf;
}

std::size_t pick(const std::vector<double>& cdf, double v)
{
    auto it = std::upper_bound(cdf.begin(), cdf.end(), v);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

DrawSummary scale(const DrawSummary& d, double s)
{
    return {d.mean * s, d.sd * s, d.q50 * s, d.q90 * s, d.q95 * s, d.q99 * s};
}

std::array<DrawSummary, 3> quartile_rows(const std::vector<DrawSummary>& draws)
{
    std::array<DrawSummary, 3> rows{};
    auto column = [&](double DrawSummary::*field) {
        std::vector<double> v;
        v.reserve(draws.size());
        for (const auto& d : draws) v.push_back(d.*field);
        return quantiles_type1(std::move(v), kUncertaintyQuartiles);
    };
    for (auto field : {&DrawSummary::mean, &DrawSummary::sd, &DrawSummary::q50, &DrawSummary::q90,
                       &DrawSummary::q95, &DrawSummary::q99}) {
        auto q = column(field);
        for (std::size_t r = 0; r < 3; ++r) rows[r].*field = q[r];
    }
    return rows;
}

struct FreqDraw {
    double beta0, beta1, theta;
};

// Expected Fisher information for alpha of a truncated Pareto sample of size n.
double trunc_pareto_alpha_se(const TailModel& m, std::size_t n)
{
    const double a = m.alpha;
    double info = 1.0 / (a * a);
    if (m.family == TailFamily::TruncPareto) {
        const double L = std::log(*m.m / m.u);
        const double em = std::expm1(a * L);
        info -= L * L * (em + 1.0) / (em * em);
    }
    return 1.0 / std::sqrt(static_cast<double>(n) * info);
}

} // namespace

CountDistribution CountDistribution::neg_binomial(double mu, double theta)
{
    if (!(mu >= 0.0) || !(theta > 0.0)) throw PreconditionError("count distribution: need mu >= 0, theta > 0");
    CountDistribution c;
    c.dist_ = NegBin{mu, theta};
    return c;
}

CountDistribution CountDistribution::fixed(std::uint64_t n)
{
    CountDistribution c;
    c.dist_ = Fixed{n};
    return c;
}

CountDistribution CountDistribution::discrete(std::vector<double> probs)
{
    if (probs.empty()) throw PreconditionError("count distribution: empty probability vector");
    CountDistribution c;
    c.dist_ = Discrete{cumulative(probs)};
    return c;
}

std::uint64_t CountDistribution::sample(Rng& rng) const
{
    return std::visit(
        [&](const auto& d) -> std::uint64_t {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, NegBin>) return rng.neg_binomial(d.mu, d.theta);
            else if constexpr (std::is_same_v<T, Fixed>) return d.n;
            else return pick(d.cdf, rng.uniform());
        },
        dist_);
}

double CountDistribution::mean() const
{
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, NegBin>) return d.mu;
            else if constexpr (std::is_same_v<T, Fixed>) return static_cast<double>(d.n);
            else {
                double m = 0.0, prev = 0.0;
                for (std::size_t k = 0; k < d.cdf.size(); ++k) {
                    m += static_cast<double>(k) * (d.cdf[k] - prev);
                    prev = d.cdf[k];
                }
                return m;
            }
        },
        dist_);
}

SeverityDistribution SeverityDistribution::from_model(const TailModel& model)
{
    return SeverityDistribution(SeveritySampler(model));
}

SeverityDistribution SeverityDistribution::fixed(double value) { return SeverityDistribution(Fixed{value}); }

SeverityDistribution SeverityDistribution::discrete(std::vector<double> values, std::vector<double> probs)
{
    if (values.size() != probs.size() || values.empty())
        throw PreconditionError("severity distribution: values and probabilities differ in length");
    return SeverityDistribution(Discrete{std::move(values), cumulative(probs)});
}

double SeverityDistribution::sample(Rng& rng) const
{
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, SeveritySampler>) return d(rng);
            else if constexpr (std::is_same_v<T, Fixed>) return d.value;
            else return d.values[pick(d.cdf, rng.uniform())];
        },
        dist_);
}

DrawSummary simulate_compound(const CountDistribution& count, const SeverityDistribution& severity,
                              std::size_t n_inner, Rng& rng)
{
    if (n_inner < 1) throw PreconditionError("simulate_compound: n_inner must be >= 1");
    std::vector<double> totals(n_inner);
    for (auto& total : totals) {
        const auto n = count.sample(rng);
        double s = 0.0;
        for (std::uint64_t j = 0; j < n; ++j) s += severity.sample(rng);
        total = s;
    }
    DrawSummary d;
    d.mean = mean(totals);
    d.sd = std::sqrt(variance(totals));
    std::sort(totals.begin(), totals.end());
    d.q50 = quantile_type1(totals, 0.5);
    d.q90 = quantile_type1(totals, 0.9);
    d.q95 = quantile_type1(totals, 0.95);
    d.q99 = quantile_type1(totals, 0.99);
    return d;
}

std::string_view to_string(ParameterBootstrap b)
{
    return b == ParameterBootstrap::SimulateRefit ? "simulate_refit" : "asymptotic";
}

void ForecastConfig::validate() const
{
    if (!(t_start < t_end)) throw PreconditionError("forecast: horizon must satisfy t_start < t_end");
    severity.validate();
    if (freq_models.empty()) throw PreconditionError("forecast: at least one frequency model is required");
    double w = 0.0;
    for (const auto& m : freq_models) {
        if (!(m.weight >= 0.0)) throw PreconditionError("forecast: model weights must be non-negative");
        w += m.weight;
    }
    if (std::fabs(w - 1.0) > 1e-9) throw PreconditionError("forecast: model weights must sum to 1");
    if (n_inner < 1000) throw PreconditionError("forecast: n_inner must be >= 1000");
    if (n_outer < 100) throw PreconditionError("forecast: n_outer must be >= 100");
    if (horizon_bin_times(t_start, t_end).empty())
        throw PreconditionError("forecast: horizon contains no half-year bin midpoint");
}

std::vector<double> horizon_bin_times(double t_start, double t_end)
{
    std::vector<double> out;
    const auto k0 = static_cast<long>(std::ceil((t_start - 0.25) / 0.5 - 1e-9));
    for (long k = k0;; ++k) {
        const double t = 0.25 + 0.5 * static_cast<double>(k);
        if (t >= t_end - 1e-12) break;
        out.push_back(t);
    }
    return out;
}

double horizon_mean(const FreqFit& fit, double t_start, double t_end)
{
    double s = 0.0;
    for (double t : horizon_bin_times(t_start, t_end)) s += predict_mean(fit, t);
    return s;
}

AggregateResult simulate_aggregate(const ForecastConfig& cfg)
{
    cfg.validate();
    AggregateResult result;
    if (cfg.severity.family != TailFamily::TruncPareto)
        result.warnings.push_back("severity family has no finite upper bound; totals may be dominated by single draws");
    if (cfg.bootstrap == ParameterBootstrap::Asymptotic)
        result.warnings.push_back("asymptotic-normal parameter draws (fast mode), not simulate-and-refit");

    std::vector<double> weights;
    for (const auto& m : cfg.freq_models) weights.push_back(m.weight);
    const auto model_cdf = cumulative(weights);

    result.draws.resize(cfg.n_outer);
    result.params.resize(cfg.n_outer);
    std::vector<std::size_t> failures(cfg.n_outer, 0);

    auto draw_freq = [&](const FreqFit& fit, Rng& rng) -> FreqDraw {
        if (cfg.bootstrap == ParameterBootstrap::Asymptotic) {
            const double s00 = fit.cov[0][0], s01 = fit.cov[0][1], s11 = fit.cov[1][1];
            const double l00 = std::sqrt(std::max(s00, 0.0));
            const double l10 = l00 > 0.0 ? s01 / l00 : 0.0;
            const double l11 = std::sqrt(std::max(s11 - l10 * l10, 0.0));
            const double z0 = rng.normal(), z1 = rng.normal(), z2 = rng.normal();
            const double theta = std::isfinite(fit.theta) ? fit.theta + fit.se.theta * z2 : fit.theta;
            if (!(theta > 0.0)) throw NumericalError("non-positive theta draw");
            return {fit.beta0 + l00 * z0, fit.beta1 + l10 * z0 + l11 * z1, theta};
        }
        std::vector<double> y(fit.t.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] = static_cast<double>(rng.neg_binomial(fit.mean_at(fit.t[i]), fit.theta));
        auto refit = fit_nb(fit.t, y, fit.mean_family);
        return {refit.beta0, refit.beta1, refit.theta};
    };

    auto draw_severity = [&](Rng& rng) -> TailModel {
        const TailModel& m = cfg.severity;
        if (cfg.severity_n == 0) return m;
        if (cfg.bootstrap == ParameterBootstrap::Asymptotic && m.family != TailFamily::TruncLognormal) {
            TailModel out = m;
            out.alpha = m.alpha + trunc_pareto_alpha_se(m, cfg.severity_n) * rng.normal();
            if (!(out.alpha > 0.0)) throw NumericalError("non-positive alpha draw");
            return out;
        }
        SeveritySampler sampler(m);
        std::vector<double> xs(cfg.severity_n);
        for (auto& x : xs) x = sampler(rng);
        switch (m.family) {
        case TailFamily::Pareto: return fit_pareto(xs, m.u).model;
        case TailFamily::TruncPareto: return fit_truncated_pareto(xs, m.u, *m.m).model;
        case TailFamily::TruncLognormal: return fit_truncated_lognormal(xs, m.u).model;
        }
        return m;
    };

    parallel_for(cfg.n_outer, cfg.threads, [&](std::size_t b) {
        Rng rng(derive_seed(cfg.seed, kOuterStream, b));
        for (int attempt = 0;; ++attempt) {
            if (attempt >= kMaxAttemptsPerReplicate)
                throw NumericalError("forecast: replicate " + std::to_string(b) + " failed repeatedly");
            try {
                const std::size_t mi = pick(model_cdf, rng.uniform());
                const FreqFit& base = cfg.freq_models[mi].fit;
                const FreqDraw fd = draw_freq(base, rng);
                FreqFit drawn = base;
                drawn.beta0 = fd.beta0;
                drawn.beta1 = fd.beta1;
                drawn.theta = fd.theta;
                const double mu_h = horizon_mean(drawn, cfg.t_start, cfg.t_end);
                const TailModel sev = draw_severity(rng);

                ReplicateParams p;
                p.model_index = mi;
                p.beta0 = fd.beta0;
                p.beta1 = fd.beta1;
                p.theta = fd.theta;
                p.severity_param = sev.family == TailFamily::TruncLognormal ? sev.mu : sev.alpha;
                p.horizon_mean = mu_h;
                result.params[b] = p;
                result.draws[b] = simulate_compound(CountDistribution::neg_binomial(mu_h, fd.theta),
                                                    SeverityDistribution::from_model(sev), cfg.n_inner, rng);
                return;
            } catch (const NumericalError&) {
                ++failures[b];
            } catch (const PreconditionError&) {
                ++failures[b];
            }
        }
    });

    result.failed_replicates = std::accumulate(failures.begin(), failures.end(), std::size_t{0});
    if (static_cast<double>(result.failed_replicates) > 0.1 * static_cast<double>(cfg.n_outer))
        throw NumericalError("forecast: more than 10% of bootstrap replicates failed to refit",
                             {static_cast<double>(result.failed_replicates)});
    if (result.failed_replicates > 0)
        result.warnings.push_back(std::to_string(result.failed_replicates) + " bootstrap refits failed and were redrawn");

    auto rows = quartile_rows(result.draws);
    for (std::size_t r = 0; r < 3; ++r) result.summary.rows[r] = scale(rows[r], 1e-9);
    return result;
}

ForecastComparison forecast_table(const ForecastConfig& cfg_now, const ForecastConfig& cfg_past)
{
    ForecastComparison cmp{simulate_aggregate(cfg_now), simulate_aggregate(cfg_past), {}};
    auto ratio = [](double a, double b) { return b != 0.0 ? a / b : std::numeric_limits<double>::quiet_NaN(); };
    for (std::size_t r = 0; r < 3; ++r) {
        const auto& a = cmp.now.summary.rows[r];
        const auto& b = cmp.past.summary.rows[r];
        cmp.ratios[r] = {ratio(a.mean, b.mean), ratio(a.sd, b.sd), ratio(a.q50, b.q50),
                         ratio(a.q90, b.q90), ratio(a.q95, b.q95), ratio(a.q99, b.q99)};
    }
    return cmp;
}

RealizedCheck realized_check(std::span<const EventRecord> events, DateRange period, std::uint64_t u, TypeSet types,
                             const DelayDistribution* delays, std::optional<Date> observed_at)
{
    EventFilter f;
    f.min_ids = u;
    f.types = types;
    f.date_range = period;
    RealizedCheck out;
    out.period = period;
    for (const auto& e : filter_events(events, f)) {
        ++out.n_events;
        out.realized_total += static_cast<double>(e.ids);
    }
    if (delays) {
        const Date at = observed_at.value_or(period.end);
        auto cf = completeness_factor(*delays, period, at);
        out.factor = cf.factor;
        out.expected_eventual_count = static_cast<double>(out.n_events) * cf.factor;
        out.projected_total = out.realized_total * cf.factor;
        out.warnings = cf.warnings;
    }
    return out;
}

} // namespace breachcat
