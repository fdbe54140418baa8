#pragma once

#include "breachcat/delay.hpp"
#include "breachcat/events.hpp"
#include "breachcat/freq.hpp"
#include "breachcat/rng.hpp"
#include "breachcat/tail.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace breachcat {

// Distribution of the number of events in the horizon.
class CountDistribution {
public:
    // theta = +inf gives a Poisson count.
    static CountDistribution neg_binomial(double mu, double theta);
    static CountDistribution fixed(std::uint64_t n);
    // probs[k] = P(N = k); must sum to 1.
    static CountDistribution discrete(std::vector<double> probs);

    std::uint64_t sample(Rng& rng) const;
    double mean() const;

private:
    struct NegBin { double mu; double theta; };
    struct Fixed { std::uint64_t n; };
    struct Discrete { std::vector<double> cdf; };
    std::variant<NegBin, Fixed, Discrete> dist_;
};

// Distribution of a single event's size.
class SeverityDistribution {
public:
    static SeverityDistribution from_model(const TailModel& model);
    static SeverityDistribution fixed(double value);
    static SeverityDistribution discrete(std::vector<double> values, std::vector<double> probs);

    double sample(Rng& rng) const;

private:
    struct Fixed { double value; };
    struct Discrete { std::vector<double> values; std::vector<double> cdf; };
    std::variant<SeveritySampler, Fixed, Discrete> dist_;

    explicit SeverityDistribution(std::variant<SeveritySampler, Fixed, Discrete> d) : dist_(std::move(d)) {}
};

// Summary of one set of simulated totals (raw ids).
struct DrawSummary {
    double mean = 0.0;
    double sd = 0.0;
    double q50 = 0.0;
    double q90 = 0.0;
    double q95 = 0.0;
    double q99 = 0.0;
};

inline constexpr std::array<double, 4> kTotalQuantiles{0.5, 0.9, 0.95, 0.99};
inline constexpr std::array<double, 3> kUncertaintyQuartiles{0.25, 0.5, 0.75};

// Simulates n_inner compound totals sum_{j <= N} X_j.
DrawSummary simulate_compound(const CountDistribution& count, const SeverityDistribution& severity,
                              std::size_t n_inner, Rng& rng);

struct WeightedFreqModel {
    FreqFit fit;
    double weight = 1.0;
};

enum class ParameterBootstrap {
    SimulateRefit,  // simulate from the fitted models and refit
    Asymptotic,     // fast mode: normal draws from the estimated covariance
};

std::string_view to_string(ParameterBootstrap b);

struct ForecastConfig {
    double t_start = 0.0;  // horizon [t_start, t_end) in model years
    double t_end = 0.5;
    TailModel severity;
    // Sample size used to bootstrap the severity parameters; 0 keeps them fixed.
    std::size_t severity_n = 0;
    std::vector<WeightedFreqModel> freq_models;
    std::size_t n_inner = 100000;
    std::size_t n_outer = 1000;
    std::uint64_t seed = 42;
    ParameterBootstrap bootstrap = ParameterBootstrap::SimulateRefit;
    unsigned threads = 1;
    std::vector<std::string> notes;

    void validate() const;
};

// Parameters used by one outer replicate.
struct ReplicateParams {
    std::size_t model_index = 0;
    double beta0 = 0.0;
    double beta1 = 0.0;
    double theta = 0.0;
    double severity_param = 0.0;  // alpha, or mu for the lognormal family
    double horizon_mean = 0.0;    // expected count over the horizon
};

// Rows are the 0.25 / 0.5 / 0.75 quartiles, across outer replicates, of
// each inner summary statistic. Values in billions of ids.
struct AggregateSummary {
    std::array<DrawSummary, 3> rows{};
    const DrawSummary& median_row() const { return rows[1]; }
};

struct AggregateResult {
    AggregateSummary summary;
    std::vector<DrawSummary> draws;  // per outer replicate, raw ids
    std::vector<ReplicateParams> params;
    std::size_t failed_replicates = 0;
    std::vector<std::string> warnings;
};

// Half-year bin midpoints inside [t_start, t_end).
std::vector<double> horizon_bin_times(double t_start, double t_end);
// Sum of predicted bin means over the horizon bins.
double horizon_mean(const FreqFit& fit, double t_start, double t_end);

// Outer loop over parameter draws, inner loop over compound totals. Each
// replicate owns a generator seeded from (seed, replicate index).
AggregateResult simulate_aggregate(const ForecastConfig& cfg);

struct ForecastComparison {
    AggregateResult now;
    AggregateResult past;
    std::array<DrawSummary, 3> ratios{};  // now / past, elementwise
};

ForecastComparison forecast_table(const ForecastConfig& cfg_now, const ForecastConfig& cfg_past);

struct RealizedCheck {
    DateRange period;
    std::size_t n_events = 0;
    double realized_total = 0.0;
    std::optional<double> factor;
    std::optional<double> expected_eventual_count;
    std::optional<double> projected_total;  // realized_total scaled by the factor
    std::vector<std::string> warnings;
};

RealizedCheck realized_check(std::span<const EventRecord> events, DateRange period, std::uint64_t u,
                             TypeSet types, const DelayDistribution* delays = nullptr,
                             std::optional<Date> observed_at = std::nullopt);

} // namespace breachcat
