#pragma once

#include "breachcat/aggregate.hpp"
#include "breachcat/cost.hpp"
#include "breachcat/delay.hpp"
#include "breachcat/events.hpp"
#include "breachcat/freq.hpp"
#include "breachcat/tail.hpp"
#include "breachcat/trend.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace breachcat::report {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.3.0";

// Non-finite values become the strings "inf", "-inf", "nan".
json num(double v);
// Rounds to `digits` significant figures and prints without trailing noise.
std::string sig(double v, int digits);
std::string fmt(double v);  // shortest round-trip representation

json meta(const EventFilter* filter = nullptr);
json to_json(const EventFilter& f);
json to_json(const RowWarning& w);
json to_json(const TailModel& m);
json to_json(const TailFit& f);
json to_json(const LrTest& t);
json to_json(const FreqFit& f);
json to_json(const OverdispersionTest& t);
json to_json(const GofTest& t);
json to_json(const ZTest& t);
json to_json(const QuantFit& f);
json to_json(const SlopeTest& t);
json to_json(const DelayQuantiles& q);
json to_json(const CompletenessFactor& c);
json to_json(const SizeDelaySlope& s);
json to_json(const DrawSummary& d);
json to_json(const AggregateSummary& s);
json to_json(const ForecastConfig& c);
json to_json(const AggregateResult& r);
json to_json(const RealizedCheck& r);
json to_json(const CostModel& m);
json to_json(const HistoricalCost& h);
json to_json(const SectorQuantileTable& t);
json to_json(const SectorTypeTotals& t);
json to_json(const Histogram& h);
json to_json(const RollingAlpha& r);

struct FreqRow {
    double u = 0.0;
    std::size_t n_events = 0;
    FreqFit fit;
    OverdispersionTest overdispersion;
    GofTest gof;
};

struct TailRow {
    double u = 0.0;
    std::size_t n = 0;
    std::optional<TailFit> pareto;
    std::optional<TailFit> trunc_pareto;
    std::optional<TailFit> trunc_lognormal;
};

// Threshold table of NB regressions: u, n, beta0(se), beta1(se) with Wald p,
// theta(se) with the over-dispersion p, and the deviance p.
std::string freq_table_csv(const std::vector<FreqRow>& rows);
// Threshold table of tail fits; log-likelihoods on the log-size scale.
std::string tail_table_csv(const std::vector<TailRow>& rows);
// Uncertainty-quartile grid, billions, two significant figures.
std::string forecast_csv(const AggregateSummary& s);
std::string forecast_ratio_csv(const std::array<DrawSummary, 3>& ratios);

} // namespace breachcat::report
