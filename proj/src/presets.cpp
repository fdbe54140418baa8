#include "breachcat/presets.hpp"

#include "breachcat/errors.hpp"

#include <cmath>

namespace breachcat::presets {

Date study_start() { return Date::from_ymd(2005, 1, 1); }
Date study_end() { return Date::from_ymd(2017, 10, 1); }
Date tail_since() { return Date::from_ymd(2014, 1, 1); }
DateRange study_period() { return {study_start(), study_end()}; }

std::vector<double> historical_grid()
{
    std::vector<double> t;
    for (int k = 0; k < 25; ++k) t.push_back(0.25 + 0.5 * k);
    return t;
}

FreqFit published_fit(const PublishedFreq& p, MeanFamily family)
{
    FreqFit f;
    f.mean_family = family;
    f.beta0 = p.beta0;
    f.beta1 = p.beta1;
    f.theta = p.theta;
    f.se = {p.beta0_se, p.beta1_se, p.theta_se};
    f.cov = {{{p.beta0_se * p.beta0_se, 0.0}, {0.0, p.beta1_se * p.beta1_se}}};
    f.t = historical_grid();
    f.n_bins = f.t.size();
    for (double t : f.t) f.fitted.push_back(f.mean_at(t));
    return f;
}

FreqFit published_expmean_fit(double u)
{
    for (const auto& p : kPublishedExpMean)
        if (std::fabs(p.u - u) < 1e-9 * u) return published_fit(p, MeanFamily::ExpMean);
    throw PreconditionError("no published frequency fit for this threshold");
}

FreqFit published_linmean_fit() { return published_fit(kPublishedLinMean, MeanFamily::LinMean); }

ForecastConfig table5(std::uint64_t seed)
{
    ForecastConfig c;
    c.t_start = 13.5;  // 2018-H2
    c.t_end = 14.0;
    c.severity = TailModel::trunc_pareto(0.35, 1e4, 1e10);
    c.severity_n = kSeverityBootstrapN;
    c.freq_models = {{published_expmean_fit(1e4), 0.5}, {published_linmean_fit(), 0.5}};
    c.seed = seed;
    c.notes = {"horizon 2018-H2", "frequency: ExpMean (u=1e4) and LinMean, equal weights",
               "severity: truncated Pareto u=1e4 m=1e10 alpha=0.35, alpha bootstrap n=" +
                   std::to_string(kSeverityBootstrapN)};
    return c;
}

ForecastConfig table6(std::uint64_t seed, Table6Horizon horizon)
{
    ForecastConfig c;
    if (horizon == Table6Horizon::H2_2012) {
        c.t_start = 7.5;
        c.t_end = 8.0;
    } else {
        c.t_start = 8.0;
        c.t_end = 8.5;
    }
    c.severity = TailModel::trunc_pareto(0.4, 1e4, 1e9);
    c.severity_n = kSeverityBootstrapN;
    c.freq_models = {{published_expmean_fit(1e4), 1.0}};
    c.seed = seed;
    c.notes = {horizon == Table6Horizon::H2_2012 ? "horizon 2012-H2" : "horizon 2013-H1",
               "the table caption names 2013-H1 while the accompanying text names 2012-H2; both are available",
               "frequency: ExpMean (u=1e4)", "severity: truncated Pareto u=1e4 m=1e9 alpha=0.4, alpha bootstrap n=" +
                   std::to_string(kSeverityBootstrapN)};
    return c;
}

std::vector<std::string> names()
{
    return {"table3", "table4", "table5", "table6", "figure4", "figure5", "figure6"};
}

} // namespace breachcat::presets
