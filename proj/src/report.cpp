#include "breachcat/report.hpp"

#include "breachcat/stats.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace breachcat::report {

json num(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string fmt(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string sig(double v, int digits)
{
    if (!std::isfinite(v) || v == 0.0) return fmt(v);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
    return fmt(std::strtod(buf, nullptr));
}

json meta(const EventFilter* filter)
{
    json m = {
        {"version", kVersion},
        {"conventions",
         {{"quantile", std::string(kQuantileConvention)},
          {"threshold", "inclusive (ids >= u)"},
          {"time_covariate", "half-year bin midpoint, years since 2005-01-01"},
          {"bins", "calendar half-years (Jan 1 / Jul 1); partial bins excluded from fits unless requested"},
          {"tail_window", "post-2014 means event_date >= 2014-01-01"},
          {"logL_log_scale", "log-likelihood of ln(ids), i.e. logL + sum ln(ids)"}}},
    };
    if (filter) m["filter"] = to_json(*filter);
    return m;
}

json to_json(const EventFilter& f)
{
    json types = json::array(), sectors = json::array();
    for (auto t : kAllTypes)
        if (f.types.contains(t)) types.push_back(std::string(to_string(t)));
    for (auto s : kAllSectors)
        if (f.sectors.contains(s)) sectors.push_back(std::string(to_string(s)));
    return {{"min_ids", f.min_ids},
            {"types", types},
            {"sectors", sectors},
            {"since", f.date_range.start.iso()},
            {"until", f.date_range.end.iso()},
            {"include_size_unknown", f.include_size_unknown}};
}

json to_json(const RowWarning& w) { return {{"line", w.line}, {"reason", w.reason}}; }

json to_json(const TailModel& m)
{
    json j = {{"family", std::string(to_string(m.family))}, {"u", num(m.u)}};
    if (m.m) j["m"] = num(*m.m);
    if (m.family == TailFamily::TruncLognormal) j["params"] = {{"mu", num(m.mu)}, {"sigma2", num(m.sigma2)}};
    else j["params"] = {{"alpha", num(m.alpha)}};
    return j;
}

json to_json(const TailFit& f)
{
    json j = to_json(f.model);
    json se = json::object();
    for (const auto& [k, v] : f.se) se[k] = num(v);
    j["se"] = se;
    j["logL"] = num(f.logL);
    j["logL_log_scale"] = num(f.logL_log_scale);
    j["n"] = f.n;
    if (f.window_end) j["window_end"] = f.window_end->iso();
    return j;
}

json to_json(const LrTest& t) { return {{"statistic", num(t.statistic)}, {"df", t.df}, {"p_value", num(t.p_value)}}; }

json to_json(const FreqFit& f)
{
    return {{"mean_family", std::string(to_string(f.mean_family))},
            {"beta0", num(f.beta0)},
            {"beta1", num(f.beta1)},
            {"theta", num(f.theta)},
            {"theta_at_bound", f.theta_at_bound},
            {"se", {{"beta0", num(f.se.beta0)}, {"beta1", num(f.se.beta1)}, {"theta", num(f.se.theta)}}},
            {"cov", {{num(f.cov[0][0]), num(f.cov[0][1])}, {num(f.cov[1][0]), num(f.cov[1][1])}}},
            {"logL", num(f.logL)},
            {"deviance", num(f.deviance)},
            {"n_bins", f.n_bins}};
}

json to_json(const OverdispersionTest& t)
{
    return {{"theta", num(t.theta)},
            {"statistic", num(t.statistic)},
            {"p_value", num(t.p_value)},
            {"p_value_chi2", num(t.p_value_chi2)},
            {"logL_nb", num(t.logL_nb)},
            {"logL_poisson", num(t.logL_poisson)}};
}

json to_json(const GofTest& t) { return {{"deviance", num(t.deviance)}, {"df", t.df}, {"p_value", num(t.p_value)}}; }

json to_json(const ZTest& t) { return {{"z", num(t.z)}, {"p_value", num(t.p_value)}}; }

json to_json(const QuantFit& f)
{
    return {{"tau", num(f.tau)}, {"a", num(f.a)}, {"b", num(f.b)}, {"loss", num(f.loss)},
            {"p_slope", num(f.p_slope)}, {"n", f.n}};
}

json to_json(const SlopeTest& t)
{
    return {{"b_hat", num(t.b_hat)}, {"p_value", num(t.p_value)}, {"replicates", t.replicates},
            {"boot_mean", num(t.boot_mean)}, {"boot_sd", num(t.boot_sd)}};
}

json to_json(const DelayQuantiles& q)
{
    json qs = json::object();
    for (std::size_t i = 0; i < q.probs.size(); ++i) qs[fmt(q.probs[i])] = num(q.quantiles[i]);
    return {{"quantiles", qs}, {"mean", num(q.mean)}, {"n", q.n}};
}

json to_json(const CompletenessFactor& c)
{
    return {{"period", {{"start", c.period.start.iso()}, {"end", c.period.end.iso()}}},
            {"observed_at", c.observed_at.iso()},
            {"factor", num(c.factor)},
            {"p_bar", num(c.p_bar)},
            {"n_delays", c.n_delays},
            {"warnings", c.warnings}};
}

json to_json(const SizeDelaySlope& s)
{
    return {{"slope", num(s.slope)}, {"se", num(s.se)}, {"p_value", num(s.p_value)}, {"n", s.n},
            {"excluded", s.excluded}};
}

json to_json(const DrawSummary& d)
{
    return {{"mean", num(d.mean)}, {"sd", num(d.sd)}, {"q50", num(d.q50)},
            {"q90", num(d.q90)}, {"q95", num(d.q95)}, {"q99", num(d.q99)}};
}

json to_json(const AggregateSummary& s)
{
    json j = json::object();
    for (std::size_t r = 0; r < 3; ++r) j[fmt(kUncertaintyQuartiles[r])] = to_json(s.rows[r]);
    return j;
}

json to_json(const ForecastConfig& c)
{
    json models = json::array();
    for (const auto& m : c.freq_models) models.push_back({{"weight", num(m.weight)}, {"fit", to_json(m.fit)}});
    return {{"horizon", {{"t_start", num(c.t_start)}, {"t_end", num(c.t_end)}}},
            {"severity", to_json(c.severity)},
            {"severity_n", c.severity_n},
            {"freq_models", models},
            {"n_inner", c.n_inner},
            {"n_outer", c.n_outer},
            {"seed", c.seed},
            {"bootstrap", std::string(to_string(c.bootstrap))},
            {"notes", c.notes}};
}

json to_json(const AggregateResult& r)
{
    return {{"units", "billions of ids"},
            {"summary", to_json(r.summary)},
            {"failed_replicates", r.failed_replicates},
            {"warnings", r.warnings}};
}

json to_json(const RealizedCheck& r)
{
    json j = {{"period", {{"start", r.period.start.iso()}, {"end", r.period.end.iso()}}},
              {"n_events", r.n_events},
              {"realized_total", num(r.realized_total)},
              {"warnings", r.warnings}};
    if (r.factor) j["completeness_factor"] = num(*r.factor);
    if (r.expected_eventual_count) j["expected_eventual_count"] = num(*r.expected_eventual_count);
    if (r.projected_total) j["projected_total"] = num(*r.projected_total);
    return j;
}

json to_json(const CostModel& m)
{
    json j = {{"kind", std::string(to_string(m.kind))}};
    switch (m.kind) {
    case CostKind::FlatModerate:
    case CostKind::FlatLarge: j["unit_cost"] = num(m.unit_cost); break;
    case CostKind::PowerJacobs:
    case CostKind::PowerRomanosky:
        j["exponent"] = num(m.exponent);
        j["anchor"] = {{"size", num(m.anchor.size)}, {"cost", num(m.anchor.cost)}};
        break;
    case CostKind::FlatExtremeBand: j["band"] = {num(m.band_low), num(m.band_high)}; break;
    }
    return j;
}

json to_json(const HistoricalCost& h)
{
    json j = {{"total", num(h.total)},
              {"trailing_total", num(h.trailing_total)},
              {"trailing_share", num(h.trailing_share)},
              {"trailing_per_year", num(h.trailing_per_year)},
              {"trailing_years", num(h.trailing_years)},
              {"n_events", h.n_events}};
    if (h.trailing_window)
        j["trailing_window"] = {{"start", h.trailing_window->start.iso()}, {"end", h.trailing_window->end.iso()}};
    return j;
}

json to_json(const SectorQuantileTable& t)
{
    json rows = json::array();
    for (const auto& r : t.rows) {
        json q = json::object();
        for (std::size_t i = 0; i < t.probs.size(); ++i) q[fmt(t.probs[i])] = num(r.quantiles[i]);
        rows.push_back({{"sector", std::string(to_string(r.sector))},
                        {"n", r.n},
                        {"quantiles", q},
                        {"annual_frequency", num(r.annual_frequency)}});
    }
    return {{"u", t.u},
            {"period", {{"start", t.period.start.iso()}, {"end", t.period.end.iso()}}},
            {"rows", rows},
            {"notes", t.notes}};
}

json to_json(const SectorTypeTotals& t)
{
    json cells = json::object();
    for (auto s : kAllSectors) {
        json row = json::object();
        for (auto ty : kAllTypes) row[std::string(to_string(ty))] = t.cell(s, ty);
        row["total"] = t.sector_total(s);
        cells[std::string(to_string(s))] = row;
    }
    json types = json::object();
    for (auto ty : kAllTypes) types[std::string(to_string(ty))] = t.type_total(ty);
    return {{"cells", cells}, {"type_totals", types}, {"grand_total", t.grand_total()}};
}

json to_json(const Histogram& h)
{
    json bins = json::array();
    for (const auto& b : h.bins) bins.push_back({{"lo", num(b.lo)}, {"hi", num(b.hi)}, {"count", b.count}});
    return {{"bins", bins}, {"overflow", h.overflow}};
}

json to_json(const RollingAlpha& r)
{
    json pts = json::array();
    for (const auto& p : r.points)
        pts.push_back({{"window_end", p.window_end.iso()}, {"alpha", num(p.alpha)}, {"se", num(p.se)}});
    return {{"points", pts}, {"warnings", r.warnings}};
}

std::string freq_table_csv(const std::vector<FreqRow>& rows)
{
    std::ostringstream o;
    o << "u,n,mean_family,beta0,beta0_se,beta1,beta1_se,beta1_p,theta,theta_se,overdispersion_p,"
         "overdispersion_p_chi2,deviance_p\n";
    for (const auto& r : rows) {
        const auto& f = r.fit;
        o << fmt(r.u) << ',' << r.n_events << ',' << to_string(f.mean_family) << ',' << fmt(f.beta0) << ','
          << fmt(f.se.beta0) << ',' << fmt(f.beta1) << ',' << fmt(f.se.beta1) << ',' << fmt(slope_wald_p(f)) << ','
          << fmt(f.theta) << ',' << fmt(f.se.theta) << ',' << fmt(r.overdispersion.p_value) << ','
          << fmt(r.overdispersion.p_value_chi2) << ',' << fmt(r.gof.p_value) << '\n';
    }
    return o.str();
}

std::string tail_table_csv(const std::vector<TailRow>& rows)
{
    std::ostringstream o;
    o << "u,n,alpha,alpha_se,logL,alpha1,alpha1_se,logL1,mu,mu_se,sigma2,sigma2_se,logL_lognormal\n";
    auto se = [](const TailFit& f, const char* k) {
        auto it = f.se.find(k);
        return it == f.se.end() ? std::string("") : fmt(it->second);
    };
    for (const auto& r : rows) {
        o << fmt(r.u) << ',' << r.n << ',';
        if (r.pareto) o << fmt(r.pareto->model.alpha) << ',' << se(*r.pareto, "alpha") << ',' << fmt(r.pareto->logL_log_scale);
        else o << ",,";
        o << ',';
        if (r.trunc_pareto)
            o << fmt(r.trunc_pareto->model.alpha) << ',' << se(*r.trunc_pareto, "alpha") << ','
              << fmt(r.trunc_pareto->logL_log_scale);
        else o << ",,";
        o << ',';
        if (r.trunc_lognormal)
            o << fmt(r.trunc_lognormal->model.mu) << ',' << se(*r.trunc_lognormal, "mu") << ','
              << fmt(r.trunc_lognormal->model.sigma2) << ',' << se(*r.trunc_lognormal, "sigma2") << ','
              << fmt(r.trunc_lognormal->logL_log_scale);
        else o << ",,,,";
        o << '\n';
    }
    return o.str();
}

std::string forecast_csv(const AggregateSummary& s)
{
    std::ostringstream o;
    o << "quantile,mean,sd,q50,q90,q95,q99\n";
    for (std::size_t r = 0; r < 3; ++r) {
        const auto& d = s.rows[r];
        o << fmt(kUncertaintyQuartiles[r]);
        for (double v : {d.mean, d.sd, d.q50, d.q90, d.q95, d.q99}) o << ',' << sig(v, 2);
        o << '\n';
    }
    return o.str();
}

std::string forecast_ratio_csv(const std::array<DrawSummary, 3>& ratios)
{
    std::ostringstream o;
    o << "quantile,mean,sd,q50,q90,q95,q99\n";
    for (std::size_t r = 0; r < 3; ++r) {
        const auto& d = ratios[r];
        o << fmt(kUncertaintyQuartiles[r]);
        for (double v : {d.mean, d.sd, d.q50, d.q90, d.q95, d.q99}) o << ',' << sig(v, 3);
        o << '\n';
    }
    return o.str();
}

} // namespace breachcat::report
