#include "breachcat/cost.hpp"

#include "breachcat/errors.hpp"

#include <algorithm>
#include <cmath>

namespace breachcat {

std::string_view to_string(CostKind k)
{
    switch (k) {
    case CostKind::FlatModerate: return "flat_moderate";
    case CostKind::PowerJacobs: return "power_jacobs";
    case CostKind::PowerRomanosky: return "power_romanosky";
    case CostKind::FlatLarge: return "flat_large";
    case CostKind::FlatExtremeBand: return "flat_extreme_band";
    }
    return "?";
}

CostKind cost_kind_from_string(std::string_view s)
{
    for (auto k : {CostKind::FlatModerate, CostKind::PowerJacobs, CostKind::PowerRomanosky, CostKind::FlatLarge,
                   CostKind::FlatExtremeBand})
        if (s == to_string(k)) return k;
    throw InputError("unknown cost model: " + std::string(s));
}

CostModel CostModel::flat_moderate(double unit_cost)
{
    CostModel m;
    m.kind = CostKind::FlatModerate;
    m.unit_cost = unit_cost;
    return m;
}

CostModel CostModel::power_jacobs(double exponent, CostAnchor anchor)
{
    CostModel m;
    m.kind = CostKind::PowerJacobs;
    m.exponent = exponent;
    m.anchor = anchor;
    return m;
}

CostModel CostModel::power_romanosky(double exponent, CostAnchor anchor)
{
    CostModel m;
    m.kind = CostKind::PowerRomanosky;
    m.exponent = exponent;
    m.anchor = anchor;
    return m;
}

CostModel CostModel::flat_large(double unit_cost)
{
    CostModel m;
    m.kind = CostKind::FlatLarge;
    m.unit_cost = unit_cost;
    return m;
}

CostModel CostModel::extreme_band(double low, double high)
{
    CostModel m;
    m.kind = CostKind::FlatExtremeBand;
    m.band_low = low;
    m.band_high = high;
    return m;
}

CostModel CostModel::defaults(CostKind kind)
{
    switch (kind) {
    case CostKind::FlatModerate: return flat_moderate();
    case CostKind::PowerJacobs: return power_jacobs();
    case CostKind::PowerRomanosky: return power_romanosky();
    case CostKind::FlatLarge: return flat_large();
    case CostKind::FlatExtremeBand: return extreme_band();
    }
    return flat_moderate();
}

void CostModel::validate() const
{
    switch (kind) {
    case CostKind::FlatModerate:
    case CostKind::FlatLarge:
        if (!(unit_cost > 0.0)) throw PreconditionError("cost model: unit_cost must be > 0");
        break;
    case CostKind::PowerJacobs:
    case CostKind::PowerRomanosky:
        if (!(exponent > 0.0 && exponent <= 1.0)) throw PreconditionError("cost model: exponent must be in (0, 1]");
        if (!(anchor.size > 0.0) || !(anchor.cost > 0.0))
            throw PreconditionError("cost model: anchor size and cost must be > 0");
        break;
    case CostKind::FlatExtremeBand:
        if (!(band_low > 0.0) || !(band_high >= band_low))
            throw PreconditionError("cost model: band must satisfy 0 < low <= high");
        break;
    }
}

EventCost event_cost(double size, const CostModel& model)
{
    model.validate();
    if (!(size >= 1.0)) throw PreconditionError("event_cost: size must be >= 1");
    EventCost out;
    switch (model.kind) {
    case CostKind::FlatModerate:
        out.low = out.high = size * model.unit_cost;
        if (size > kModerateMaxSize) out.warnings.push_back("moderate per-id cost applied above 1e5 ids");
        break;
    case CostKind::FlatLarge:
        out.low = out.high = size * model.unit_cost;
        break;
    case CostKind::PowerJacobs:
    case CostKind::PowerRomanosky:
        out.low = out.high = model.anchor.cost * std::pow(size / model.anchor.size, model.exponent);
        break;
    case CostKind::FlatExtremeBand:
        out.low = size * model.band_low;
        out.high = size * model.band_high;
        break;
    }
    return out;
}

double annual_cost_extrapolation(double breach_prob, double n_firms, double mean_size, double unit_cost)
{
    if (!(breach_prob > 0.0 && breach_prob <= 1.0))
        throw PreconditionError("annual_cost_extrapolation: breach_prob must be in (0, 1]");
    if (!(n_firms > 0.0) || !(mean_size > 0.0) || !(unit_cost > 0.0))
        throw PreconditionError("annual_cost_extrapolation: inputs must be > 0");
    return breach_prob * n_firms * mean_size * unit_cost;
}

HistoricalCost historical_large_cost(std::span<const EventRecord> events, std::uint64_t u, double unit_cost,
                                     std::optional<Date> as_of, double trailing_years)
{
    if (u < 1) throw PreconditionError("historical_large_cost: u must be >= 1");
    if (!(unit_cost > 0.0)) throw PreconditionError("historical_large_cost: unit_cost must be > 0");
    HistoricalCost out;
    out.trailing_years = trailing_years;
    std::optional<Date> last;
    for (const auto& e : events) {
        if (e.size_unknown() || e.ids < u) continue;
        ++out.n_events;
        out.total += unit_cost * static_cast<double>(e.ids);
        if (!last || *last < e.event_date) last = e.event_date;
    }
    if (!out.n_events) return out;
    const Date end = as_of ? *as_of : last->add_days(1);
    const Date start = end.add_days(-static_cast<long>(std::lround(trailing_years * kDaysPerYear)));
    out.trailing_window = DateRange{start, end};
    for (const auto& e : events) {
        if (e.size_unknown() || e.ids < u || !out.trailing_window->contains(e.event_date)) continue;
        out.trailing_total += unit_cost * static_cast<double>(e.ids);
    }
    out.trailing_share = out.total > 0.0 ? out.trailing_total / out.total : 0.0;
    out.trailing_per_year = out.trailing_total / trailing_years;
    return out;
}

} // namespace breachcat
