#pragma once

#include "breachcat/events.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace breachcat {

enum class CostKind { FlatModerate, PowerJacobs, PowerRomanosky, FlatLarge, FlatExtremeBand };

std::string_view to_string(CostKind k);
CostKind cost_kind_from_string(std::string_view s);

struct CostAnchor {
    double size = 1.0;
    double cost = 1.0;
};

struct CostModel {
    CostKind kind = CostKind::FlatModerate;
    double unit_cost = 148.0;   // $/id, flat kinds
    double exponent = 1.0;      // power kinds
    CostAnchor anchor;          // power kinds
    double band_low = 1.0;      // $/id, band kind
    double band_high = 5.0;

    static CostModel flat_moderate(double unit_cost = 148.0);
    static CostModel power_jacobs(double exponent = 0.76, CostAnchor anchor = {1e4, 148.0 * 1e4});
    static CostModel power_romanosky(double exponent = 0.3, CostAnchor anchor = {5e6, 5e6});
    static CostModel flat_large(double unit_cost = 5.0);
    static CostModel extreme_band(double low = 1.0, double high = 5.0);
    static CostModel defaults(CostKind kind);

    void validate() const;
};

// Largest size for which the moderate flat rate is meant to apply.
inline constexpr double kModerateMaxSize = 1e5;

struct EventCost {
    double low = 0.0;   // equals high except for the band kind
    double high = 0.0;
    std::vector<std::string> warnings;
};

EventCost event_cost(double size, const CostModel& model);

double annual_cost_extrapolation(double breach_prob, double n_firms, double mean_size, double unit_cost);

struct HistoricalCost {
    double total = 0.0;          // $ over all matching events
    double trailing_total = 0.0; // $ over the trailing window
    double trailing_share = 0.0;
    double trailing_per_year = 0.0;
    double trailing_years = 5.0;
    std::size_t n_events = 0;
    std::optional<DateRange> trailing_window;
};

// Trailing window ends at the latest matching event date (or `as_of`).
HistoricalCost historical_large_cost(std::span<const EventRecord> events, std::uint64_t u, double unit_cost,
                                     std::optional<Date> as_of = std::nullopt, double trailing_years = 5.0);

} // namespace breachcat
