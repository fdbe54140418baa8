#pragma once

#include "breachcat/date.hpp"
#include "breachcat/events.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace breachcat {

struct DelayRecord {
    Date event_date;
    Date submit_date;
    std::optional<std::uint64_t> ids;  // optional size column
};

struct DelayParseResult {
    std::vector<DelayRecord> records;
    std::vector<RowWarning> warnings;
};

// Delay CSV: event_date,submit_date[,ids]. Rows with submit_date before
// event_date are rejected with a warning.
DelayParseResult parse_delays(std::istream& source);
DelayParseResult read_delays_file(const std::filesystem::path& path);

// Empirical distribution of event-to-submission delays in days.
class DelayDistribution {
public:
    DelayDistribution(std::vector<long> delays, DateRange source_window);

    // Records submitted inside `window` (all records if nullopt).
    static DelayDistribution from_records(std::span<const DelayRecord> records,
                                          std::optional<DateRange> window = std::nullopt);

    const std::vector<long>& delays() const { return sorted_; }
    const DateRange& source_window() const { return window_; }
    std::size_t size() const { return sorted_.size(); }
    // Empirical P(D <= days).
    double cdf(long days) const;

private:
    std::vector<long> sorted_;
    DateRange window_;
};

struct DelayQuantiles {
    std::vector<double> probs;
    std::vector<double> quantiles;  // days, inverted-CDF convention
    double mean = 0.0;
    std::size_t n = 0;
};

DelayQuantiles delay_quantiles(const DelayDistribution& d, std::span<const double> probs);

struct CompletenessFactor {
    DateRange period;
    Date observed_at;
    double factor = 1.0;  // expected eventual / observed count
    double p_bar = 1.0;   // mean probability an event in the period is already recorded
    std::size_t n_delays = 0;
    std::vector<std::string> warnings;
};

// p_bar averages the empirical delay CDF at (observed_at - t) over every
// day t of the period; factor = 1 / p_bar.
CompletenessFactor completeness_factor(const DelayDistribution& d, DateRange period, Date observed_at);

struct SizeDelaySlope {
    double slope = 0.0;
    double se = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    std::size_t excluded = 0;  // records with zero size or zero delay
};

struct SizeDelayPoint {
    double ids = 0.0;
    double delay_days = 0.0;
};

// OLS of ln(delay) on ln(ids) with a two-sided t-test on the slope.
SizeDelaySlope size_delay_slope(std::span<const SizeDelayPoint> records);

struct IntensityPoint {
    Date date;
    double density = 0.0;  // per day
};

inline constexpr double kDefaultBandwidthDays = 14.0;

// Gaussian kernel density of submission dates on a daily grid spanning the
// data +/- 5 bandwidths.
std::vector<IntensityPoint> submission_intensity(std::span<const DelayRecord> records,
                                                 double bandwidth_days = kDefaultBandwidthDays);

} // namespace breachcat
