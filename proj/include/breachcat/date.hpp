#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace breachcat {

// Proleptic Gregorian calendar date, stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;

    // Throws PreconditionError for an invalid calendar date.
    static Date from_ymd(int year, unsigned month, unsigned day);
    static constexpr Date from_days(long days) { Date d; d.days_ = days; return d; }
    // Strict YYYY-MM-DD.
    static std::optional<Date> parse(std::string_view iso);
    static Date today();

    constexpr long days() const { return days_; }
    int year() const;
    unsigned month() const;
    unsigned day() const;
    std::string iso() const;

    constexpr Date add_days(long n) const { return from_days(days_ + n); }
    Date add_years(int n) const;

    constexpr auto operator<=>(const Date&) const = default;
    friend constexpr long operator-(Date a, Date b) { return a.days_ - b.days_; }

private:
    long days_ = 0;
};

// Half-open interval [start, end).
struct DateRange {
    Date start;
    Date end;

    bool contains(Date d) const { return start <= d && d < end; }
    long length_days() const { return end - start; }
    double length_years() const;
};

inline constexpr double kDaysPerYear = 365.25;

// Origin of the model time axis used by the frequency regressions.
Date model_epoch();

// Years elapsed since model_epoch(), at day resolution.
double model_years(Date d);

// First day of the calendar half-year (Jan 1 or Jul 1) containing d.
Date half_year_floor(Date d);
// Smallest half-year boundary >= d.
Date half_year_ceil(Date d);
// Next half-year boundary strictly after a boundary b.
Date next_half_year(Date b);
// Index of d's half-year counted from model_epoch() (2005H1 = 0).
long half_year_index(Date d);

} // namespace breachcat
