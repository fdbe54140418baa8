#include "breachcat/date.hpp"

#include "breachcat/errors.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace breachcat {

namespace {

namespace chr = std::chrono;

chr::year_month_day to_ymd(long days)
{
    return chr::year_month_day{chr::sys_days{chr::days{days}}};
}

bool parse_uint(std::string_view s, unsigned& out)
{
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

} // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day)
{
    chr::year_month_day ymd{chr::year{year}, chr::month{month}, chr::day{day}};
    if (!ymd.ok())
        throw PreconditionError("invalid calendar date " + std::to_string(year) + "-" +
                                std::to_string(month) + "-" + std::to_string(day));
    return from_days(chr::sys_days{ymd}.time_since_epoch().count());
}

std::optional<Date> Date::parse(std::string_view iso)
{
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    unsigned y = 0, m = 0, d = 0;
    if (!parse_uint(iso.substr(0, 4), y) || !parse_uint(iso.substr(5, 2), m) ||
        !parse_uint(iso.substr(8, 2), d))
        return std::nullopt;
    chr::year_month_day ymd{chr::year{static_cast<int>(y)}, chr::month{m}, chr::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return from_days(chr::sys_days{ymd}.time_since_epoch().count());
}

Date Date::today()
{
    auto now = chr::floor<chr::days>(chr::system_clock::now());
    return from_days(now.time_since_epoch().count());
}

int Date::year() const { return static_cast<int>(to_ymd(days_).year()); }
unsigned Date::month() const { return static_cast<unsigned>(to_ymd(days_).month()); }
unsigned Date::day() const { return static_cast<unsigned>(to_ymd(days_).day()); }

std::string Date::iso() const
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
    return buf;
}

Date Date::add_years(int n) const
{
    auto ymd = to_ymd(days_);
    chr::year_month_day shifted{ymd.year() + chr::years{n}, ymd.month(), ymd.day()};
    if (!shifted.ok()) shifted = chr::year_month_day{shifted.year(), shifted.month(), chr::day{28}};
    return from_days(chr::sys_days{shifted}.time_since_epoch().count());
}

double DateRange::length_years() const
{
    return static_cast<double>(length_days()) / kDaysPerYear;
}

Date model_epoch() { return Date::from_ymd(2005, 1, 1); }

double model_years(Date d)
{
    return static_cast<double>(d - model_epoch()) / kDaysPerYear;
}

Date half_year_floor(Date d)
{
    return Date::from_ymd(d.year(), d.month() >= 7 ? 7 : 1, 1);
}

Date half_year_ceil(Date d)
{
    Date f = half_year_floor(d);
    return f == d ? d : next_half_year(f);
}

Date next_half_year(Date b)
{
    return b.month() >= 7 ? Date::from_ymd(b.year() + 1, 1, 1) : Date::from_ymd(b.year(), 7, 1);
}

long half_year_index(Date d)
{
    return (static_cast<long>(d.year()) - 2005) * 2 + (d.month() >= 7 ? 1 : 0);
}

} // namespace breachcat
