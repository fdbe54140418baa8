#include "breachcat/delay.hpp"

#include "breachcat/csv.hpp"
#include "breachcat/errors.hpp"
#include "breachcat/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

namespace breachcat {

DelayParseResult parse_delays(std::istream& source)
{
    if (!source) throw IoError("delay stream is not readable");
    std::map<std::string, std::size_t> header;
    if (!csv::read_header(source, header)) throw SchemaError("delay source has no header line");
    auto ev = header.find("event_date");
    auto sub = header.find("submit_date");
    if (ev == header.end()) throw SchemaError("missing mandatory column 'event_date'");
    if (sub == header.end()) throw SchemaError("missing mandatory column 'submit_date'");
    auto ids_col = header.find("ids");

    DelayParseResult out;
    std::vector<std::string> fields;
    std::size_t line = 1;
    while (csv::next_row(source, fields, line)) {
        if (fields.size() <= std::max(ev->second, sub->second)) {
            out.warnings.push_back({line, "too few fields"});
            continue;
        }
        auto e = Date::parse(fields[ev->second]);
        auto s = Date::parse(fields[sub->second]);
        if (!e || !s) {
            out.warnings.push_back({line, "unparseable date"});
            continue;
        }
        if (*s < *e) {
            out.warnings.push_back({line, "negative delay"});
            continue;
        }
        DelayRecord rec{*e, *s, std::nullopt};
        if (ids_col != header.end() && ids_col->second < fields.size() && !fields[ids_col->second].empty()) {
            std::uint64_t v = 0;
            const auto& f = fields[ids_col->second];
            auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec == std::errc{} && p == f.data() + f.size()) rec.ids = v;
            else out.warnings.push_back({line, "unparseable ids (size ignored)"});
        }
        out.records.push_back(rec);
    }
    return out;
}

DelayParseResult read_delays_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open delay file " + path.string());
    return parse_delays(in);
}

DelayDistribution::DelayDistribution(std::vector<long> delays, DateRange source_window)
    : sorted_(std::move(delays)), window_(source_window)
{
    if (sorted_.empty()) throw PreconditionError("delay distribution is empty");
    for (long d : sorted_)
        if (d < 0) throw PreconditionError("delay distribution contains a negative delay");
    std::sort(sorted_.begin(), sorted_.end());
}

DelayDistribution DelayDistribution::from_records(std::span<const DelayRecord> records, std::optional<DateRange> window)
{
    std::vector<long> delays;
    Date lo = Date::from_days(std::numeric_limits<int>::max()), hi = Date::from_days(std::numeric_limits<int>::min());
    for (const auto& r : records) {
        if (window && !window->contains(r.submit_date)) continue;
        if (r.submit_date < r.event_date) continue;
        delays.push_back(r.submit_date - r.event_date);
        lo = std::min(lo, r.submit_date);
        hi = std::max(hi, r.submit_date);
    }
    if (delays.empty()) throw PreconditionError("no delay records in the requested submission window");
    return DelayDistribution(std::move(delays), window.value_or(DateRange{lo, hi.add_days(1)}));
}

double DelayDistribution::cdf(long days) const
{
    if (days < 0) return 0.0;
    auto it = std::upper_bound(sorted_.begin(), sorted_.end(), days);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

DelayQuantiles delay_quantiles(const DelayDistribution& d, std::span<const double> probs)
{
    DelayQuantiles out;
    out.n = d.size();
    std::vector<double> v(d.delays().begin(), d.delays().end());
    for (double p : probs)
        if (!(p > 0.0 && p < 1.0)) throw PreconditionError("delay_quantiles: probabilities must lie in (0, 1)");
    out.probs.assign(probs.begin(), probs.end());
    for (double p : probs) out.quantiles.push_back(quantile_type1(v, p));
    out.mean = mean(v);
    return out;
}

CompletenessFactor completeness_factor(const DelayDistribution& d, DateRange period, Date observed_at)
{
    if (!(period.start < period.end)) throw PreconditionError("completeness_factor: empty period");
    if (observed_at < period.end) throw PreconditionError("completeness_factor: observed_at precedes the period end");
    CompletenessFactor out;
    out.period = period;
    out.observed_at = observed_at;
    out.n_delays = d.size();
    double acc = 0.0;
    for (Date t = period.start; t < period.end; t = t.add_days(1)) acc += d.cdf(observed_at - t);
    out.p_bar = acc / static_cast<double>(period.length_days());
    if (!(out.p_bar > 0.0))
        throw NumericalError("completeness_factor: no delay mass within the observation lag; factor undefined");
    out.factor = 1.0 / out.p_bar;
    if (d.source_window().end < period.start.add_years(-3))
        out.warnings.push_back("delay distribution is stale: source window ends " + d.source_window().end.iso() +
                               ", more than 3 years before the period");
    return out;
}

SizeDelaySlope size_delay_slope(std::span<const SizeDelayPoint> records)
{
    SizeDelaySlope out;
    std::vector<double> lx, ly;
    for (const auto& r : records) {
        if (!(r.ids > 0.0) || !(r.delay_days > 0.0)) {
            ++out.excluded;
            continue;
        }
        lx.push_back(std::log(r.ids));
        ly.push_back(std::log(r.delay_days));
    }
    if (lx.size() < 3) throw PreconditionError("size_delay_slope: fewer than 3 usable records");
    auto fit = least_squares(lx, ly);
    out.n = lx.size();
    out.slope = fit.slope;
    out.se = fit.slope_se;
    const double df = static_cast<double>(out.n) - 2.0;
    if (out.se > 1e-12 * (1.0 + std::fabs(out.slope))) out.p_value = student_t_two_sided(out.slope / out.se, df);
    else out.p_value = out.slope != 0.0 ? 0.0 : 1.0;
    return out;
}

std::vector<IntensityPoint> submission_intensity(std::span<const DelayRecord> records, double bandwidth_days)
{
    if (!(bandwidth_days > 0.0)) throw PreconditionError("submission_intensity: bandwidth must be > 0");
    std::vector<IntensityPoint> out;
    if (records.empty()) return out;
    long lo = records.front().submit_date.days(), hi = lo;
    for (const auto& r : records) {
        lo = std::min(lo, r.submit_date.days());
        hi = std::max(hi, r.submit_date.days());
    }
    const long pad = static_cast<long>(std::ceil(5.0 * bandwidth_days));
    const double norm = 1.0 / (static_cast<double>(records.size()) * bandwidth_days * std::sqrt(2.0 * M_PI));
    for (long day = lo - pad; day <= hi + pad; ++day) {
        double s = 0.0;
        for (const auto& r : records) {
            const double z = (static_cast<double>(day - r.submit_date.days())) / bandwidth_days;
            s += std::exp(-0.5 * z * z);
        }
        out.push_back({Date::from_days(day), s * norm});
    }
    return out;
}

} // namespace breachcat
