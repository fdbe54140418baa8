#include "breachcat/events.hpp"

#include "breachcat/csv.hpp"
#include "breachcat/errors.hpp"
#include "breachcat/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace breachcat {

namespace {

constexpr std::array<std::string_view, kSectorCount> kSectorNames{
    "business", "financial", "web", "medical", "educational", "government", "other"};
constexpr std::array<std::string_view, kTypeCount> kTypeNames{"HACK", "DISC", "INSD", "HW", "NA"};

// Plain integers, or a decimal/scientific literal with an integral value.
std::optional<std::uint64_t> parse_ids(std::string_view s)
{
    if (s.empty()) return std::nullopt;
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && p == s.data() + s.size()) return v;
    double d = 0.0;
    auto [q, ec2] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec2 != std::errc{} || q != s.data() + s.size()) return std::nullopt;
    if (!std::isfinite(d) || d < 0.0 || d != std::floor(d) || d > 1.8e19) return std::nullopt;
    return static_cast<std::uint64_t>(d);
}

} // namespace

std::string_view to_string(Sector s) { return kSectorNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(BreachType t) { return kTypeNames[static_cast<std::size_t>(t)]; }

std::optional<Sector> sector_from_string(std::string_view s)
{
    const auto l = csv::lower(csv::trim(s));
    for (std::size_t i = 0; i < kSectorCount; ++i)
        if (l == kSectorNames[i]) return static_cast<Sector>(i);
    return std::nullopt;
}

std::optional<BreachType> breach_type_from_string(std::string_view s)
{
    const auto l = csv::lower(csv::trim(s));
    for (std::size_t i = 0; i < kTypeCount; ++i)
        if (l == csv::lower(kTypeNames[i])) return static_cast<BreachType>(i);
    return std::nullopt;
}

Sector parse_sector(std::string_view s) { return sector_from_string(s).value_or(Sector::Other); }
BreachType parse_breach_type(std::string_view s) { return breach_type_from_string(s).value_or(BreachType::Na); }

void EventFilter::validate() const
{
    if (min_ids < 1) throw PreconditionError("filter threshold min_ids must be >= 1");
    if (!(date_range.start < date_range.end)) throw PreconditionError("filter date range must satisfy start < end");
}

bool EventFilter::accepts(const EventRecord& e) const
{
    const bool size_ok = e.ids >= min_ids || (include_size_unknown && e.size_unknown());
    return size_ok && types.contains(e.breach_type) && sectors.contains(e.org_sector) &&
           date_range.contains(e.event_date);
}

Schema Schema::canonical()
{
    Schema s;
    for (auto name : {"event_date", "org_sector", "breach_type", "ids", "state", "org_name"})
        s.columns.emplace(name, name);
    return s;
}

ParseResult parse_events(std::istream& source, const Schema& schema, Date today)
{
    if (!source) throw IoError("events stream is not readable");
    std::map<std::string, std::size_t> header;
    if (!csv::read_header(source, header)) throw SchemaError("events source has no header line");

    auto column = [&](const std::string& field) -> std::optional<std::size_t> {
        auto it = schema.columns.find(field);
        const std::string name = csv::lower(it == schema.columns.end() ? field : it->second);
        auto h = header.find(name);
        if (h == header.end()) return std::nullopt;
        return h->second;
    };

    std::array<std::size_t, 4> mandatory{};
    const std::array<const char*, 4> mandatory_names{"event_date", "org_sector", "breach_type", "ids"};
    for (std::size_t i = 0; i < mandatory.size(); ++i) {
        auto c = column(mandatory_names[i]);
        if (!c) throw SchemaError(std::string("missing mandatory column '") + mandatory_names[i] + "'");
        mandatory[i] = *c;
    }
    const auto state_col = column("state");
    const auto name_col = column("org_name");

    const Date earliest = Date::from_ymd(1990, 1, 1);
    ParseResult out;
    std::vector<std::string> fields;
    std::size_t line = 1;
    while (csv::next_row(source, fields, line)) {
        auto field = [&](std::size_t idx) -> std::string_view {
            return idx < fields.size() ? std::string_view(fields[idx]) : std::string_view{};
        };
        const std::size_t needed = *std::max_element(mandatory.begin(), mandatory.end());
        if (fields.size() <= needed) {
            out.warnings.push_back({line, "too few fields"});
            continue;
        }
        auto date = Date::parse(field(mandatory[0]));
        if (!date) {
            out.warnings.push_back({line, "unparseable event_date"});
            continue;
        }
        if (*date < earliest || *date > today) {
            out.warnings.push_back({line, "event_date out of range"});
            continue;
        }
        auto ids_text = field(mandatory[3]);
        if (!ids_text.empty() && ids_text.front() == '-') {
            out.warnings.push_back({line, "negative ids"});
            continue;
        }
        auto ids = parse_ids(ids_text);
        if (!ids) {
            out.warnings.push_back({line, "unparseable ids"});
            continue;
        }
        EventRecord rec;
        rec.event_date = *date;
        rec.org_sector = parse_sector(field(mandatory[1]));
        rec.breach_type = parse_breach_type(field(mandatory[2]));
        rec.ids = *ids;
        if (state_col && !field(*state_col).empty()) rec.state = std::string(field(*state_col));
        if (name_col && !field(*name_col).empty()) rec.org_name = std::string(field(*name_col));
        out.events.push_back(std::move(rec));
    }
    if (source.bad()) throw IoError("read error in events stream");
    return out;
}

ParseResult read_events_file(const std::filesystem::path& path, const Schema& schema)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open events file " + path.string());
    return parse_events(in, schema);
}

std::vector<EventRecord> filter_events(std::span<const EventRecord> events, const EventFilter& f)
{
    f.validate();
    std::vector<EventRecord> out;
    std::copy_if(events.begin(), events.end(), std::back_inserter(out), [&](const auto& e) { return f.accepts(e); });
    return out;
}

std::uint64_t BinnedCounts::total() const
{
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
}

BinnedCounts BinnedCounts::full_bins_only() const
{
    BinnedCounts out;
    std::size_t lo = first_partial ? 1 : 0;
    std::size_t hi = counts.size() - (last_partial && counts.size() > lo ? 1 : 0);
    if (lo >= hi) return out;
    out.bin_edges.assign(bin_edges.begin() + static_cast<long>(lo), bin_edges.begin() + static_cast<long>(hi) + 1);
    out.counts.assign(counts.begin() + static_cast<long>(lo), counts.begin() + static_cast<long>(hi));
    out.t_mid.assign(t_mid.begin() + static_cast<long>(lo), t_mid.begin() + static_cast<long>(hi));
    return out;
}

BinnedCounts bin_counts(std::span<const EventRecord> events, const EventFilter& f)
{
    f.validate();
    BinnedCounts out;
    const Date first = half_year_floor(f.date_range.start);
    const Date last = half_year_ceil(f.date_range.end);
    for (Date e = first; e < last; e = next_half_year(e)) {
        out.bin_edges.push_back(e);
        out.t_mid.push_back(0.5 * static_cast<double>(half_year_index(e)) + 0.25);
    }
    out.bin_edges.push_back(last);
    out.counts.assign(out.bin_edges.size() - 1, 0);
    out.first_partial = first < f.date_range.start;
    out.last_partial = last > f.date_range.end;

    for (const auto& e : events) {
        if (!f.accepts(e)) continue;
        auto it = std::upper_bound(out.bin_edges.begin(), out.bin_edges.end(), e.event_date);
        ++out.counts[static_cast<std::size_t>(it - out.bin_edges.begin()) - 1];
    }
    return out;
}

SectorQuantileTable sector_quantiles(std::span<const EventRecord> events, std::uint64_t u,
                                     std::span<const double> probs, DateRange period)
{
    if (u < 1) throw PreconditionError("sector_quantiles: u must be >= 1");
    for (double p : probs)
        if (!(p > 0.0 && p <= 1.0)) throw PreconditionError("sector_quantiles: probabilities must lie in (0, 1]");
    if (!(period.start < period.end)) throw PreconditionError("sector_quantiles: empty period");

    SectorQuantileTable table;
    table.u = u;
    table.probs.assign(probs.begin(), probs.end());
    table.period = period;
    for (Sector s : kAllSectors) {
        std::vector<double> sizes;
        for (const auto& e : events)
            if (e.org_sector == s && e.ids >= u && period.contains(e.event_date))
                sizes.push_back(static_cast<double>(e.ids));
        if (sizes.empty()) {
            table.notes.push_back("sector '" + std::string(to_string(s)) + "' has no events; row omitted");
            continue;
        }
        SectorQuantileRow row;
        row.sector = s;
        row.n = sizes.size();
        row.quantiles = quantiles_type1(std::move(sizes), probs);
        row.annual_frequency = static_cast<double>(row.n) / period.length_years();
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::uint64_t SectorTypeTotals::type_total(BreachType t) const
{
    std::uint64_t s = 0;
    for (Sector sec : kAllSectors) s += cell(sec, t);
    return s;
}

std::uint64_t SectorTypeTotals::sector_total(Sector sec) const
{
    std::uint64_t s = 0;
    for (BreachType t : kAllTypes) s += cell(sec, t);
    return s;
}

std::uint64_t SectorTypeTotals::grand_total() const
{
    std::uint64_t s = 0;
    for (Sector sec : kAllSectors) s += sector_total(sec);
    return s;
}

SectorTypeTotals totals_by_sector_type(std::span<const EventRecord> events)
{
    SectorTypeTotals out;
    for (const auto& e : events)
        out.cells[static_cast<std::size_t>(e.org_sector)][static_cast<std::size_t>(e.breach_type)] += e.ids;
    return out;
}

Histogram histogram_export(std::span<const EventRecord> events, double u_max, std::size_t bins)
{
    if (bins < 1) throw PreconditionError("histogram_export: bins must be >= 1");
    Histogram h;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& e : events)
        if (!e.size_unknown()) lo = std::min(lo, static_cast<double>(e.ids));
    if (!std::isfinite(lo)) lo = 0.0;
    lo = std::min(lo, u_max);
    const double width = (u_max - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i < bins; ++i)
        h.bins.push_back({lo + width * static_cast<double>(i), i + 1 == bins ? u_max : lo + width * static_cast<double>(i + 1), 0});
    for (const auto& e : events) {
        if (e.size_unknown()) continue;
        const double x = static_cast<double>(e.ids);
        if (x > u_max) {
            ++h.overflow;
            continue;
        }
        std::size_t k = width > 0.0 ? static_cast<std::size_t>((x - lo) / width) : 0;
        ++h.bins[std::min(k, bins - 1)].count;
    }
    return h;
}

std::vector<ChronologyPoint> chronology_export(std::span<const EventRecord> events, const EventFilter& f)
{
    std::vector<ChronologyPoint> out;
    for (const auto& e : filter_events(events, f)) out.push_back({e.event_date, e.ids, e.breach_type});
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.event_date < b.event_date; });
    return out;
}

} // namespace breachcat
