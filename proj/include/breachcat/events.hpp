#pragma once

#include "breachcat/date.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace breachcat {

enum class Sector { Business, Financial, Web, Medical, Educational, Government, Other };
enum class BreachType { Hack, Disc, Insd, Hw, Na };

inline constexpr std::size_t kSectorCount = 7;
inline constexpr std::size_t kTypeCount = 5;
inline constexpr std::array<Sector, kSectorCount> kAllSectors{
    Sector::Business, Sector::Financial, Sector::Web,       Sector::Medical,
    Sector::Educational, Sector::Government, Sector::Other};
inline constexpr std::array<BreachType, kTypeCount> kAllTypes{
    BreachType::Hack, BreachType::Disc, BreachType::Insd, BreachType::Hw, BreachType::Na};

std::string_view to_string(Sector s);
std::string_view to_string(BreachType t);
// Case-insensitive; unknown spellings map to Other / Na.
Sector parse_sector(std::string_view s);
BreachType parse_breach_type(std::string_view s);
// Strict variants for command-line lists; nullopt on unknown spelling.
std::optional<Sector> sector_from_string(std::string_view s);
std::optional<BreachType> breach_type_from_string(std::string_view s);

template <class E, std::size_t N>
class EnumSet {
public:
    constexpr EnumSet() = default;
    constexpr EnumSet(std::initializer_list<E> items)
    {
        for (E e : items) insert(e);
    }
    static constexpr EnumSet all()
    {
        EnumSet s;
        s.bits_ = (1u << N) - 1u;
        return s;
    }
    static constexpr EnumSet none() { return EnumSet{}; }

    constexpr void insert(E e) { bits_ |= 1u << static_cast<unsigned>(e); }
    constexpr bool contains(E e) const { return (bits_ >> static_cast<unsigned>(e)) & 1u; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr bool operator==(const EnumSet&) const = default;

private:
    unsigned bits_ = 0;
};

using SectorSet = EnumSet<Sector, kSectorCount>;
using TypeSet = EnumSet<BreachType, kTypeCount>;

struct EventRecord {
    Date event_date;
    Sector org_sector = Sector::Other;
    BreachType breach_type = BreachType::Na;
    std::uint64_t ids = 0;
    std::optional<std::string> state;
    std::optional<std::string> org_name;

    // ids == 0 means the breach size was not reported.
    bool size_unknown() const { return ids == 0; }
};

// Selection of events. `min_ids` is the severity threshold u and is
// inclusive: an event with exactly u ids is kept.
struct EventFilter {
    std::uint64_t min_ids = 1;
    TypeSet types = TypeSet::all();
    SectorSet sectors = SectorSet::all();
    DateRange date_range{Date::from_days(7305), Date::from_days(47482)};  // 1990-01-01 .. 2100-01-01
    // Lets size-unknown (ids == 0) events through the threshold test, for counting only.
    bool include_size_unknown = false;

    void validate() const;
    bool accepts(const EventRecord& e) const;
};

// ---- ingestion ---------------------------------------------------------------

struct RowWarning {
    std::size_t line = 0;  // physical line number in the source, header = 1
    std::string reason;
};

struct ParseResult {
    std::vector<EventRecord> events;
    std::vector<RowWarning> warnings;
};

// Canonical field name -> column header in the source.
struct Schema {
    std::map<std::string, std::string> columns;
    static Schema canonical();
};

// Reads an events CSV. Mandatory columns: event_date, org_sector,
// breach_type, ids. Malformed rows are reported as warnings and skipped.
// Dates outside [1990-01-01, today] are rejected.
ParseResult parse_events(std::istream& source, const Schema& schema = Schema::canonical(),
                         Date today = Date::today());
ParseResult read_events_file(const std::filesystem::path& path, const Schema& schema = Schema::canonical());

// ---- selection and binning -------------------------------------------------------

std::vector<EventRecord> filter_events(std::span<const EventRecord> events, const EventFilter& f);

// Calendar half-year counts (Jan 1 / Jul 1 edges) over the filter's date range.
struct BinnedCounts {
    std::vector<Date> bin_edges;
    std::vector<std::uint64_t> counts;
    std::vector<double> t_mid;  // nominal midpoints, years since 2005-01-01
    bool first_partial = false;
    bool last_partial = false;

    std::size_t bins() const { return counts.size(); }
    std::uint64_t total() const;
    // Drops partial bins at either end.
    BinnedCounts full_bins_only() const;
};

BinnedCounts bin_counts(std::span<const EventRecord> events, const EventFilter& f);

// ---- descriptive tables ------------------------------------------------------------

struct SectorQuantileRow {
    Sector sector = Sector::Other;
    std::size_t n = 0;
    std::vector<double> quantiles;  // aligned with SectorQuantileTable::probs
    double annual_frequency = 0.0;
};

struct SectorQuantileTable {
    std::uint64_t u = 1;
    std::vector<double> probs;
    DateRange period;
    std::vector<SectorQuantileRow> rows;
    std::vector<std::string> notes;
};

// Per-sector type-1 quantiles of ids for events with ids >= u inside
// `period`; annual frequency = count / period length in years.
SectorQuantileTable sector_quantiles(std::span<const EventRecord> events, std::uint64_t u,
                                     std::span<const double> probs, DateRange period);

// Summed ids by [sector][type]. Sector::Other and BreachType::Na hold the
// unattributed remainders that only appear in the margins of a report.
struct SectorTypeTotals {
    std::array<std::array<std::uint64_t, kTypeCount>, kSectorCount> cells{};

    std::uint64_t cell(Sector s, BreachType t) const
    {
        return cells[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
    }
    std::uint64_t type_total(BreachType t) const;
    std::uint64_t sector_total(Sector s) const;
    std::uint64_t grand_total() const;
};

SectorTypeTotals totals_by_sector_type(std::span<const EventRecord> events);

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::uint64_t count = 0;
};

struct Histogram {
    std::vector<HistogramBin> bins;
    std::uint64_t overflow = 0;  // events with ids > u_max
};

// Equal-width bins on [min ids, u_max]; the last bin is closed on the right.
Histogram histogram_export(std::span<const EventRecord> events, double u_max, std::size_t bins);

struct ChronologyPoint {
    Date event_date;
    std::uint64_t ids = 0;
    BreachType breach_type = BreachType::Na;
};

std::vector<ChronologyPoint> chronology_export(std::span<const EventRecord> events, const EventFilter& f);

} // namespace breachcat
