#include "breachcat/errors.hpp"
#include "breachcat/events.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>

using namespace breachcat;

namespace {

const Date kToday = Date::from_ymd(2020, 1, 1);

ParseResult parse(const std::string& body)
{
    std::istringstream in("event_date,org_sector,breach_type,ids,state,org_name\n" + body);
    return parse_events(in, Schema::canonical(), kToday);
}

EventRecord ev(int y, unsigned m, unsigned d, std::uint64_t ids, BreachType t = BreachType::Hack,
               Sector s = Sector::Web)
{
    EventRecord e;
    e.event_date = Date::from_ymd(y, m, d);
    e.ids = ids;
    e.breach_type = t;
    e.org_sector = s;
    return e;
}

EventFilter wide(std::uint64_t u = 1)
{
    EventFilter f;
    f.min_ids = u;
    return f;
}

} // namespace

TEST_CASE("parse a well-formed row")
{
    auto r = parse("2016-10-01,web,HACK,57000000,CA,Uber\n");
    REQUIRE(r.events.size() == 1);
    CHECK(r.warnings.empty());
    const auto& e = r.events[0];
    CHECK(e.event_date == Date::from_ymd(2016, 10, 1));
    CHECK(e.org_sector == Sector::Web);
    CHECK(e.breach_type == BreachType::Hack);
    CHECK(e.ids == 57000000u);
    CHECK(e.state == "CA");
    CHECK(e.org_name == "Uber");
}

TEST_CASE("header-only input is empty without warnings")
{
    auto r = parse("");
    CHECK(r.events.empty());
    CHECK(r.warnings.empty());
}

TEST_CASE("malformed rows become warnings with line numbers")
{
    auto r = parse("2016-10-01,web,HACK,abc,CA,Uber\n"
                   "2016-13-01,web,HACK,5,CA,x\n"
                   "2016-10-01,web,HACK,-5,CA,x\n"
                   "2016-10-01,web\n"
                   "2016-10-02,Financial,disc,12,,\n");
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].breach_type == BreachType::Disc);
    CHECK(r.events[0].org_sector == Sector::Financial);
    REQUIRE(r.warnings.size() == 4);
    CHECK(r.warnings[0].line == 2);
    CHECK(r.warnings[0].reason == "unparseable ids");
    CHECK(r.warnings[1].reason == "unparseable event_date");
    CHECK(r.warnings[2].reason == "negative ids");
    CHECK(r.warnings[3].reason == "too few fields");
}

TEST_CASE("unknown sector and type map to other and NA")
{
    auto r = parse("2010-01-01,retail,PHYS,10,,\n");
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].org_sector == Sector::Other);
    CHECK(r.events[0].breach_type == BreachType::Na);
}

TEST_CASE("future dates are rejected")
{
    auto r = parse("2030-01-01,web,HACK,10,,\n");
    CHECK(r.events.empty());
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].reason == "event_date out of range");
}

TEST_CASE("missing mandatory column is a schema error")
{
    std::istringstream in("event_date,org_sector,ids\n2010-01-01,web,5\n");
    CHECK_THROWS_AS(parse_events(in, Schema::canonical(), kToday), SchemaError);
    CHECK_THROWS_AS(read_events_file("/nonexistent/events.csv"), IoError);
}

TEST_CASE("threshold is inclusive")
{
    std::vector<EventRecord> e{ev(2010, 1, 1, 9999), ev(2010, 1, 2, 10000), ev(2010, 1, 3, 10001)};
    auto kept = filter_events(e, wide(10000));
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].ids == 10000u);
    CHECK(kept[1].ids == 10001u);
}

TEST_CASE("empty type set keeps nothing and filtering is idempotent")
{
    std::vector<EventRecord> e{ev(2010, 1, 1, 5), ev(2011, 1, 1, 50, BreachType::Disc)};
    auto f = wide();
    f.types = TypeSet::none();
    CHECK(filter_events(e, f).empty());
    auto g = wide(10);
    g.types = TypeSet{BreachType::Disc};
    auto once = filter_events(e, g);
    auto twice = filter_events(once, g);
    CHECK(once.size() == 1);
    CHECK(twice.size() == once.size());
    CHECK(twice[0].ids == once[0].ids);
}

TEST_CASE("size-unknown events are excluded unless asked for")
{
    std::vector<EventRecord> e{ev(2010, 1, 1, 0), ev(2010, 1, 2, 7)};
    auto f = wide();
    CHECK(filter_events(e, f).size() == 1);
    f.include_size_unknown = true;
    CHECK(filter_events(e, f).size() == 2);
}

TEST_CASE("half-year bin boundaries")
{
    std::vector<EventRecord> e{ev(2005, 6, 30, 10), ev(2005, 7, 1, 10)};
    auto f = wide();
    f.date_range = {Date::from_ymd(2005, 1, 1), Date::from_ymd(2006, 1, 1)};
    auto b = bin_counts(e, f);
    REQUIRE(b.bins() == 2);
    CHECK(b.counts == std::vector<std::uint64_t>{1, 1});
    CHECK(b.t_mid == std::vector<double>{0.25, 0.75});
    CHECK_FALSE(b.last_partial);
}

TEST_CASE("bin counts match direct date comparison")
{
    breachcat::Rng rng(11);
    std::vector<EventRecord> e;
    const long start = Date::from_ymd(2005, 1, 1).days();
    for (int i = 0; i < 100; ++i) {
        EventRecord r;
        r.event_date = Date::from_days(start + static_cast<long>(rng.below(365)));
        r.ids = 100;
        e.push_back(r);
    }
    auto f = wide();
    f.date_range = {Date::from_ymd(2005, 1, 1), Date::from_ymd(2006, 1, 1)};
    auto b = bin_counts(e, f);
    const auto h1 = std::count_if(e.begin(), e.end(), [](const auto& r) { return r.event_date < Date::from_ymd(2005, 7, 1); });
    REQUIRE(b.bins() == 2);
    CHECK(b.counts[0] == static_cast<std::uint64_t>(h1));
    CHECK(b.counts[0] + b.counts[1] == 100u);
    CHECK(b.total() == filter_events(e, f).size());
}

TEST_CASE("partial final bin is flagged and can be dropped")
{
    std::vector<EventRecord> e{ev(2005, 3, 1, 10), ev(2005, 8, 1, 10), ev(2006, 2, 1, 10)};
    auto f = wide();
    f.date_range = {Date::from_ymd(2005, 1, 1), Date::from_ymd(2006, 4, 1)};
    auto b = bin_counts(e, f);
    REQUIRE(b.bins() == 3);
    CHECK(b.last_partial);
    CHECK_FALSE(b.first_partial);
    CHECK(b.bin_edges.back() == Date::from_ymd(2006, 7, 1));
    auto full = b.full_bins_only();
    CHECK(full.bins() == 2);
    CHECK(full.total() == 2u);
}

TEST_CASE("sector quantiles use the inverted-cdf convention")
{
    std::vector<EventRecord> e{ev(2010, 1, 1, 1, BreachType::Hack, Sector::Medical),
                               ev(2010, 2, 1, 2, BreachType::Hack, Sector::Medical),
                               ev(2010, 3, 1, 3, BreachType::Hack, Sector::Medical),
                               ev(2010, 4, 1, 4, BreachType::Hack, Sector::Medical),
                               ev(2010, 5, 1, 9, BreachType::Disc, Sector::Web)};
    const std::vector<double> probs{0.5, 0.9};
    const DateRange period{Date::from_ymd(2010, 1, 1), Date::from_ymd(2012, 1, 1)};
    auto t = sector_quantiles(e, 1, probs, period);
    REQUIRE(t.rows.size() == 2);
    const auto& med = *std::find_if(t.rows.begin(), t.rows.end(), [](auto& r) { return r.sector == Sector::Medical; });
    CHECK(med.quantiles[0] == 2.0);
    CHECK(med.quantiles[1] == 4.0);
    CHECK(med.annual_frequency == Catch::Approx(4.0 / period.length_years()));
    const auto& web = *std::find_if(t.rows.begin(), t.rows.end(), [](auto& r) { return r.sector == Sector::Web; });
    CHECK(web.quantiles == std::vector<double>{9.0, 9.0});
    CHECK_FALSE(t.notes.empty());
}

TEST_CASE("sector by type totals and margins")
{
    std::vector<EventRecord> e{ev(2010, 1, 1, 100, BreachType::Hack, Sector::Web),
                               ev(2010, 1, 2, 250, BreachType::Hack, Sector::Web),
                               ev(2010, 1, 3, 40, BreachType::Na, Sector::Medical)};
    auto t = totals_by_sector_type(e);
    CHECK(t.cell(Sector::Web, BreachType::Hack) == 350u);
    CHECK(t.cell(Sector::Medical, BreachType::Na) == 40u);
    CHECK(t.type_total(BreachType::Hack) == 350u);
    CHECK(t.sector_total(Sector::Web) == 350u);
    CHECK(t.grand_total() == 390u);
    std::uint64_t sum = 0;
    for (auto ty : kAllTypes) sum += t.type_total(ty);
    CHECK(sum == t.grand_total());
    CHECK(totals_by_sector_type({}).grand_total() == 0u);
}

TEST_CASE("histogram bins and overflow")
{
    std::vector<EventRecord> one{ev(2010, 1, 1, 500)};
    auto h1 = histogram_export(one, 1000.0, 10);
    CHECK(std::count_if(h1.bins.begin(), h1.bins.end(), [](auto& b) { return b.count > 0; }) == 1);

    breachcat::Rng rng(5);
    std::vector<EventRecord> e;
    const int n = 10000;
    for (int i = 0; i < n; ++i) e.push_back(ev(2010, 1, 1, 1 + rng.below(1000)));
    e.push_back(ev(2010, 1, 1, 5000));
    auto h = histogram_export(e, 1000.0, 10);
    CHECK(h.overflow == 1u);
    const double p = 0.1, sd = std::sqrt(n * p * (1 - p));
    for (const auto& b : h.bins) CHECK(std::fabs(static_cast<double>(b.count) - n * p) < 3.5 * sd);
}

TEST_CASE("chronology is date-sorted and filtered")
{
    std::vector<EventRecord> e{ev(2014, 1, 1, 3e7), ev(2009, 1, 1, 4e7), ev(2012, 1, 1, 10),
                               ev(2016, 1, 1, 5e7), ev(2005, 1, 1, 2.6e7)};
    auto f = wide(25000000);
    auto c = chronology_export(e, f);
    REQUIRE(c.size() == 4);
    CHECK(std::is_sorted(c.begin(), c.end(), [](auto& a, auto& b) { return a.event_date < b.event_date; }));
    f.types = TypeSet::none();
    CHECK(chronology_export(e, f).empty());
}

TEST_CASE("synthetic corpus parses cleanly")
{
    std::istringstream in(testing::synthetic_events_csv(3, 200));
    auto r = parse_events(in, Schema::canonical(), kToday);
    CHECK(r.events.size() == 200);
    CHECK(r.warnings.empty());
}
