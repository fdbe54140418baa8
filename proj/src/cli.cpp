#include "breachcat/cli.hpp"

#include "breachcat/aggregate.hpp"
#include "breachcat/cost.hpp"
#include "breachcat/delay.hpp"
#include "breachcat/errors.hpp"
#include "breachcat/events.hpp"
#include "breachcat/freq.hpp"
#include "breachcat/presets.hpp"
#include "breachcat/report.hpp"
#include "breachcat/tail.hpp"
#include "breachcat/trend.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

namespace breachcat {

namespace {

using report::json;
namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string events;
    std::string delays;
    std::string types;
    std::string sectors;
    std::vector<double> u;
    std::optional<double> m;
    std::string since;
    std::string until;
    std::optional<double> tau;
    std::string seed = "42";
    std::string threads = "1";
    std::string out;
    std::string preset;

    // command specific
    std::string family;
    std::string window = "50";
    std::string bootstrap = "1000";
    std::vector<double> probs;
    double u_max = 1e6;
    std::string bins = "50";
    bool include_partial = false;
    std::string period_start, period_end, observed_at;
    double bandwidth = kDefaultBandwidthDays;
    std::string n_inner, n_outer;
    bool fast = false;
    std::string horizon;
    std::string compare;
    std::optional<double> alpha;
    std::string severity_n;
    std::string model = "flat_moderate";
    std::optional<double> unit_cost, exponent, anchor_size, anchor_cost, band_low, band_high;
    std::vector<double> sizes;
    std::optional<double> breach_prob, firms, mean_size;
};

// Integer flag values; accepts plain integers and integral scientific literals.
std::uint64_t parse_count(const std::string& s, std::string_view flag)
{
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && p == s.data() + s.size()) return v;
    double d = 0.0;
    auto [q, ec2] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec2 == std::errc{} && q == s.data() + s.size() && std::isfinite(d) && d >= 0.0 && d == std::floor(d) &&
        d <= 9007199254740992.0)
        return static_cast<std::uint64_t>(d);
    throw UsageError("invalid integer for " + std::string(flag) + ": " + s);
}

Date parse_date_flag(const std::string& s, std::string_view flag)
{
    if (auto d = Date::parse(s)) return *d;
    throw InputError("invalid date for " + std::string(flag) + ": " + s + " (expected YYYY-MM-DD)");
}

TypeSet parse_types(const std::string& list)
{
    if (list.empty()) return TypeSet::all();
    TypeSet out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = breach_type_from_string(item);
        if (!t) throw InputError("unknown breach type: " + item);
        out.insert(*t);
    }
    return out;
}

SectorSet parse_sectors(const std::string& list)
{
    if (list.empty()) return SectorSet::all();
    SectorSet out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto s = sector_from_string(item);
        if (!s) throw InputError("unknown sector: " + item);
        out.insert(*s);
    }
    return out;
}

// Accepts 2018H2, 2018-H2, 2018h2.
std::pair<double, double> parse_horizon(const std::string& s)
{
    std::string t;
    for (char c : s)
        if (c != '-') t.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    int year = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), year);
    const std::string_view rest(p, static_cast<std::size_t>(t.data() + t.size() - p));
    if (ec != std::errc{} || (rest != "H1" && rest != "H2"))
        throw InputError("invalid horizon: " + s + " (expected YYYY-H1 or YYYY-H2)");
    const double start = (year - 2005) + (rest == "H2" ? 0.5 : 0.0);
    return {start, start + 0.5};
}

Date model_time_to_date(double t)
{
    const long k = std::lround(t * 2.0);
    const long year = 2005 + (k >= 0 ? k / 2 : -((-k + 1) / 2));
    const unsigned month = ((k % 2) + 2) % 2 == 0 ? 1 : 7;
    return Date::from_ymd(static_cast<int>(year), month, 1);
}

std::string timestamp_utc()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream o;
    o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return o.str();
}

class Run {
public:
    Run(std::string command, Options& o, std::vector<std::string> args, std::ostream& out, std::ostream& err)
        : command_(std::move(command)), o_(o), args_(std::move(args)), out_(out), err_(err)
    {
        if (!o_.out.empty()) out_dir_ = o_.out;
        else if (const char* env = std::getenv("BREACHCAT_OUT"); env && *env) out_dir_ = env;
        else out_dir_ = "out";
        seed_ = parse_count(o_.seed, "--seed");
        threads_ = static_cast<unsigned>(std::max<std::uint64_t>(1, parse_count(o_.threads, "--threads")));
    }

    Options& opts() { return o_; }
    std::uint64_t seed() const { return seed_; }
    unsigned threads() const { return threads_; }

    const std::vector<EventRecord>& events()
    {
        if (events_) return *events_;
        if (o_.events.empty()) throw UsageError(command_ + " requires --events");
        auto parsed = read_events_file(o_.events);
        inputs_.push_back({"events", o_.events, sha256_file(o_.events)});
        parse_warnings_ = std::move(parsed.warnings);
        if (!parse_warnings_.empty())
            err_ << "warning: " << parse_warnings_.size() << " malformed event rows skipped\n";
        events_ = std::move(parsed.events);
        return *events_;
    }

    const std::vector<DelayRecord>& delays()
    {
        if (delays_) return *delays_;
        if (o_.delays.empty()) throw UsageError(command_ + " requires --delays");
        auto parsed = read_delays_file(o_.delays);
        inputs_.push_back({"delays", o_.delays, sha256_file(o_.delays)});
        delay_warnings_ = std::move(parsed.warnings);
        if (!delay_warnings_.empty())
            err_ << "warning: " << delay_warnings_.size() << " malformed delay rows skipped\n";
        delays_ = std::move(parsed.records);
        return *delays_;
    }

    // Date range from --since/--until, falling back to the given defaults
    // or to the span of the loaded events.
    DateRange range(std::optional<Date> def_start = std::nullopt, std::optional<Date> def_end = std::nullopt)
    {
        std::optional<Date> start = o_.since.empty() ? def_start : parse_date_flag(o_.since, "--since");
        std::optional<Date> end = o_.until.empty() ? def_end : parse_date_flag(o_.until, "--until");
        if (!start || !end) {
            const auto& ev = events();
            if (ev.empty()) {
                if (!start) start = Date::from_ymd(1990, 1, 1);
                if (!end) end = Date::from_ymd(2100, 1, 1);
            } else {
                auto [lo, hi] = std::minmax_element(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
                    return a.event_date < b.event_date;
                });
                if (!start) start = lo->event_date;
                if (!end) end = hi->event_date.add_days(1);
            }
        }
        if (!(*start < *end)) throw InputError("--since must be before --until");
        return {*start, *end};
    }

    EventFilter filter(double u, std::optional<TypeSet> default_types = std::nullopt,
                       std::optional<DateRange> date_range = std::nullopt)
    {
        EventFilter f;
        if (!(u >= 1.0) || u != std::floor(u)) throw InputError("--u must be an integer >= 1");
        f.min_ids = static_cast<std::uint64_t>(u);
        f.types = o_.types.empty() && default_types ? *default_types : parse_types(o_.types);
        f.sectors = parse_sectors(o_.sectors);
        f.date_range = date_range ? *date_range : range();
        f.validate();
        return f;
    }

    json manifest_core() const
    {
        json inputs = json::array();
        for (const auto& in : inputs_) inputs.push_back({{"role", in.role}, {"path", in.path}, {"sha256", in.digest}});
        return {{"command", command_}, {"version", report::kVersion}, {"seed", seed_}, {"args", args_},
                {"inputs", inputs}};
    }

    // Result document with embedded manifest and meta block.
    json document(const EventFilter* f = nullptr) const
    {
        json j = {{"manifest", manifest_core()}, {"meta", report::meta(f)}};
        if (events_) {
            json w = json::array();
            for (std::size_t i = 0; i < parse_warnings_.size() && i < 100; ++i) w.push_back(report::to_json(parse_warnings_[i]));
            j["input_warnings"] = {{"count", parse_warnings_.size()}, {"first", w}};
        }
        if (delays_) {
            json w = json::array();
            for (std::size_t i = 0; i < delay_warnings_.size() && i < 100; ++i) w.push_back(report::to_json(delay_warnings_[i]));
            j["delay_warnings"] = {{"count", delay_warnings_.size()}, {"first", w}};
        }
        return j;
    }

    void write(const std::string& name, const std::string& content)
    {
        fs::create_directories(out_dir_);
        const auto path = out_dir_ / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw IoError("cannot write " + path.string());
        f << content;
        if (!f) throw IoError("failed writing " + path.string());
        written_.push_back(path.string());
        out_ << path.string() << '\n';
    }

    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    void finish()
    {
        json m = manifest_core();
        m["timestamp"] = timestamp_utc();
        m["threads"] = threads_;
        m["outputs"] = written_;
        write_json("manifest.json", m);
    }

private:
    struct Input {
        std::string role, path, digest;
    };

    std::string command_;
    Options& o_;
    std::vector<std::string> args_;
    std::ostream& out_;
    std::ostream& err_;
    fs::path out_dir_;
    std::uint64_t seed_ = 42;
    unsigned threads_ = 1;
    std::optional<std::vector<EventRecord>> events_;
    std::vector<RowWarning> parse_warnings_;
    std::optional<std::vector<DelayRecord>> delays_;
    std::vector<RowWarning> delay_warnings_;
    std::vector<Input> inputs_;
    std::vector<std::string> written_;
};

void require_preset(const Options& o, std::initializer_list<std::string_view> allowed, std::string_view cmd)
{
    if (o.preset.empty()) return;
    for (auto a : allowed)
        if (o.preset == a) return;
    throw UsageError("preset '" + o.preset + "' does not apply to " + std::string(cmd));
}

std::vector<double> sizes_of(std::span<const EventRecord> ev)
{
    std::vector<double> xs;
    xs.reserve(ev.size());
    for (const auto& e : ev) xs.push_back(static_cast<double>(e.ids));
    return xs;
}

// ---- summary -----------------------------------------------------------------

void cmd_summary(Run& run)
{
    auto& o = run.opts();
    require_preset(o, {}, "summary");
    const double u = o.u.empty() ? 1e4 : o.u.front();
    const auto period = run.range();
    EventFilter all = run.filter(1.0, std::nullopt, period);
    const auto kept = filter_events(run.events(), all);
    std::vector<double> probs = o.probs.empty() ? std::vector<double>{0.25, 0.5, 0.75, 0.9, 0.99} : o.probs;
    const auto sq = sector_quantiles(kept, static_cast<std::uint64_t>(u), probs, period);
    const auto totals = totals_by_sector_type(kept);
    const auto hist = histogram_export(kept, o.u_max, parse_count(o.bins, "--bins"));

    json doc = run.document(&all);
    doc["n_events"] = kept.size();
    doc["sector_quantiles"] = report::to_json(sq);
    doc["sector_type_totals"] = report::to_json(totals);
    doc["histogram"] = report::to_json(hist);
    run.write_json("summary.json", doc);

    std::ostringstream q;
    q << "sector,n,annual_frequency";
    for (double p : probs) q << ",q" << report::fmt(p);
    q << '\n';
    for (const auto& r : sq.rows) {
        q << to_string(r.sector) << ',' << r.n << ',' << report::fmt(r.annual_frequency);
        for (double v : r.quantiles) q << ',' << report::fmt(v);
        q << '\n';
    }
    run.write("sector_quantiles.csv", q.str());

    std::ostringstream t;
    t << "sector";
    for (auto ty : kAllTypes) t << ',' << to_string(ty);
    t << ",total\n";
    for (auto s : kAllSectors) {
        t << to_string(s);
        for (auto ty : kAllTypes) t << ',' << totals.cell(s, ty);
        t << ',' << totals.sector_total(s) << '\n';
    }
    t << "total";
    for (auto ty : kAllTypes) t << ',' << totals.type_total(ty);
    t << ',' << totals.grand_total() << '\n';
    run.write("sector_type_totals.csv", t.str());

    std::ostringstream h;
    h << "lo,hi,count\n";
    for (const auto& b : hist.bins) h << report::fmt(b.lo) << ',' << report::fmt(b.hi) << ',' << b.count << '\n';
    h << report::fmt(o.u_max) << ",inf," << hist.overflow << '\n';
    run.write("histogram.csv", h.str());
}

// ---- fit-tail ----------------------------------------------------------------

void write_survival(Run& run, const std::vector<std::pair<std::string, std::vector<double>>>& groups, double u)
{
    std::ostringstream s;
    s << "group,x,ccdf\n";
    for (const auto& [name, xs] : groups) {
        if (xs.empty()) continue;
        for (const auto& p : survival_export(xs, u))
            s << name << ',' << report::fmt(p.x) << ',' << report::fmt(p.ccdf) << '\n';
    }
    run.write("survival.csv", s.str());
}

void cmd_fit_tail(Run& run)
{
    auto& o = run.opts();
    require_preset(o, {"table4", "figure6"}, "fit-tail");
    const bool table4 = o.preset == "table4", figure6 = o.preset == "figure6";
    std::vector<double> us = o.u;
    if (us.empty()) {
        if (table4) us.assign(presets::kTailThresholds.begin(), presets::kTailThresholds.end());
        else if (figure6) us = {1e5};
        else throw UsageError("fit-tail requires --u");
    }
    std::optional<double> m = o.m;
    if (!m && (table4 || figure6)) m = presets::kTailMax;
    std::string family = o.family.empty() ? "all" : o.family;
    const bool want_all = family == "all";
    if (!want_all && !tail_family_from_string(family))
        throw UsageError("--family must be pareto, trunc_pareto, trunc_lognormal or all");
    auto want = [&](TailFamily f) { return want_all || family == to_string(f); };

    const std::optional<TypeSet> def_types =
        (table4 || figure6) ? std::optional<TypeSet>(TypeSet{BreachType::Hack}) : std::nullopt;
    std::optional<Date> def_since;
    if (table4 || figure6) def_since = presets::tail_since();
    const auto period = run.range(def_since);

    json doc;
    json rows = json::array();
    std::vector<report::TailRow> table;
    std::vector<double> first_sample;
    EventFilter f0;
    for (std::size_t i = 0; i < us.size(); ++i) {
        EventFilter f = run.filter(us[i], def_types, period);
        if (i == 0) f0 = f;
        const auto xs = sizes_of(filter_events(run.events(), f));
        if (i == 0) first_sample = xs;
        report::TailRow row;
        row.u = us[i];
        row.n = xs.size();
        json fits = json::object();
        // With --family all a family without an interior maximum is reported, not fatal.
        auto attempt = [&](TailFamily fam, std::optional<TailFit>& slot, auto&& fit) {
            if (!want(fam)) return;
            try {
                slot = fit();
                fits[std::string(to_string(fam))] = report::to_json(*slot);
            } catch (const NumericalError& e) {
                if (!want_all) throw;
                fits[std::string(to_string(fam))] = {{"error", e.what()}};
            }
        };
        attempt(TailFamily::Pareto, row.pareto, [&] { return fit_pareto(xs, us[i]); });
        attempt(TailFamily::TruncPareto, row.trunc_pareto, [&] {
            const double mm = m ? *m : (xs.empty() ? us[i] : *std::max_element(xs.begin(), xs.end()));
            return fit_truncated_pareto(xs, us[i], mm);
        });
        attempt(TailFamily::TruncLognormal, row.trunc_lognormal, [&] { return fit_truncated_lognormal(xs, us[i]); });
        json r = {{"u", report::num(us[i])}, {"n", xs.size()}, {"fits", fits}};
        if (row.pareto && row.trunc_pareto)
            r["lr_trunc_pareto_vs_pareto"] = report::to_json(lr_test(*row.pareto, *row.trunc_pareto, 1));
        rows.push_back(r);
        table.push_back(std::move(row));
    }
    doc = run.document(&f0);
    if (!o.m && want(TailFamily::TruncPareto) && !table4 && !figure6)
        doc["notes"] = {"upper truncation m set to the largest observed size"};
    doc["rows"] = rows;
    run.write_json("fit_tail.json", doc);
    run.write("fit_tail.csv", report::tail_table_csv(table));

    if (figure6) {
        // Survival curves per type over all time; HACK split pre-2010 / post-2014.
        std::vector<std::pair<std::string, std::vector<double>>> groups;
        const DateRange all_time{Date::from_ymd(1990, 1, 1), Date::from_ymd(2100, 1, 1)};
        for (auto ty : {BreachType::Disc, BreachType::Insd, BreachType::Hw}) {
            EventFilter f;
            f.types = TypeSet{ty};
            f.date_range = all_time;
            groups.push_back({std::string(to_string(ty)), sizes_of(filter_events(run.events(), f))});
        }
        EventFilter pre;
        pre.types = TypeSet{BreachType::Hack};
        pre.date_range = {all_time.start, Date::from_ymd(2010, 1, 1)};
        groups.push_back({"HACK_pre2010", sizes_of(filter_events(run.events(), pre))});
        EventFilter post = pre;
        post.date_range = {presets::tail_since(), all_time.end};
        groups.push_back({"HACK_post2014", sizes_of(filter_events(run.events(), post))});
        write_survival(run, groups, 1.0);
    } else {
        write_survival(run, {{"sample", first_sample}}, us.front());
    }
}

// ---- rolling-alpha -----------------------------------------------------------

void cmd_rolling_alpha(Run& run)
{
    auto& o = run.opts();
    require_preset(o, {"figure6"}, "rolling-alpha");
    const bool fig = o.preset == "figure6";
    const double u = !o.u.empty() ? o.u.front() : (fig ? presets::kRollingU : 0.0);
    if (u <= 0.0) throw UsageError("rolling-alpha requires --u");
    const std::size_t window = parse_count(o.window, "--window");
    const auto def_types = fig ? std::optional<TypeSet>(TypeSet{BreachType::Hack}) : std::nullopt;
    const auto period = run.range(fig ? std::optional<Date>(presets::study_start()) : std::nullopt,
                                  fig ? std::optional<Date>(Date::from_ymd(2018, 1, 1)) : std::nullopt);
    EventFilter f = run.filter(u, def_types, period);
    auto kept = filter_events(run.events(), f);
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.event_date < b.event_date; });
    std::vector<DatedSeverity> ds;
    for (const auto& e : kept) ds.push_back({e.event_date, static_cast<double>(e.ids)});
    const auto ra = rolling_alpha(ds, u, window);

    json doc = run.document(&f);
    doc["u"] = report::num(u);
    doc["window"] = window;
    doc["rolling_alpha"] = report::to_json(ra);
    run.write_json("rolling_alpha.json", doc);
    std::ostringstream s;
    s << "window_end,alpha,se\n";
    for (const auto& p : ra.points) s << p.window_end.iso() << ',' << report::fmt(p.alpha) << ',' << report::fmt(p.se) << '\n';
    run.write("rolling_alpha.csv", s.str());
}

// ---- fit-freq ----------------------------------------------------------------

void cmd_fit_freq(Run& run)
{
    auto& o = run.opts();
    require_preset(o, {"table3", "figure4"}, "fit-freq");
    const bool table3 = o.preset == "table3", figure4 = o.preset == "figure4";
    const bool pre = table3 || figure4;
    std::vector<double> us = o.u;
    if (us.empty()) {
        if (table3) us.assign(presets::kFreqThresholds.begin(), presets::kFreqThresholds.end());
        else if (figure4) us = {1e4, 1e6};
        else throw UsageError("fit-freq requires --u");
    }
    std::vector<MeanFamily> families;
    const std::string fam = o.family.empty() ? "exp_mean" : o.family;
    if (fam == "exp_mean" || fam == "both") families.push_back(MeanFamily::ExpMean);
    if (fam == "lin_mean" || fam == "both") families.push_back(MeanFamily::LinMean);
    if (families.empty()) throw UsageError("--family must be exp_mean, lin_mean or both");

    const auto def_types = pre ? std::optional<TypeSet>(TypeSet{BreachType::Hack}) : std::nullopt;
    const auto period = run.range(presets::study_start(), pre ? std::optional<Date>(presets::study_end()) : std::nullopt);
    FreqFitOptions fo;
    fo.include_partial = o.include_partial;

    json rows = json::array();
    std::vector<report::FreqRow> table;
    std::ostringstream bins;
    bins << "u,bin_start,bin_end,t,count,partial,mean_family,fitted,q25,q50,q75\n";
    std::optional<FreqFit> lo_fit, hi_fit;
    EventFilter f0;
    for (std::size_t i = 0; i < us.size(); ++i) {
        EventFilter f = run.filter(us[i], def_types, period);
        if (i == 0) f0 = f;
        const auto counts = bin_counts(run.events(), f);
        json fits = json::array();
        for (auto family : families) {
            report::FreqRow row;
            row.u = us[i];
            row.n_events = counts.total();
            row.fit = fit_nb(counts, family, fo);
            row.overdispersion = overdispersion_test(row.fit);
            row.gof = deviance_gof(row.fit);
            fits.push_back({{"fit", report::to_json(row.fit)},
                            {"beta1_p", report::num(slope_wald_p(row.fit))},
                            {"overdispersion", report::to_json(row.overdispersion)},
                            {"gof", report::to_json(row.gof)}});
            if (family == MeanFamily::ExpMean) {
                if (!lo_fit) lo_fit = row.fit;
                hi_fit = row.fit;
            }
            for (std::size_t b = 0; b < counts.bins(); ++b) {
                const bool partial = (b == 0 && counts.first_partial) || (b + 1 == counts.bins() && counts.last_partial);
                const auto q = nb_quartiles(row.fit, counts.t_mid[b]);
                bins << report::fmt(us[i]) << ',' << counts.bin_edges[b].iso() << ',' << counts.bin_edges[b + 1].iso()
                     << ',' << report::fmt(counts.t_mid[b]) << ',' << counts.counts[b] << ',' << (partial ? 1 : 0) << ','
                     << to_string(family) << ',' << report::fmt(row.fit.mean_at(counts.t_mid[b])) << ',' << q.q25
                     << ',' << q.q50 << ',' << q.q75 << '\n';
            }
            table.push_back(std::move(row));
        }
        json edges = json::array();
        for (auto d : counts.bin_edges) edges.push_back(d.iso());
        rows.push_back({{"u", report::num(us[i])},
                        {"n_events", counts.total()},
                        {"bins", {{"edges", edges}, {"counts", counts.counts}, {"t_mid", counts.t_mid},
                                  {"first_partial", counts.first_partial}, {"last_partial", counts.last_partial}}},
                        {"fits", fits}});
    }
    json doc = run.document(&f0);
    doc["include_partial"] = fo.include_partial;
    doc["rows"] = rows;
    if (lo_fit && hi_fit && us.size() > 1)
        doc["growth_test"] = {{"u_high", report::num(us.back())}, {"u_low", report::num(us.front())},
                              {"test", report::to_json(growth_z_test(*hi_fit, *lo_fit))}};
    run.write_json("fit_freq.json", doc);
    run.write("fit_freq.csv", report::freq_table_csv(table));
    run.write("bins.csv", bins.str());
}

// ---- trend -------------------------------------------------------------------

void cmd_trend(Run& run)
{
    auto& o = run.opts();
    require_preset(o, {"figure5"}, "trend");
    const bool fig = o.preset == "figure5";
    const double u = !o.u.empty() ? o.u.front() : (fig ? presets::kTrendU : 1.0);
    const double tau = o.tau ? *o.tau : presets::kTrendTau;
    const std::size_t B = parse_count(o.bootstrap, "--bootstrap");
    const auto period = run.range(fig ? std::optional<Date>(presets::study_start()) : std::nullopt,
                                  fig ? std::optional<Date>(presets::study_end()) : std::nullopt);
    const TypeSet types =
        o.types.empty() ? TypeSet{BreachType::Hack, BreachType::Disc, BreachType::Insd, BreachType::Hw}
                        : parse_types(o.types);
    EventFilter f = run.filter(u, types, period);

    json rows = json::array();
    std::ostringstream csv, lines;
    csv << "type,n,tau,a,b,p_slope,boot_mean,boot_sd\n";
    lines << "type,t,fitted_ids\n";
    for (auto ty : kAllTypes) {
        if (!types.contains(ty)) continue;
        EventFilter ft = f;
        ft.types = TypeSet{ty};
        std::vector<TrendPoint> pts;
        for (const auto& e : filter_events(run.events(), ft)) pts.push_back({model_years(e.event_date), static_cast<double>(e.ids)});
        json r = {{"type", std::string(to_string(ty))}, {"n", pts.size()}};
        if (pts.size() < 10) {
            r["skipped"] = "fewer than 10 events";
            rows.push_back(r);
            continue;
        }
        auto fit = quantile_fit(pts, tau);
        const auto st = slope_test(pts, tau, B, derive_seed(run.seed(), 0x74726e64, static_cast<std::uint64_t>(ty)),
                                   run.threads());
        fit.p_slope = st.p_value;
        r["fit"] = report::to_json(fit);
        r["slope_test"] = report::to_json(st);
        rows.push_back(r);
        csv << to_string(ty) << ',' << pts.size() << ',' << report::fmt(tau) << ',' << report::fmt(fit.a) << ','
            << report::fmt(fit.b) << ',' << report::fmt(st.p_value) << ',' << report::fmt(st.boot_mean) << ','
            << report::fmt(st.boot_sd) << '\n';
        auto [lo, hi] = std::minmax_element(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.t < b.t; });
        for (double t : {lo->t, hi->t})
            lines << to_string(ty) << ',' << report::fmt(t) << ',' << report::fmt(std::exp(fit.a + fit.b * t)) << '\n';
    }
    json doc = run.document(&f);
    doc["tau"] = report::num(tau);
    doc["bootstrap_replicates"] = B;
    doc["rows"] = rows;
    run.write_json("trend.json", doc);
    run.write("trend.csv", csv.str());
    run.write("trend_lines.csv", lines.str());
}

// ---- delay -------------------------------------------------------------------

void cmd_delay(Run& run)
{
    auto& o = run.opts();
    require_preset(o, {}, "delay");
    const auto& recs = run.delays();
    std::optional<DateRange> window;
    if (!o.since.empty() || !o.until.empty()) {
        window = DateRange{o.since.empty() ? Date::from_ymd(1990, 1, 1) : parse_date_flag(o.since, "--since"),
                           o.until.empty() ? Date::from_ymd(2100, 1, 1) : parse_date_flag(o.until, "--until")};
    }
    const auto dist = DelayDistribution::from_records(recs, window);
    std::vector<double> probs = o.probs.empty() ? std::vector<double>{0.25, 0.5, 0.75, 0.9} : o.probs;
    const auto q = delay_quantiles(dist, probs);

    json doc = run.document();
    doc["source_window"] = {{"start", dist.source_window().start.iso()}, {"end", dist.source_window().end.iso()}};
    doc["quantiles"] = report::to_json(q);
    if (!o.period_start.empty() || !o.period_end.empty() || !o.observed_at.empty()) {
        if (o.period_start.empty() || o.period_end.empty() || o.observed_at.empty())
            throw UsageError("completeness needs --period-start, --period-end and --observed-at");
        const DateRange period{parse_date_flag(o.period_start, "--period-start"),
                               parse_date_flag(o.period_end, "--period-end")};
        doc["completeness"] =
            report::to_json(completeness_factor(dist, period, parse_date_flag(o.observed_at, "--observed-at")));
    }
    std::vector<SizeDelayPoint> sd;
    std::vector<DelayRecord> in_window;
    for (const auto& r : recs) {
        if (window && !window->contains(r.submit_date)) continue;
        in_window.push_back(r);
        if (r.ids) sd.push_back({static_cast<double>(*r.ids), static_cast<double>(r.submit_date - r.event_date)});
    }
    if (sd.size() >= 3) doc["size_delay"] = report::to_json(size_delay_slope(sd));
    doc["bandwidth_days"] = report::num(o.bandwidth);
    run.write_json("delay.json", doc);

    std::ostringstream s;
    s << "date,density\n";
    for (const auto& p : submission_intensity(in_window, o.bandwidth)) s << p.date.iso() << ',' << report::fmt(p.density) << '\n';
    run.write("intensity.csv", s.str());
}

// ---- forecast ----------------------------------------------------------------

ForecastConfig forecast_preset(const std::string& name, std::uint64_t seed)
{
    if (name == "table5") return presets::table5(seed);
    if (name == "table6") return presets::table6(seed);
    throw UsageError("preset '" + name + "' does not apply to forecast");
}

void apply_overrides(ForecastConfig& c, const Options& o, unsigned threads)
{
    if (!o.n_inner.empty()) c.n_inner = parse_count(o.n_inner, "--n-inner");
    if (!o.n_outer.empty()) c.n_outer = parse_count(o.n_outer, "--n-outer");
    if (!o.severity_n.empty()) c.severity_n = parse_count(o.severity_n, "--severity-n");
    if (o.fast) c.bootstrap = ParameterBootstrap::Asymptotic;
    c.threads = threads;
}

void cmd_forecast(Run& run)
{
    auto& o = run.opts();
    ForecastConfig cfg;
    if (!o.preset.empty()) {
        cfg = forecast_preset(o.preset, run.seed());
        if (o.alpha) cfg.severity.alpha = *o.alpha;
        if (o.m) cfg.severity.m = *o.m;
    } else {
        // Fit both mean models to the event data and combine them with equal weight.
        if (!o.alpha) throw UsageError("forecast without --preset requires --alpha");
        if (o.horizon.empty()) throw UsageError("forecast without --preset requires --horizon");
        const double u = o.u.empty() ? 1e4 : o.u.front();
        const double m = o.m ? *o.m : 1e10;
        EventFilter f = run.filter(u, TypeSet{BreachType::Hack}, run.range(presets::study_start()));
        const auto counts = bin_counts(run.events(), f);
        FreqFitOptions fo;
        fo.include_partial = o.include_partial;
        cfg.freq_models.push_back({fit_nb(counts, MeanFamily::ExpMean, fo), 0.5});
        try {
            cfg.freq_models.push_back({fit_nb(counts, MeanFamily::LinMean, fo), 0.5});
        } catch (const NumericalError& e) {
            cfg.freq_models.front().weight = 1.0;
            cfg.notes.push_back(std::string("linear mean fit failed and was dropped: ") + e.what());
        }
        cfg.severity = TailModel::trunc_pareto(*o.alpha, u, m);
        cfg.seed = run.seed();
        cfg.notes.push_back("frequency fitted to the supplied events");
    }
    if (!o.horizon.empty()) std::tie(cfg.t_start, cfg.t_end) = parse_horizon(o.horizon);
    apply_overrides(cfg, o, run.threads());

    json doc = run.document();
    doc["config"] = report::to_json(cfg);
    if (o.compare.empty()) {
        const auto result = simulate_aggregate(cfg);
        doc["forecast"] = report::to_json(result);
        run.write("forecast.csv", report::forecast_csv(result.summary));
    } else {
        ForecastConfig past = forecast_preset(o.compare, run.seed());
        apply_overrides(past, o, run.threads());
        const auto cmp = forecast_table(cfg, past);
        doc["forecast"] = report::to_json(cmp.now);
        doc["compare"] = {{"config", report::to_json(past)}, {"forecast", report::to_json(cmp.past)}};
        json ratios = json::object();
        for (std::size_t r = 0; r < 3; ++r) ratios[report::fmt(kUncertaintyQuartiles[r])] = report::to_json(cmp.ratios[r]);
        doc["ratios"] = ratios;
        run.write("forecast.csv", report::forecast_csv(cmp.now.summary));
        run.write("forecast_past.csv", report::forecast_csv(cmp.past.summary));
        run.write("forecast_ratio.csv", report::forecast_ratio_csv(cmp.ratios));
    }
    if (!o.events.empty()) {
        const DateRange period{model_time_to_date(cfg.t_start), model_time_to_date(cfg.t_end)};
        const TypeSet types = o.types.empty() ? TypeSet{BreachType::Hack} : parse_types(o.types);
        std::optional<DelayDistribution> dist;
        if (!o.delays.empty()) {
            std::optional<DateRange> window;
            if (!o.since.empty() || !o.until.empty())
                window = DateRange{o.since.empty() ? Date::from_ymd(1990, 1, 1) : parse_date_flag(o.since, "--since"),
                                   o.until.empty() ? Date::from_ymd(2100, 1, 1) : parse_date_flag(o.until, "--until")};
            dist = DelayDistribution::from_records(run.delays(), window);
        }
        std::optional<Date> at;
        if (!o.observed_at.empty()) at = parse_date_flag(o.observed_at, "--observed-at");
        doc["realized"] = report::to_json(realized_check(run.events(), period,
                                                         static_cast<std::uint64_t>(cfg.severity.u), types,
                                                         dist ? &*dist : nullptr, at));
    }
    run.write_json("forecast.json", doc);
}

// ---- cost --------------------------------------------------------------------

void cmd_cost(Run& run)
{
    auto& o = run.opts();
    require_preset(o, {}, "cost");
    CostModel model = CostModel::defaults(cost_kind_from_string(o.model));
    if (o.unit_cost) model.unit_cost = *o.unit_cost;
    if (o.exponent) model.exponent = *o.exponent;
    if (o.anchor_size) model.anchor.size = *o.anchor_size;
    if (o.anchor_cost) model.anchor.cost = *o.anchor_cost;
    if (o.band_low) model.band_low = *o.band_low;
    if (o.band_high) model.band_high = *o.band_high;
    model.validate();

    json doc = run.document();
    doc["model"] = report::to_json(model);
    bool did = false;
    if (!o.sizes.empty()) {
        json costs = json::array();
        for (double s : o.sizes) {
            const auto c = event_cost(s, model);
            costs.push_back({{"size", report::num(s)}, {"low", report::num(c.low)}, {"high", report::num(c.high)},
                             {"warnings", c.warnings}});
        }
        doc["event_costs"] = costs;
        did = true;
    }
    if (o.breach_prob || o.firms || o.mean_size) {
        if (!o.breach_prob || !o.firms || !o.mean_size)
            throw UsageError("extrapolation needs --breach-prob, --firms and --mean-size");
        const double unit = o.unit_cost ? *o.unit_cost : 150.0;
        const double total = annual_cost_extrapolation(*o.breach_prob, *o.firms, *o.mean_size, unit);
        json e = {{"inputs",
                   {{"breach_prob", report::num(*o.breach_prob)}, {"n_firms", report::num(*o.firms)},
                    {"mean_size", report::num(*o.mean_size)}, {"unit_cost", report::num(unit)}}},
                  {"annual_cost", report::num(total)}};
        if (std::fabs(*o.breach_prob - 0.28) < 1e-12 && std::fabs(*o.firms - 109000) < 1e-9 &&
            std::fabs(*o.mean_size - 1e4) < 1e-9 && std::fabs(unit - 150.0) < 1e-12)
            e["quoted_figure"] = {{"value", 42e9},
                                  {"note", "the commonly quoted figure for these inputs is $42B; the product is reported unchanged"}};
        doc["extrapolation"] = e;
        did = true;
    }
    if (!o.events.empty()) {
        const double u = o.u.empty() ? 1e5 : o.u.front();
        const double unit = o.unit_cost ? *o.unit_cost : 5.0;
        EventFilter f = run.filter(u);
        const auto kept = filter_events(run.events(), f);
        doc["filter"] = report::to_json(f);
        doc["historical"] = report::to_json(historical_large_cost(kept, static_cast<std::uint64_t>(u), unit));
        doc["historical"]["unit_cost"] = report::num(unit);
        did = true;
    }
    if (!did) throw UsageError("cost needs --size, extrapolation inputs, or --events");
    run.write_json("cost.json", doc);
}

// ---- chronology --------------------------------------------------------------

void cmd_chronology(Run& run)
{
    auto& o = run.opts();
    require_preset(o, {}, "chronology");
    const double u = o.u.empty() ? 1.0 : o.u.front();
    EventFilter f = run.filter(u);
    const auto pts = chronology_export(run.events(), f);
    json doc = run.document(&f);
    json arr = json::array();
    std::ostringstream s;
    s << "event_date,ids,breach_type\n";
    for (const auto& p : pts) {
        arr.push_back({{"event_date", p.event_date.iso()}, {"ids", p.ids}, {"breach_type", std::string(to_string(p.breach_type))}});
        s << p.event_date.iso() << ',' << p.ids << ',' << to_string(p.breach_type) << '\n';
    }
    doc["events"] = arr;
    run.write_json("chronology.json", doc);
    run.write("chronology.csv", s.str());
}

// ---- option wiring -----------------------------------------------------------

void add_common(CLI::App* sc, Options& o)
{
    sc->add_option("--events", o.events, "Events CSV");
    sc->add_option("--delays", o.delays, "Delay CSV (event_date,submit_date[,ids])");
    sc->add_option("--type", o.types, "Breach types, comma separated (HACK,DISC,INSD,HW,NA)");
    sc->add_option("--sector", o.sectors, "Sectors, comma separated");
    sc->add_option("--u", o.u, "Severity threshold(s), comma separated")->delimiter(',');
    sc->add_option("--m", o.m, "Upper truncation");
    sc->add_option("--since", o.since, "Start date YYYY-MM-DD (inclusive)");
    sc->add_option("--until", o.until, "End date YYYY-MM-DD (exclusive)");
    sc->add_option("--tau", o.tau, "Quantile level");
    sc->add_option("--seed", o.seed, "Random seed");
    sc->add_option("--threads", o.threads, "Worker threads (results do not depend on it)");
    sc->add_option("--out", o.out, "Output directory (default $BREACHCAT_OUT or ./out)");
    sc->add_option("--preset", o.preset, "Published configuration");
}

std::vector<std::string> echo_args(int argc, const char* const* argv)
{
    // Everything except flags that only affect where or how fast results are produced.
    std::vector<std::string> out;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--threads" || a == "--out") {
            ++i;
            continue;
        }
        if (a.rfind("--threads=", 0) == 0 || a.rfind("--out=", 0) == 0) continue;
        out.push_back(a);
    }
    return out;
}

} // namespace

std::string sha256_hex(std::string_view data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("sha256 digest failed");
    std::ostringstream o;
    for (unsigned i = 0; i < len; ++i) o << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return o.str();
}

std::string sha256_file(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return sha256_hex(ss.str());
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"breachcat: data-breach frequency, severity and aggregate risk"};
    app.name("breachcat");
    app.set_version_flag("--version", report::kVersion);
    app.require_subcommand(1);
    Options o;

    struct Cmd {
        const char* name;
        const char* help;
        std::function<void(Run&)> fn;
    };
    const std::vector<Cmd> cmds = {
        {"summary", "Sector quantiles, sector x type totals and histogram", cmd_summary},
        {"fit-tail", "Pareto / truncated Pareto / truncated lognormal tail fits", cmd_fit_tail},
        {"rolling-alpha", "Pareto exponent on a moving window of events", cmd_rolling_alpha},
        {"fit-freq", "Negative binomial regression of half-year counts", cmd_fit_freq},
        {"trend", "Quantile regression of log size on time", cmd_trend},
        {"delay", "Reporting delay quantiles, completeness and submission intensity", cmd_delay},
        {"forecast", "Compound Monte Carlo forecast of total ids", cmd_forecast},
        {"cost", "Per-event cost, annual extrapolation, historical cost", cmd_cost},
        {"chronology", "Date-sorted high-impact events for plotting", cmd_chronology},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& c : cmds) {
        auto* sc = app.add_subcommand(c.name, c.help);
        add_common(sc, o);
        subs[c.name] = sc;
    }
    subs["summary"]->add_option("--probs", o.probs, "Quantile levels")->delimiter(',');
    subs["summary"]->add_option("--u-max", o.u_max, "Histogram upper bound");
    subs["summary"]->add_option("--bins", o.bins, "Histogram bins");
    subs["fit-tail"]->add_option("--family", o.family, "pareto, trunc_pareto, trunc_lognormal or all");
    subs["rolling-alpha"]->add_option("--window", o.window, "Events per window");
    subs["fit-freq"]->add_option("--family", o.family, "exp_mean, lin_mean or both");
    subs["fit-freq"]->add_flag("--include-partial", o.include_partial, "Keep partial half-year bins");
    subs["trend"]->add_option("--bootstrap", o.bootstrap, "Bootstrap replicates");
    subs["delay"]->add_option("--probs", o.probs, "Quantile levels")->delimiter(',');
    subs["delay"]->add_option("--period-start", o.period_start, "Completeness period start");
    subs["delay"]->add_option("--period-end", o.period_end, "Completeness period end (exclusive)");
    subs["delay"]->add_option("--observed-at", o.observed_at, "Observation date");
    subs["delay"]->add_option("--bandwidth", o.bandwidth, "Kernel bandwidth in days");
    auto* fc = subs["forecast"];
    fc->add_option("--n-inner", o.n_inner, "Totals per parameter draw");
    fc->add_option("--n-outer", o.n_outer, "Parameter draws");
    fc->add_option("--severity-n", o.severity_n, "Severity bootstrap sample size (0 fixes alpha)");
    fc->add_flag("--fast", o.fast, "Asymptotic-normal parameter draws");
    fc->add_option("--horizon", o.horizon, "Half-year horizon, e.g. 2018-H2");
    fc->add_option("--compare", o.compare, "Second preset for a ratio table");
    fc->add_option("--alpha", o.alpha, "Tail exponent");
    fc->add_flag("--include-partial", o.include_partial, "Keep partial half-year bins when fitting");
    fc->add_option("--observed-at", o.observed_at, "Observation date for the realized check");
    auto* cc = subs["cost"];
    cc->add_option("--model", o.model, "flat_moderate, power_jacobs, power_romanosky, flat_large, flat_extreme_band");
    cc->add_option("--unit-cost", o.unit_cost, "$ per id");
    cc->add_option("--exponent", o.exponent, "Power-model exponent");
    cc->add_option("--anchor-size", o.anchor_size, "Power-model anchor size");
    cc->add_option("--anchor-cost", o.anchor_cost, "Power-model anchor cost");
    cc->add_option("--band-low", o.band_low, "Band low $ per id");
    cc->add_option("--band-high", o.band_high, "Band high $ per id");
    cc->add_option("--size", o.sizes, "Event sizes, comma separated")->delimiter(',');
    cc->add_option("--breach-prob", o.breach_prob, "Annual breach probability per firm");
    cc->add_option("--firms", o.firms, "Number of firms");
    cc->add_option("--mean-size", o.mean_size, "Mean breach size");

    if (argc <= 1) {
        err << app.help();
        return kExitUsage;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << report::kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    for (const auto& c : cmds) {
        if (!subs[c.name]->parsed()) continue;
        try {
            Run run(c.name, o, echo_args(argc, argv), out, err);
            c.fn(run);
            run.finish();
            return kExitOk;
        } catch (const UsageError& e) {
            err << "error: " << e.what() << "\n\n" << subs[c.name]->help();
            return kExitUsage;
        } catch (const InputError& e) {
            err << "input error: " << e.what() << '\n';
            return kExitInput;
        } catch (const NumericalError& e) {
            err << "numerical error: " << e.what() << '\n';
            return kExitNumerical;
        } catch (const std::filesystem::filesystem_error& e) {
            err << "input error: " << e.what() << '\n';
            return kExitInput;
        }
    }
    err << app.help();
    return kExitUsage;
}

} // namespace breachcat
