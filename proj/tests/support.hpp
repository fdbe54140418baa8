#pragma once

#include "breachcat/events.hpp"
#include "breachcat/rng.hpp"
#include "breachcat/tail.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace testing {

inline std::filesystem::path temp_dir(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("breachcat_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& s)
{
    std::ofstream f(p, std::ios::binary);
    f << s;
}

// Synthetic corpus 2005-01-01 .. 2017-10-01: HACK sizes with a rising scale,
// other types stationary. Pareto sizes above 1e3 with alpha 0.7.
inline std::string synthetic_events_csv(std::uint64_t seed, std::size_t n = 1500)
{
    breachcat::Rng rng(seed);
    const char* types[] = {"HACK", "DISC", "INSD", "HW", "NA"};
    const char* sectors[] = {"business", "financial", "web", "medical", "educational", "government"};
    const long start = breachcat::Date::from_ymd(2005, 1, 1).days();
    const long span = breachcat::Date::from_ymd(2017, 10, 1).days() - start;
    std::ostringstream o;
    o << "event_date,org_sector,breach_type,ids,state,org_name\n";
    for (std::size_t i = 0; i < n; ++i) {
        const long d = start + static_cast<long>(rng.below(static_cast<std::uint64_t>(span)));
        const auto date = breachcat::Date::from_days(d);
        const int ty = static_cast<int>(rng.below(5));
        const double years = (d - start) / 365.25;
        const double scale = ty == 0 ? 1e3 * std::exp(0.25 * years) : 1e3;
        const double ids = std::floor(scale * std::pow(rng.uniform(), -1.0 / 0.7));
        o << date.iso() << ',' << sectors[rng.below(6)] << ',' << types[ty] << ','
          << static_cast<std::uint64_t>(std::min(ids, 3e9)) << ",CA,org" << i << '\n';
    }
    return o.str();
}

// Direct log density of each tail family, written independently of the library.
inline double pareto_logpdf(double x, double alpha, double u)
{
    return std::log(alpha) + alpha * std::log(u) - (alpha + 1.0) * std::log(x);
}

inline double trunc_pareto_logpdf(double x, double alpha, double u, double m)
{
    return pareto_logpdf(x, alpha, u) - std::log(1.0 - std::pow(u / m, alpha));
}

inline double trunc_lognormal_logpdf(double x, double mu, double sigma2, double u)
{
    const double s = std::sqrt(sigma2);
    const double z = (std::log(x) - mu) / s;
    const double zu = (std::log(u) - mu) / s;
    const double tail = 0.5 * std::erfc(zu / std::sqrt(2.0));
    return -0.5 * z * z - std::log(s * x * std::sqrt(2.0 * M_PI)) - std::log(tail);
}

} // namespace testing
