#include "breachcat/errors.hpp"
#include "breachcat/rng.hpp"
#include "breachcat/trend.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace breachcat;

namespace {

double loss(std::span<const TrendPoint> pts, double tau, double a, double b)
{
    double s = 0.0;
    for (const auto& p : pts) {
        const double r = std::log(p.ids) - a - b * p.t;
        s += r >= 0 ? tau * r : (tau - 1.0) * r;
    }
    return s;
}

// Independent route to the optimum: for every candidate slope the best
// intercept is a tau-quantile of the residuals, so min over slopes of that
// profile is the exact minimum.
double profile_min(std::span<const TrendPoint> pts, double tau)
{
    std::vector<double> slopes{0.0};
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (pts[i].t != pts[j].t)
                slopes.push_back((std::log(pts[j].ids) - std::log(pts[i].ids)) / (pts[j].t - pts[i].t));
    double best = INFINITY;
    for (double b : slopes) {
        std::vector<double> r;
        for (const auto& p : pts) r.push_back(std::log(p.ids) - b * p.t);
        std::sort(r.begin(), r.end());
        const auto k = static_cast<std::size_t>(std::ceil(tau * r.size() - 1e-12));
        const double a = r[std::max<std::size_t>(k, 1) - 1];
        best = std::min(best, loss(pts, tau, a, b));
    }
    return best;
}

std::vector<TrendPoint> noisy(std::size_t n, double slope, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<TrendPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = 12.75 * rng.uniform();
        pts.push_back({t, std::exp(9.0 + slope * t + 2.0 * rng.normal())});
    }
    return pts;
}

} // namespace

TEST_CASE("pinball loss")
{
    CHECK(pinball(2.0, 0.9) == Catch::Approx(1.8));
    CHECK(pinball(-2.0, 0.9) == Catch::Approx(0.2));
    CHECK(pinball(0.0, 0.3) == 0.0);
}

TEST_CASE("equal sizes give a flat zero-loss line")
{
    std::vector<TrendPoint> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({0.5 * i, 500.0});
    for (double tau : {0.1, 0.5, 0.9}) {
        const auto f = quantile_fit(pts, tau);
        CHECK(f.a == Catch::Approx(std::log(500.0)));
        CHECK(f.b == 0.0);
        CHECK(f.loss == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("doubling series recovers an exact line through two points")
{
    std::vector<TrendPoint> pts;
    for (int i = 0; i < 5; ++i) pts.push_back({static_cast<double>(i), std::pow(2.0, i)});
    for (int i = 0; i < 5; ++i) pts.push_back({static_cast<double>(i) + 0.5, std::pow(2.0, i) * 1.3});
    const auto f = quantile_fit(pts, 0.9);
    CHECK(f.loss == Catch::Approx(profile_min(pts, 0.9)).margin(1e-12));
    // the fitted line passes through at least two data points
    int on = 0;
    for (const auto& p : pts) on += std::fabs(std::log(p.ids) - f.a - f.b * p.t) < 1e-9;
    CHECK(on >= 2);
}

TEST_CASE("enumeration fit is optimal on noisy data")
{
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto pts = noisy(60, 0.2, s);
        for (double tau : {0.25, 0.9}) {
            const auto f = quantile_fit(pts, tau);
            CHECK(f.loss == Catch::Approx(profile_min(pts, tau)).margin(1e-9));
            CHECK(f.loss == Catch::Approx(loss(pts, tau, f.a, f.b)).margin(1e-9));
        }
    }
}

TEST_CASE("quantile lines do not cross at the median time")
{
    const auto pts = noisy(80, 0.1, 21);
    std::vector<double> ts;
    for (const auto& p : pts) ts.push_back(p.t);
    std::nth_element(ts.begin(), ts.begin() + 40, ts.end());
    const double tm = ts[40];
    const auto lo = quantile_fit(pts, 0.5), hi = quantile_fit(pts, 0.9);
    CHECK(lo.a + lo.b * tm <= hi.a + hi.b * tm + 1e-9);
}

TEST_CASE("scaling sizes shifts the intercept only")
{
    auto pts = noisy(40, 0.3, 8);
    const auto f = quantile_fit(pts, 0.9);
    for (auto& p : pts) p.ids *= 1000.0;
    const auto g = quantile_fit(pts, 0.9);
    CHECK(g.b == Catch::Approx(f.b).margin(1e-9));
    CHECK(g.a == Catch::Approx(f.a + std::log(1000.0)).margin(1e-9));
}

TEST_CASE("quantile fit preconditions")
{
    std::vector<TrendPoint> same_t;
    for (int i = 0; i < 12; ++i) same_t.push_back({1.0, 10.0 + i});
    CHECK_THROWS_AS(quantile_fit(same_t, 0.9), PreconditionError);
    CHECK_THROWS_AS(quantile_fit(noisy(9, 0.0, 1), 0.9), PreconditionError);
    CHECK_THROWS_AS(quantile_fit(noisy(20, 0.0, 1), 1.0), PreconditionError);
    auto bad = noisy(20, 0.0, 1);
    bad[3].ids = 0.0;
    CHECK_THROWS_AS(quantile_fit(bad, 0.5), PreconditionError);
}

TEST_CASE("slope bootstrap")
{
    std::vector<TrendPoint> line;
    for (int i = 0; i < 30; ++i) line.push_back({0.4 * i, std::exp(1.0 + 0.5 * 0.4 * i)});
    const auto st = slope_test(line, 0.9, 500, 3);
    CHECK(st.b_hat == Catch::Approx(0.5));
    CHECK(st.p_value <= 1.0 / 500.0);

    const auto pts = noisy(80, 0.0, 77);
    const auto a = slope_test(pts, 0.9, 500, 42, 1);
    const auto b = slope_test(pts, 0.9, 500, 42, 3);
    CHECK(a.p_value == b.p_value);
    CHECK(a.boot_mean == b.boot_mean);
    CHECK(a.p_value > 0.0);
    CHECK(a.p_value <= 1.0);
    CHECK(slope_pvalue(pts, 0.9, 500, 42) == a.p_value);
    CHECK_THROWS_AS(slope_test(pts, 0.9, 100, 42), PreconditionError);
}
