#include "breachcat/errors.hpp"
#include "breachcat/tail.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>

using namespace breachcat;

namespace {

double sum_logpdf(std::span<const double> xs, const std::function<double(double)>& lp)
{
    double s = 0.0;
    for (double x : xs) s += lp(x);
    return s;
}

// 1-D grid maximizer, refined around the best cell.
std::pair<double, double> grid_max_1d(const std::function<double(double)>& f, double lo, double hi)
{
    double best_x = lo, best = -INFINITY;
    for (int level = 0; level < 4; ++level) {
        const int n = 400;
        const double step = (hi - lo) / n;
        for (int i = 0; i <= n; ++i) {
            const double x = lo + i * step;
            const double v = f(x);
            if (v > best) best = v, best_x = x;
        }
        lo = std::max(lo, best_x - 2 * step);
        hi = best_x + 2 * step;
    }
    return {best_x, best};
}

// Simpson rule on [a, b] with n (even) panels.
double simpson(const std::function<double(double)>& f, double a, double b, int n)
{
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

} // namespace

TEST_CASE("pareto fit matches grid oracle")
{
    const auto xs = sample_severity(TailModel::pareto(0.6, 1e4), 300, 11);
    const auto fit = fit_pareto(xs, 1e4);
    auto ll = [&](double a) { return sum_logpdf(xs, [&](double x) { return testing::pareto_logpdf(x, a, 1e4); }); };
    auto [a, best] = grid_max_1d(ll, 0.05, 3.0);
    CHECK(fit.model.alpha == Catch::Approx(a).margin(1e-4));
    CHECK(fit.logL >= best - 1e-9);
    CHECK(fit.logL == Catch::Approx(ll(fit.model.alpha)).epsilon(1e-12));
    CHECK(fit.se.at("alpha") == Catch::Approx(fit.model.alpha / std::sqrt(300.0)));
    double slog = 0.0;
    for (double x : xs) slog += std::log(x);
    CHECK(fit.logL_log_scale == Catch::Approx(fit.logL + slog));
}

TEST_CASE("truncated pareto fit matches grid oracle")
{
    const double u = 1e5, m = 3e9;
    const auto xs = sample_severity(TailModel::trunc_pareto(0.3, u, m), 101, 5);
    const auto fit = fit_truncated_pareto(xs, u, m);
    auto ll = [&](double a) {
        return sum_logpdf(xs, [&](double x) { return testing::trunc_pareto_logpdf(x, a, u, m); });
    };
    auto [a, best] = grid_max_1d(ll, 0.01, 2.0);
    CHECK(fit.model.alpha == Catch::Approx(a).margin(1e-4));
    CHECK(fit.logL >= best - 1e-9);
    CHECK(fit.logL == Catch::Approx(ll(fit.model.alpha)).epsilon(1e-12));
    // se from the curvature of the oracle log-likelihood
    const double h = 1e-4, a0 = fit.model.alpha;
    const double curv = (ll(a0 + h) - 2 * ll(a0) + ll(a0 - h)) / (h * h);
    CHECK(fit.se.at("alpha") == Catch::Approx(1.0 / std::sqrt(-curv)).epsilon(1e-3));
    // nesting: truncation can only help
    CHECK(fit.logL >= fit_pareto(xs, u).logL - 1e-9);
}

TEST_CASE("truncated pareto fit rejects samples at the boundary of the parameter space")
{
    // mean log-excess at or above half the range has no finite MLE
    std::vector<double> xs(20, 3e9);
    xs[0] = 1e5;
    CHECK_THROWS_AS(fit_truncated_pareto(xs, 1e5, 3e9), NumericalError);
    std::vector<double> out{1e4, 5e9};
    CHECK_THROWS_AS(fit_truncated_pareto(out, 1e4, 3e9), PreconditionError);
}

TEST_CASE("truncated lognormal fit matches 2-D grid oracle")
{
    const double u = 1e5;
    const auto xs = sample_severity(TailModel::trunc_lognormal(11.0, 6.0, u), 250, 9);
    const auto fit = fit_truncated_lognormal(xs, u);
    auto ll = [&](double mu, double sigma) {
        return sum_logpdf(xs, [&](double x) { return testing::trunc_lognormal_logpdf(x, mu, sigma * sigma, u); });
    };
    double mlo = 0.0, mhi = 20.0, slo = 0.5, shi = 6.0, bm = 0, bs = 0, best = -INFINITY;
    for (int level = 0; level < 5; ++level) {
        const int n = 80;
        const double dm = (mhi - mlo) / n, ds = (shi - slo) / n;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                const double v = ll(mlo + i * dm, slo + j * ds);
                if (v > best) best = v, bm = mlo + i * dm, bs = slo + j * ds;
            }
        mlo = bm - 2 * dm, mhi = bm + 2 * dm, slo = std::max(0.05, bs - 2 * ds), shi = bs + 2 * ds;
    }
    CHECK(fit.logL >= best - 1e-7);
    CHECK(fit.model.mu == Catch::Approx(bm).margin(2e-3));
    CHECK(fit.model.sigma2 == Catch::Approx(bs * bs).margin(5e-3));
    CHECK(fit.logL == Catch::Approx(ll(fit.model.mu, std::sqrt(fit.model.sigma2))).epsilon(1e-10));
    CHECK(fit.se.at("mu") > 0.0);
    CHECK(fit.se.at("sigma2") > 0.0);
}

TEST_CASE("pareto fit on a sample at the threshold is degenerate")
{
    std::vector<double> xs(10, 1e4);
    CHECK_THROWS_AS(fit_pareto(xs, 1e4), DegenerateSampleError);
    CHECK_THROWS_AS(fit_pareto(std::vector<double>{}, 1e4), PreconditionError);
    CHECK_THROWS_AS(fit_pareto(std::vector<double>{5e3, 2e4}, 1e4), PreconditionError);
}

TEST_CASE("truncated pareto mean: closed form against numeric integration")
{
    for (double a : {0.35, 0.4, 1.0, 1.7}) {
        const auto m = TailModel::trunc_pareto(a, 1e4, 1e10);
        // E[X] = int x f(x) dx, with x = e^y
        auto integrand = [&](double y) {
            const double x = std::exp(y);
            return x * std::exp(testing::trunc_pareto_logpdf(x, a, 1e4, 1e10)) * x;
        };
        const double num = simpson(integrand, std::log(1e4), std::log(1e10), 200000);
        CHECK(m.mean() == Catch::Approx(num).epsilon(1e-6));
    }
    CHECK(std::isinf(TailModel::pareto(0.9, 1.0).mean()));
    CHECK(TailModel::pareto(2.0, 3.0).mean() == Catch::Approx(6.0));
}

TEST_CASE("truncated lognormal mean against numeric integration")
{
    const auto m = TailModel::trunc_lognormal(10.0, 4.0, 1e5);
    auto integrand = [&](double y) {
        const double x = std::exp(y);
        return x * std::exp(testing::trunc_lognormal_logpdf(x, 10.0, 4.0, 1e5)) * x;
    };
    const double num = simpson(integrand, std::log(1e5), 10.0 + 4.0 + 40.0 * 2.0, 400000);
    CHECK(m.mean() == Catch::Approx(num).epsilon(1e-6));
}

TEST_CASE("cdf and quantile are inverse")
{
    for (const auto& m : {TailModel::pareto(0.5, 1e4), TailModel::trunc_pareto(0.3, 1e4, 1e10),
                          TailModel::trunc_lognormal(9.0, 5.0, 1e4)}) {
        for (double v : {0.01, 0.3, 0.5, 0.9, 0.999}) CHECK(m.cdf(m.quantile(v)) == Catch::Approx(v).epsilon(1e-9));
        CHECK(m.cdf(m.u) == 0.0);
    }
    const auto t = TailModel::trunc_pareto(0.3, 1e4, 1e10);
    CHECK(t.cdf(1e10) == Catch::Approx(1.0));
    CHECK(t.quantile(1.0) == Catch::Approx(1e10));
}

TEST_CASE("likelihood ratio test from tabulated log-likelihoods")
{
    TailFit null_fit, alt_fit;
    null_fit.n = alt_fit.n = 101;
    null_fit.logL = -208;
    alt_fit.logL = -204;
    const auto t = lr_test(null_fit, alt_fit, 1);
    CHECK(t.statistic == Catch::Approx(8.0));
    CHECK(t.p_value == Catch::Approx(0.0046777).margin(1e-6));
    CHECK(t.p_value < 0.01);
    alt_fit.n = 100;
    CHECK_THROWS_AS(lr_test(null_fit, alt_fit, 1), PreconditionError);
}

TEST_CASE("rolling alpha windows")
{
    std::vector<DatedSeverity> ev;
    const auto xs = sample_severity(TailModel::pareto(0.7, 2.5e4), 120, 3);
    for (std::size_t i = 0; i < xs.size(); ++i) ev.push_back({Date::from_ymd(2005, 1, 1).add_days(static_cast<long>(10 * i)), xs[i]});
    ev.push_back({Date::from_ymd(2010, 1, 1), 10.0});  // below u, dropped
    const auto r = rolling_alpha(ev, 2.5e4, 50);
    CHECK(r.points.size() == 71);
    CHECK(r.points.front().window_end == ev[49].date);
    std::vector<double> first(xs.begin(), xs.begin() + 50);
    CHECK(r.points.front().alpha == Catch::Approx(fit_pareto(first, 2.5e4).model.alpha));

    std::vector<DatedSeverity> few(ev.begin(), ev.begin() + 20);
    const auto w = rolling_alpha(few, 2.5e4, 50);
    CHECK(w.points.empty());
    CHECK(w.warnings.size() == 1);
    CHECK_THROWS_AS(rolling_alpha(ev, 2.5e4, 5), PreconditionError);
}

TEST_CASE("survival export")
{
    std::vector<double> xs{5, 1, 3, 3, 10};
    const auto s = survival_export(xs, 2);
    REQUIRE(s.size() == 3);
    CHECK(s[0].x == 3);
    CHECK(s[0].ccdf == 1.0);
    CHECK(s[1].x == 5);
    CHECK(s[1].ccdf == Catch::Approx(0.5));
    CHECK(s[2].ccdf == Catch::Approx(0.25));
}

TEST_CASE("sampler draws respect the support")
{
    const auto t = TailModel::trunc_pareto(0.35, 1e4, 1e10);
    const auto xs = sample_severity(t, 20000, 1);
    CHECK(*std::min_element(xs.begin(), xs.end()) >= 1e4);
    CHECK(*std::max_element(xs.begin(), xs.end()) <= 1e10);
    // empirical median against the model quantile
    auto v = xs;
    std::nth_element(v.begin(), v.begin() + 10000, v.end());
    CHECK(t.cdf(v[10000]) == Catch::Approx(0.5).margin(0.015));
}

TEST_CASE("pareto closed form on a two-point sample")
{
    const double u = 1e4;
    const std::vector<double> xs{u * std::exp(1.0), u * std::exp(1.0)};
    const auto f = fit_pareto(xs, u);
    CHECK(f.model.alpha == Catch::Approx(1.0));
    CHECK(f.se.at("alpha") == Catch::Approx(0.7071).margin(1e-4));
}

TEST_CASE("pareto recovery on a large sample")
{
    const auto xs = sample_severity(TailModel::pareto(0.5, 1e4), 10000, 2024);
    const double a = fit_pareto(xs, 1e4).model.alpha;
    CHECK(a >= 0.485);
    CHECK(a <= 0.515);
}

TEST_CASE("truncation at a huge m reproduces the pareto fit")
{
    const auto xs = sample_severity(TailModel::pareto(0.8, 1e4), 500, 8);
    CHECK(fit_truncated_pareto(xs, 1e4, 1e30).model.alpha ==
          Catch::Approx(fit_pareto(xs, 1e4).model.alpha).margin(1e-6));
}

TEST_CASE("truncated pareto recovery with a fine grid oracle")
{
    const double u = 1e4, m = 1e8;
    const auto xs = sample_severity(TailModel::trunc_pareto(0.3, u, m), 5000, 77);
    const auto fit = fit_truncated_pareto(xs, u, m);
    CHECK(std::fabs(fit.model.alpha - 0.3) < 3.0 * fit.se.at("alpha"));
    double best = -INFINITY, best_a = 0.0;
    for (int i = 0; i <= 19900; ++i) {
        const double a = 0.01 + 1e-4 * i;
        double ll = 0.0;
        for (double x : xs) ll += testing::trunc_pareto_logpdf(x, a, u, m);
        if (ll > best) best = ll, best_a = a;
    }
    CHECK(fit.model.alpha == Catch::Approx(best_a).margin(1e-4));
}

TEST_CASE("lognormal fit without effective truncation gives sample moments")
{
    const auto xs = sample_severity(TailModel::trunc_lognormal(2.0, 1.5, 1e-30), 400, 4);
    double m = 0.0, v = 0.0;
    for (double x : xs) m += std::log(x);
    m /= xs.size();
    for (double x : xs) v += std::pow(std::log(x) - m, 2);
    v /= xs.size();
    const double u = *std::min_element(xs.begin(), xs.end()) * 1e-9;
    const auto fit = fit_truncated_lognormal(xs, u);
    CHECK(fit.model.mu == Catch::Approx(m).margin(1e-4));
    CHECK(fit.model.sigma2 == Catch::Approx(v).margin(1e-4));
}

TEST_CASE("truncated lognormal recovery on a large sample")
{
    const auto xs = sample_severity(TailModel::trunc_lognormal(0.0, 4.0, 1e3), 5000, 31);
    const auto fit = fit_truncated_lognormal(xs, 1e3);
    CHECK(std::fabs(fit.model.mu - 0.0) < 3.0 * fit.se.at("mu"));
    CHECK(std::fabs(fit.model.sigma2 - 4.0) < 3.0 * fit.se.at("sigma2"));
}

TEST_CASE("identical log-likelihoods give a null statistic")
{
    TailFit a, b;
    a.n = b.n = 10;
    a.logL = b.logL = -50;
    const auto t = lr_test(a, b, 1);
    CHECK(t.statistic == 0.0);
    CHECK(t.p_value == 1.0);
}

TEST_CASE("rolling alpha with one window equals the full fit")
{
    const auto xs = sample_severity(TailModel::pareto(0.6, 1e3), 40, 12);
    std::vector<DatedSeverity> ev;
    for (std::size_t i = 0; i < xs.size(); ++i) ev.push_back({Date::from_ymd(2010, 1, 1).add_days(static_cast<long>(i)), xs[i]});
    const auto r = rolling_alpha(ev, 1e3, 40);
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].alpha == Catch::Approx(fit_pareto(xs, 1e3).model.alpha));
}

TEST_CASE("rolling alpha on stationary data stays within 2 se of truth")
{
    const auto xs = sample_severity(TailModel::pareto(0.5, 2.5e4), 2000, 99);
    std::vector<DatedSeverity> ev;
    for (std::size_t i = 0; i < xs.size(); ++i) ev.push_back({Date::from_ymd(2005, 1, 1).add_days(static_cast<long>(i)), xs[i]});
    const auto r = rolling_alpha(ev, 2.5e4, 50);
    std::size_t inside = 0;
    for (const auto& p : r.points) inside += std::fabs(p.alpha - 0.5) <= 2.0 * p.se;
    CHECK(static_cast<double>(inside) / r.points.size() >= 0.85);
}

TEST_CASE("survival export of a three-point sample")
{
    const auto s = survival_export(std::vector<double>{1, 2, 4}, 1);
    REQUIRE(s.size() == 3);
    CHECK(s[0].ccdf == 1.0);
    CHECK(s[1].ccdf == Catch::Approx(2.0 / 3.0));
    CHECK(s[2].ccdf == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("survival curve of a pareto sample has slope -alpha on log-log axes")
{
    const auto xs = sample_severity(TailModel::pareto(0.7, 1e4), 5000, 21);
    const auto s = survival_export(xs, 1e4);
    std::vector<double> lx, ly;
    for (const auto& p : s) {
        if (p.ccdf < 0.01) break;  // the far tail is too noisy for a slope
        lx.push_back(std::log(p.x));
        ly.push_back(std::log(p.ccdf));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= lx.size(), my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    CHECK(sxy / sxx == Catch::Approx(-0.7).margin(0.1));
}

TEST_CASE("truncated pareto sampler boundaries and determinism")
{
    const auto t = TailModel::trunc_pareto(0.35, 1e4, 1e10);
    SeveritySampler s(t);
    CHECK(s.draw(0.0) == Catch::Approx(1e4));
    CHECK(s.draw(1.0) == Catch::Approx(1e10));
    CHECK(sample_severity(t, 100, 5) == sample_severity(t, 100, 5));
    CHECK(sample_severity(t, 100, 5) != sample_severity(t, 100, 6));
}

TEST_CASE("truncated pareto sampler passes a Kolmogorov bound")
{
    const auto t = TailModel::trunc_pareto(0.35, 1e4, 1e10);
    auto xs = sample_severity(t, 1000000, 17);
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = t.cdf(xs[i]);
        d = std::max({d, std::fabs(f - i / n), std::fabs(f - (i + 1) / n)});
    }
    CHECK(d < 0.002);
}
