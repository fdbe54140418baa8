#include "breachcat/trend.hpp"

#include "breachcat/errors.hpp"
#include "breachcat/parallel.hpp"
#include "breachcat/rng.hpp"
#include "breachcat/stats.hpp"

#include <algorithm>
#include <cmath>

namespace breachcat {

namespace {

constexpr std::uint64_t kBootstrapStream = 0x7472656e64ULL;

struct Line {
    double a;
    double b;
};

// Strictly better in (loss, |b|, a) order; `eps` absorbs rounding in sums.
bool better(double loss, const Line& l, double best_loss, const Line& best, double eps)
{
    if (loss < best_loss - eps) return true;
    if (loss > best_loss + eps) return false;
    if (std::fabs(l.b) < std::fabs(best.b) - 1e-12) return true;
    if (std::fabs(l.b) > std::fabs(best.b) + 1e-12) return false;
    return l.a < best.a - 1e-12;
}

QuantFit solve(std::span<const double> t, std::span<const double> y, double tau)
{
    const std::size_t n = y.size();
    double best_loss = std::numeric_limits<double>::infinity();
    Line best{0.0, 0.0};
    const double eps = 1e-10 * (1.0 + static_cast<double>(n));

    // Loss of a line with early exit once it cannot match the incumbent.
    auto loss_of = [&](const Line& l) {
        double s = 0.0;
        const double cutoff = best_loss + eps;
        for (std::size_t k = 0; k < n; ++k) {
            s += pinball(y[k] - l.a - l.b * t[k], tau);
            if (s > cutoff) return s;
        }
        return s;
    };
    auto consider = [&](const Line& l) {
        const double s = loss_of(l);
        if (better(s, l, best_loss, best, eps)) {
            best_loss = s;
            best = l;
        }
    };

    for (std::size_t k = 0; k < n; ++k) consider({y[k], 0.0});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (t[i] == t[j]) continue;
            const double b = (y[j] - y[i]) / (t[j] - t[i]);
            consider({y[i] - b * t[i], b});
        }

    QuantFit fit;
    fit.tau = tau;
    fit.a = best.a;
    fit.b = best.b;
    fit.n = n;
    fit.loss = 0.0;
    for (std::size_t k = 0; k < n; ++k) fit.loss += pinball(y[k] - best.a - best.b * t[k], tau);
    return fit;
}

void unpack(std::span<const TrendPoint> points, std::vector<double>& t, std::vector<double>& y)
{
    t.resize(points.size());
    y.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].ids > 0.0)) throw PreconditionError("quantile_fit: ids must be > 0");
        t[i] = points[i].t;
        y[i] = std::log(points[i].ids);
    }
}

} // namespace

double pinball(double r, double tau) { return r >= 0.0 ? tau * r : (tau - 1.0) * r; }

QuantFit quantile_fit(std::span<const TrendPoint> points, double tau)
{
    if (!(tau > 0.0 && tau < 1.0)) throw PreconditionError("quantile_fit: tau must lie in (0, 1)");
    if (points.size() < 10) throw PreconditionError("quantile_fit: at least 10 points are required");
    std::vector<double> t, y;
    unpack(points, t, y);
    if (*std::min_element(t.begin(), t.end()) == *std::max_element(t.begin(), t.end()))
        throw PreconditionError("quantile_fit: all t are equal");
    return solve(t, y, tau);
}

SlopeTest slope_test(std::span<const TrendPoint> points, double tau, std::size_t B, std::uint64_t seed,
                     unsigned threads)
{
    if (B < 500) throw PreconditionError("slope_pvalue: at least 500 bootstrap replicates are required");
    const auto fit = quantile_fit(points, tau);
    std::vector<double> t, y;
    unpack(points, t, y);
    const std::size_t n = t.size();

    std::vector<double> slopes(B);
    parallel_for(B, threads, [&](std::size_t k) {
        Rng rng(derive_seed(seed, kBootstrapStream, k));
        std::vector<double> bt(n), by(n);
        for (;;) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto j = rng.below(n);
                bt[i] = t[j];
                by[i] = y[j];
            }
            if (*std::min_element(bt.begin(), bt.end()) != *std::max_element(bt.begin(), bt.end())) break;
        }
        slopes[k] = solve(bt, by, tau).b;
    });

    SlopeTest out;
    out.b_hat = fit.b;
    out.replicates = B;
    out.boot_mean = mean(slopes);
    out.boot_sd = std::sqrt(variance(slopes));
    std::size_t extreme = 0;
    const double tol = 1e-12 * (1.0 + std::fabs(fit.b));
    for (double b : slopes)
        if (std::fabs(b - out.boot_mean) >= std::fabs(fit.b) - tol) ++extreme;
    out.p_value = (1.0 + static_cast<double>(extreme)) / (static_cast<double>(B) + 1.0);
    return out;
}

double slope_pvalue(std::span<const TrendPoint> points, double tau, std::size_t B, std::uint64_t seed,
                    unsigned threads)
{
    return slope_test(points, tau, B, seed, threads).p_value;
}

} // namespace breachcat
