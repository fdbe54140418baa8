#include "breachcat/stats.hpp"

#include "breachcat/errors.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace breachcat {

double quantile_type1(std::span<const double> sorted, double p)
{
    if (sorted.empty()) throw PreconditionError("quantile of an empty sample");
    if (!(p > 0.0 && p <= 1.0)) throw PreconditionError("quantile level must lie in (0, 1]");
    const auto n = static_cast<double>(sorted.size());
    // Guard against n*p landing a hair above an integer through rounding.
    auto k = static_cast<std::size_t>(std::ceil(n * p - 1e-9));
    k = std::clamp<std::size_t>(k, 1, sorted.size());
    return sorted[k - 1];
}

std::vector<double> quantiles_type1(std::vector<double> values, std::span<const double> probs)
{
    std::sort(values.begin(), values.end());
    std::vector<double> out;
    out.reserve(probs.size());
    for (double p : probs) out.push_back(quantile_type1(values, p));
    return out;
}

double mean(std::span<const double> xs)
{
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs)
{
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / static_cast<double>(xs.size() - 1);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_quantile(double p)
{
    return boost::math::quantile(boost::math::normal_distribution<double>{}, p);
}

double log_normal_sf(double z)
{
    if (z < 30.0) return std::log(normal_sf(z));
    // Asymptotic expansion of the Mills ratio.
    const double z2 = z * z;
    return -0.5 * z2 - std::log(z) - 0.5 * std::log(2.0 * M_PI) +
           std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

double chi2_sf(double x, double df)
{
    if (!(x > 0.0)) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>{df}, x));
}

double student_t_two_sided(double t, double df)
{
    if (std::isinf(t)) return 0.0;
    if (std::isnan(t)) return 1.0;
    boost::math::students_t_distribution<double> dist{df};
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw PreconditionError("least_squares: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw PreconditionError("least_squares needs at least 3 points");
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw PreconditionError("least_squares: regressor has zero variance");
    LinearFit fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        rss += r * r;
    }
    const double s2 = rss / static_cast<double>(n - 2);
    fit.residual_sd = std::sqrt(s2);
    fit.slope_se = std::sqrt(s2 / sxx);
    return fit;
}

} // namespace breachcat
