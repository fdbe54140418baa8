#pragma once

// Independent maximum-likelihood oracle for the NB regression: cyclic
// coordinate ascent with golden-section line searches on the log-likelihood
// written directly from the probability mass function.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace testing {

inline double nb_logpmf(double y, double mu, double theta)
{
    if (std::isinf(theta)) return y * std::log(mu) - mu - std::lgamma(y + 1.0);
    return std::lgamma(y + theta) - std::lgamma(theta) - std::lgamma(y + 1.0) + theta * std::log(theta / (theta + mu)) +
           y * std::log(mu / (theta + mu));
}

inline double nb_loglik(const std::vector<double>& t, const std::vector<double>& y, bool linear, double b0, double b1,
                        double theta)
{
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double mu = linear ? b0 + b1 * t[i] : std::exp(b0 + b1 * t[i]);
        if (!(mu > 0.0)) return -std::numeric_limits<double>::infinity();
        s += nb_logpmf(y[i], mu, theta);
    }
    return s;
}

inline double golden_max(const std::function<double(double)>& f, double lo, double hi)
{
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi, c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < 200 && b - a > 1e-12 * (1.0 + std::fabs(a)); ++i) {
        if (fc > fd) b = d, d = c, fd = fc, c = b - g * (b - a), fc = f(c);
        else a = c, c = d, fc = fd, d = a + g * (b - a), fd = f(d);
    }
    return 0.5 * (a + b);
}

struct OracleFit {
    double b0, b1, theta, logL;
};

// Rotated coordinate ascent: searches along b0, b1 and the direction that
// keeps the mean at the centre of the time range fixed, then ln(theta).
inline OracleFit nb_oracle(const std::vector<double>& t, const std::vector<double>& y, bool linear, double b0,
                           double b1, double theta)
{
    double tc = 0.0;
    for (double v : t) tc += v;
    tc /= t.size();
    double lt = std::log(theta);
    double prev = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < 5000; ++it) {
        const double w0 = linear ? 10.0 : 1.0, w1 = linear ? 2.0 : 0.2;
        b0 = golden_max([&](double v) { return nb_loglik(t, y, linear, v, b1, std::exp(lt)); }, b0 - w0, b0 + w0);
        b1 = golden_max([&](double v) { return nb_loglik(t, y, linear, b0, v, std::exp(lt)); }, b1 - w1, b1 + w1);
        const double s = golden_max(
            [&](double d) { return nb_loglik(t, y, linear, b0 - d * tc, b1 + d, std::exp(lt)); }, -w1, w1);
        b0 -= s * tc;
        b1 += s;
        lt = golden_max([&](double v) { return nb_loglik(t, y, linear, b0, b1, std::exp(v)); }, lt - 3.0,
                        std::min(lt + 3.0, std::log(1e8)));
        const double cur = nb_loglik(t, y, linear, b0, b1, std::exp(lt));
        if (cur - prev < 1e-13 && it > 5) break;
        prev = cur;
    }
    return {b0, b1, std::exp(lt), nb_loglik(t, y, linear, b0, b1, std::exp(lt))};
}

} // namespace testing
