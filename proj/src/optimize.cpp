#include "breachcat/optimize.hpp"

#include "breachcat/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace breachcat {

namespace {

struct Simplex {
    std::vector<std::vector<double>> pts;
    std::vector<double> vals;
};

// One Nelder-Mead run from x0 with an axis-aligned initial simplex.
NelderMeadResult nm_run(const Objective& f, const std::vector<double>& x0, double step,
                        const NelderMeadOptions& opts, int budget)
{
    const std::size_t d = x0.size();
    Simplex s;
    s.pts.push_back(x0);
    for (std::size_t i = 0; i < d; ++i) {
        auto p = x0;
        p[i] += (p[i] != 0.0 ? step * std::max(std::fabs(p[i]), 1.0) : step);
        s.pts.push_back(std::move(p));
    }
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    for (auto& p : s.pts) s.vals.push_back(eval(p));

    std::vector<std::size_t> order(d + 1);
    bool converged = false;
    while (evals < budget) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s.vals[a] < s.vals[b]; });
        const auto best = order.front(), worst = order.back(), second = order[d - 1];

        double fspread = std::fabs(s.vals[worst] - s.vals[best]);
        double xspread = 0.0;
        for (std::size_t i = 0; i <= d; ++i)
            for (std::size_t k = 0; k < d; ++k)
                xspread = std::max(xspread, std::fabs(s.pts[i][k] - s.pts[best][k]));
        if (fspread <= opts.f_tol * (std::fabs(s.vals[best]) + opts.f_tol) && xspread <= opts.x_tol) {
            converged = true;
            break;
        }

        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i <= d; ++i)
            if (i != worst)
                for (std::size_t k = 0; k < d; ++k) centroid[k] += s.pts[i][k] / static_cast<double>(d);
        auto along = [&](double t) {
            std::vector<double> p(d);
            for (std::size_t k = 0; k < d; ++k) p[k] = centroid[k] + t * (s.pts[worst][k] - centroid[k]);
            return p;
        };

        auto xr = along(-1.0);
        double fr = eval(xr);
        if (fr < s.vals[best]) {
            auto xe = along(-2.0);
            double fe = eval(xe);
            if (fe < fr) { s.pts[worst] = xe; s.vals[worst] = fe; }
            else { s.pts[worst] = xr; s.vals[worst] = fr; }
        } else if (fr < s.vals[second]) {
            s.pts[worst] = xr; s.vals[worst] = fr;
        } else {
            const bool outside = fr < s.vals[worst];
            auto xc = along(outside ? -0.5 : 0.5);
            double fc = eval(xc);
            if (fc < std::min(fr, s.vals[worst])) {
                s.pts[worst] = xc; s.vals[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= d; ++i) {
                    if (i == best) continue;
                    for (std::size_t k = 0; k < d; ++k)
                        s.pts[i][k] = s.pts[best][k] + 0.5 * (s.pts[i][k] - s.pts[best][k]);
                    s.vals[i] = eval(s.pts[i]);
                }
            }
        }
    }
    auto best = static_cast<std::size_t>(std::min_element(s.vals.begin(), s.vals.end()) - s.vals.begin());
    return {s.pts[best], s.vals[best], evals, 0, converged};
}

} // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts)
{
    auto result = nm_run(f, x0, opts.initial_step, opts, opts.max_evaluations);
    int total = result.evaluations;
    int restarts = 0;
    double step = opts.initial_step;
    while (restarts < opts.max_restarts && total < opts.max_evaluations) {
        step = std::max(step * 0.5, 1e-4);
        auto next = nm_run(f, result.x, step, opts, opts.max_evaluations - total);
        total += next.evaluations;
        ++restarts;
        const bool improved = next.value < result.value - opts.f_tol * (std::fabs(result.value) + 1.0);
        if (next.value <= result.value) {
            const bool conv = next.converged;
            result = next;
            result.converged = conv;
        }
        if (!improved && result.converged) break;
    }
    result.evaluations = total;
    result.restarts = restarts;
    return result;
}

double golden_section_min(const std::function<double(double)>& f, double lo, double hi, double tol,
                          int max_iter)
{
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < max_iter && (b - a) > tol * (1.0 + std::fabs(a) + std::fabs(b)); ++i) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - g * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + g * (b - a); fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

std::vector<std::vector<double>> numeric_hessian(const Objective& f, const std::vector<double>& x, double rel_step)
{
    const std::size_t d = x.size();
    std::vector<double> h(d);
    for (std::size_t i = 0; i < d; ++i) h[i] = rel_step * std::max(std::fabs(x[i]), 1e-2);
    std::vector<std::vector<double>> H(d, std::vector<double>(d, 0.0));
    const double f0 = f(x);
    for (std::size_t i = 0; i < d; ++i) {
        auto xp = x, xm = x;
        xp[i] += h[i];
        xm[i] -= h[i];
        H[i][i] = (f(xp) - 2.0 * f0 + f(xm)) / (h[i] * h[i]);
        for (std::size_t j = i + 1; j < d; ++j) {
            auto pp = x, pm = x, mp = x, mm = x;
            pp[i] += h[i]; pp[j] += h[j];
            pm[i] += h[i]; pm[j] -= h[j];
            mp[i] -= h[i]; mp[j] += h[j];
            mm[i] -= h[i]; mm[j] -= h[j];
            H[i][j] = H[j][i] = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h[i] * h[j]);
        }
    }
    return H;
}

std::vector<std::vector<double>> invert_symmetric(const std::vector<std::vector<double>>& a)
{
    const auto d = static_cast<Eigen::Index>(a.size());
    Eigen::MatrixXd m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = a[i][j];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible()) throw NumericalError("information matrix is singular");
    Eigen::MatrixXd inv = lu.inverse();
    std::vector<std::vector<double>> out(a.size(), std::vector<double>(a.size()));
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) out[i][j] = 0.5 * (inv(i, j) + inv(j, i));
    return out;
}

} // namespace breachcat
