#pragma once

#include <functional>
#include <vector>

namespace breachcat {

using Objective = std::function<double(const std::vector<double>&)>;

struct NelderMeadOptions {
    double initial_step = 0.5;
    double f_tol = 1e-13;
    double x_tol = 1e-10;
    int max_evaluations = 20000;
    int max_restarts = 20;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    int restarts = 0;
    bool converged = false;
};

// Minimizes f. Restarts from the incumbent with a fresh simplex until a
// restart no longer improves the objective.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadOptions& opts = {});

// Minimizes a unimodal 1-D function on [lo, hi].
double golden_section_min(const std::function<double(double)>& f, double lo, double hi,
                          double tol = 1e-12, int max_iter = 500);

// Central-difference Hessian with per-coordinate step rel_step * max(|x_i|, 1e-2).
std::vector<std::vector<double>> numeric_hessian(const Objective& f, const std::vector<double>& x,
                                                 double rel_step = 1e-5);

// Inverse of a small symmetric matrix; throws NumericalError if singular.
std::vector<std::vector<double>> invert_symmetric(const std::vector<std::vector<double>>& a);

} // namespace breachcat
