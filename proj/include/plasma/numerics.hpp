#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace plasma {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre rule on [a, b]. Nodes found by Newton iteration on the
// Legendre polynomial, accurate to machine precision for n up to a few
// thousand.
QuadratureRule gauss_legendre(int n, double a, double b);

// Root of f on [lo, hi], f(lo) and f(hi) of opposite sign. Bisection to the
// given absolute tolerance.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double xtol);

// Minimum of a unimodal f on [lo, hi] by golden-section search.
double golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                       double xtol);

struct SimplexOptions {
    int max_iter = 2000;
    double xtol = 1e-10;   // simplex diameter
    double ftol = 1e-13;   // spread of values across the simplex
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Nelder-Mead downhill simplex. Deterministic: the initial simplex is the
// start point plus axis steps, and all comparisons break ties by index.
// Infeasible points can be signalled by returning +inf from f.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& start, double step,
                          const SimplexOptions& opt = {});

// Runs body(i) for i in [0, n) on up to nthreads workers. Falls back to a
// plain loop when nthreads <= 1. Results must be written to disjoint slots so
// the outcome does not depend on scheduling.
void parallel_for(std::size_t n, int nthreads,
                  const std::function<void(std::size_t)>& body);

} // namespace plasma
