#include "plasma/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "plasma/errors.hpp"

namespace plasma {

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw ValidationError("gauss_legendre: need at least one node");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Nodes of P_n on [-1,1] by Newton from the Chebyshev-like initial guess.
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (n == 1) { p1 = x; }
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double pn = (n == 1) ? x : p1;
            double pnm1 = (n == 1) ? 1.0 : p0;
            pp = n * (x * pn - pnm1) / (x * x - 1.0);
            double dx = pn / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = 0.5 * (b - a) * x + 0.5 * (a + b);
        rule.weights[i] = (b - a) / ((1.0 - x * x) * pp * pp);
    }
    std::reverse(rule.nodes.begin(), rule.nodes.end());
    std::reverse(rule.weights.begin(), rule.weights.end());
    return rule;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double xtol) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw NumericalError("bisect_root: no sign change on bracket");
    while (hi - lo > xtol) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

double golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                       double xtol) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > xtol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

namespace {

// Index-stable ordering: ties in value go to the lower index so the method is
// fully deterministic across platforms.
struct Vertex {
    std::vector<double> x;
    double f;
};

} // namespace

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& start, double step,
                          const SimplexOptions& opt) {
    const std::size_t n = start.size();
    std::vector<Vertex> v(n + 1);
    v[0] = {start, f(start)};
    for (std::size_t i = 0; i < n; ++i) {
        auto x = start;
        x[i] += step;
        v[i + 1] = {x, f(x)};
    }

    auto order = [&] {
        std::stable_sort(v.begin(), v.end(),
                         [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    };
    order();

    SimplexResult res;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        // convergence: simplex size and value spread
        double size = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                size = std::max(size, std::abs(v[i].x[k] - v[0].x[k]));
        double spread = std::abs(v[n].f - v[0].f);
        if (size < opt.xtol && spread < opt.ftol) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) centroid[k] += v[i].x[k] / n;

        auto blend = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t k = 0; k < n; ++k)
                x[k] = centroid[k] + t * (v[n].x[k] - centroid[k]);
            return x;
        };

        auto xr = blend(-1.0);
        double fr = f(xr);
        if (fr < v[0].f) {
            auto xe = blend(-2.0);
            double fe = f(xe);
            if (fe < fr) {
                v[n] = {xe, fe};
            } else {
                v[n] = {xr, fr};
            }
        } else if (fr < v[n - 1].f) {
            v[n] = {xr, fr};
        } else {
            auto xc = blend(fr < v[n].f ? -0.5 : 0.5);
            double fc = f(xc);
            if (fc < std::min(fr, v[n].f)) {
                v[n] = {xc, fc};
            } else {
                // shrink toward the best vertex
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t k = 0; k < n; ++k)
                        v[i].x[k] = v[0].x[k] + 0.5 * (v[i].x[k] - v[0].x[k]);
                    v[i].f = f(v[i].x);
                }
            }
        }
        order();
    }
    res.x = v[0].x;
    res.value = v[0].f;
    res.iterations = it;
    return res;
}

void parallel_for(std::size_t n, int nthreads,
                  const std::function<void(std::size_t)>& body) {
    if (nthreads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::size_t workers = std::min<std::size_t>(nthreads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace plasma
