#include "plasma/routh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>

#include "plasma/errors.hpp"
#include "plasma/numerics.hpp"

namespace plasma {

double hamiltonian(const GreensTable& table, Point z1, Point z2, double a1, double a2) {
    const DomainModel& dom = *table.dom;
    if (!dom.inside(z1) || !dom.inside(z2))
        throw ValidationError("hamiltonian needs interior peaks");
    if (dist(z1, z2) < 1e-12 * dom.diam)
        throw ValidationError("hamiltonian is singular for coincident peaks");
    return a1 * a1 * robin(table, z1) + 2.0 * a1 * a2 * greens_value(table, z1, z2) +
           a2 * a2 * robin(table, z2);
}

std::array<double, 4> hamiltonian_gradient(const GreensTable& table, Point z1, Point z2,
                                           double a1, double a2) {
    double step = 2.0 * table.dom->grid.h;
    std::array<double, 4> grad{};
    for (int c = 0; c < 4; ++c) {
        Point p1 = z1, m1 = z1, p2 = z2, m2 = z2;
        double* plus[4] = {&p1.x, &p1.y, &p2.x, &p2.y};
        double* minus[4] = {&m1.x, &m1.y, &m2.x, &m2.y};
        *plus[c] += step;
        *minus[c] -= step;
        grad[c] = (hamiltonian(table, p1, p2, a1, a2) -
                   hamiltonian(table, m1, m2, a1, a2)) /
                  (2.0 * step);
    }
    return grad;
}

namespace {

struct Candidate {
    Point z1, z2;
    double value;
};

bool lex_before(const Candidate& a, const Candidate& b) {
    if (a.z1.x != b.z1.x) return a.z1.x < b.z1.x;
    if (a.z1.y != b.z1.y) return a.z1.y < b.z1.y;
    if (a.z2.x != b.z2.x) return a.z2.x < b.z2.x;
    return a.z2.y < b.z2.y;
}

} // namespace

MinimizeResult minimize_hamiltonian(const GreensTable& table, double gamma,
                                    const MinimizeOptions& opt) {
    const DomainModel& dom = *table.dom;
    if (gamma <= 0.0) throw ValidationError("gamma must be positive");
    double delta = opt.delta > 0.0 ? opt.delta : 3.0 * dom.grid.h;

    std::atomic<int> evals{0};
    auto objective = [&](const std::vector<double>& v) {
        Point z1{v[0], v[1]}, z2{v[2], v[3]};
        if (!dom.inside(z1) || !dom.inside(z2)) return std::numeric_limits<double>::infinity();
        if (dom.boundary_distance(z1) < delta || dom.boundary_distance(z2) < delta)
            return std::numeric_limits<double>::infinity();
        if (dist(z1, z2) < delta) return std::numeric_limits<double>::infinity();
        ++evals;
        return hamiltonian(table, z1, z2, 1.0, gamma);
    };

    std::vector<std::vector<double>> starts;
    if (opt.warm_start) {
        starts.push_back({opt.warm_start->first.x, opt.warm_start->first.y,
                          opt.warm_start->second.x, opt.warm_start->second.y});
    } else {
        // coarse product lattice of feasible pairs, best `starts` kept
        std::vector<Point> sites;
        int n = 7;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                Point p{dom.grid.x0 + (i + 0.5) / n * (dom.grid.nx - 1) * dom.grid.h,
                        dom.grid.y0 + (j + 0.5) / n * (dom.grid.ny - 1) * dom.grid.h};
                if (dom.inside(p) && dom.boundary_distance(p) > delta) sites.push_back(p);
            }
        std::vector<Candidate> cands;
        for (const Point& p : sites)
            for (const Point& q : sites) {
                if (dist(p, q) < delta) continue;
                double v = hamiltonian(table, p, q, 1.0, gamma);
                cands.push_back({p, q, v});
            }
        if (cands.empty()) throw ValidationError("no feasible seed configuration");
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            if (a.value != b.value) return a.value < b.value;
            return lex_before(a, b);
        });
        int keep = std::min<int>(opt.starts, static_cast<int>(cands.size()));
        std::mt19937 rng(opt.seed);
        std::uniform_real_distribution<double> jit(-0.02 * dom.diam, 0.02 * dom.diam);
        for (int k = 0; k < keep; ++k) {
            auto& c = cands[k];
            std::vector<double> s{c.z1.x, c.z1.y, c.z2.x, c.z2.y};
            if (k >= 4)
                for (double& x : s) x += jit(rng);
            starts.push_back(std::move(s));
        }
    }

    SimplexOptions sopt;
    sopt.max_iter = 4000;
    sopt.xtol = 1e-10 * dom.diam;
    sopt.ftol = 1e-14;
    double step = opt.warm_start ? 0.02 * dom.diam : 0.06 * dom.diam;

    std::vector<Candidate> polished(starts.size());
    parallel_for(starts.size(), opt.threads, [&](std::size_t k) {
        auto r = nelder_mead(objective, starts[k], step, sopt);
        polished[k] = {{r.x[0], r.x[1]}, {r.x[2], r.x[3]}, r.value};
    });

    const Candidate* best = &polished[0];
    for (const Candidate& c : polished) {
        if (c.value < best->value - 1e-12 ||
            (std::abs(c.value - best->value) <= 1e-12 && lex_before(c, *best)))
            best = &c;
    }
    if (!std::isfinite(best->value))
        throw NumericalError("hamiltonian minimisation found no feasible minimum");

    MinimizeResult res;
    res.z1 = best->z1;
    res.z2 = best->z2;
    res.value = best->value;
    res.delta = delta;
    res.evaluations = evals.load();
    res.starts_polished = static_cast<int>(starts.size());
    return res;
}

} // namespace plasma
