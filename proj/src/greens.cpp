#include "plasma/greens.hpp"

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "plasma/errors.hpp"
#include "plasma/numerics.hpp"

namespace plasma {

namespace {

double log_data(const DomainModel& dom, Point x, Point z) {
    double r = dist(x, z);
    if (r < 1e-13 * dom.diam)
        throw ValidationError("log kernel evaluated at its singularity");
    return std::log(dom.big_r / r);
}

// Image-charge closed forms for a disk of radius rho centred at c, written in
// the scale-invariant form Gbar(x,z) = log(||z~|x~ - z~/|z~||/|x~-z~|) with
// x~ = (x-c)/rho. Stable as z approaches the centre.
double disk_gbar(const DomainModel& dom, Point x, Point z) {
    double rho = dom.disk_radius;
    Point xt = (1.0 / rho) * (x - dom.disk_center);
    Point zt = (1.0 / rho) * (z - dom.disk_center);
    double r = dist(xt, zt);
    if (r < 1e-13) throw ValidationError("Green function evaluated at its singularity");
    double a = norm(zt);
    Point w = a < 1e-14 ? Point{1.0, 0.0} : norm(zt) * xt - (1.0 / a) * zt;
    return std::log(norm(w) / r);
}

double disk_robin(const DomainModel& dom, Point z) {
    double rho = dom.disk_radius;
    double a2 = dot(z - dom.disk_center, z - dom.disk_center) / (rho * rho);
    if (a2 >= 1.0) throw ValidationError("Robin function evaluated outside the domain");
    return std::log(dom.big_r / rho) - std::log(1.0 - a2);
}

// g(x,z) = log(big_r/rho) - log|w| with the same w as above; smooth across
// x = z, where it reduces to the Robin value.
double disk_regular(const DomainModel& dom, Point x, Point z) {
    double rho = dom.disk_radius;
    Point xt = (1.0 / rho) * (x - dom.disk_center);
    Point zt = (1.0 / rho) * (z - dom.disk_center);
    double a = norm(zt);
    double wn = a < 1e-14 ? 1.0 : norm(a * xt - (1.0 / a) * zt);
    return std::log(dom.big_r / rho) - std::log(wn);
}

} // namespace

// Cut-cell five-point discretisation of the Laplacian with arms shortened at
// the boundary, shared by every source; only the right-hand side changes per
// source, so the incomplete-LU preconditioner is factorised once.
struct GridGreensBackend {
    Eigen::SparseMatrix<double> A;
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> solver;
    std::mutex lock;

    // scalar Robin values and a small ring of full fields, keyed by source
    std::map<std::pair<double, double>, double> robin_cache;
    std::map<std::pair<double, double>, ScalarField> field_cache;
    std::vector<std::pair<double, double>> field_order;
    Eigen::VectorXd last_solution;
    bool has_last = false;

    static constexpr std::size_t kMaxFields = 8;

    explicit GridGreensBackend(const DomainModel& dom) {
        const Grid& g = dom.grid;
        int n = g.num_unknowns();
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(n) * 5);
        for (int u = 0; u < n; ++u) {
            const NodeStencil& st = g.stencils[u];
            double tE = st.theta[0], tW = st.theta[1];
            double tN = st.theta[2], tS = st.theta[3];
            trip.emplace_back(u, u, 2.0 / (tE * tW) + 2.0 / (tN * tS));
            const double c[4] = {2.0 / (tE * (tE + tW)), 2.0 / (tW * (tE + tW)),
                                 2.0 / (tN * (tN + tS)), 2.0 / (tS * (tN + tS))};
            for (int d = 0; d < 4; ++d)
                if (st.neighbor[d] >= 0) trip.emplace_back(u, st.neighbor[d], -c[d]);
        }
        A.resize(n, n);
        A.setFromTriplets(trip.begin(), trip.end());
        A.makeCompressed();
        solver.preconditioner().setFillfactor(12);
        solver.preconditioner().setDroptol(1e-5);
        solver.setTolerance(1e-13);
        solver.setMaxIterations(20000);
        solver.compute(A);
        if (solver.info() != Eigen::Success)
            throw NumericalError("Laplace operator factorisation failed");
    }

    // rhs carries the Dirichlet data of the cut arms
    Eigen::VectorXd rhs_for(const DomainModel& dom, Point z) const {
        const Grid& g = dom.grid;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(g.num_unknowns());
        for (int u = 0; u < g.num_unknowns(); ++u) {
            const NodeStencil& st = g.stencils[u];
            if (st.regular) continue;
            double tE = st.theta[0], tW = st.theta[1];
            double tN = st.theta[2], tS = st.theta[3];
            const double c[4] = {2.0 / (tE * (tE + tW)), 2.0 / (tW * (tE + tW)),
                                 2.0 / (tN * (tN + tS)), 2.0 / (tS * (tN + tS))};
            for (int d = 0; d < 4; ++d)
                if (st.neighbor[d] < 0) b[u] += c[d] * log_data(dom, st.bpoint[d], z);
        }
        return b;
    }

    // caller holds the lock
    Eigen::VectorXd solve(const DomainModel& dom, Point z) {
        Eigen::VectorXd b = rhs_for(dom, z);
        Eigen::VectorXd x = has_last && last_solution.size() == b.size()
                                ? solver.solveWithGuess(b, last_solution).eval()
                                : solver.solve(b).eval();
        double resid = (A * x - b).cwiseAbs().maxCoeff();
        if (resid > 1e-10) {
            x = solver.solveWithGuess(b, x);
            resid = (A * x - b).cwiseAbs().maxCoeff();
        }
        if (resid > 1e-10)
            throw NumericalError("harmonic extension solve stalled after " +
                                 std::to_string(solver.iterations()) +
                                 " iterations, residual " + std::to_string(resid));
        last_solution = x;
        has_last = true;
        return x;
    }

    ScalarField field_for(const DomainModel& dom, Point z) {
        std::scoped_lock guard(lock);
        auto key = std::make_pair(z.x, z.y);
        auto it = field_cache.find(key);
        if (it != field_cache.end()) return it->second;

        Eigen::VectorXd x = solve(dom, z);
        const Grid& g = dom.grid;
        ScalarField f(dom);
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                int node = g.idx(i, j);
                if (g.unknown[node] >= 0) {
                    f.values[node] = x[g.unknown[node]];
                } else {
                    // smooth extension by the boundary data keeps bilinear
                    // interpolation second order through the rim
                    f.values[node] = log_data(dom, g.point(i, j), z);
                }
            }
        }
        if (field_cache.size() >= kMaxFields) {
            field_cache.erase(field_order.front());
            field_order.erase(field_order.begin());
        }
        field_cache.emplace(key, f);
        field_order.push_back(key);
        return f;
    }

    double robin_at(const DomainModel& dom, Point z) {
        std::scoped_lock guard(lock);
        auto key = std::make_pair(z.x, z.y);
        auto it = robin_cache.find(key);
        if (it != robin_cache.end()) return it->second;
        auto fit = field_cache.find(key);
        double value;
        if (fit != field_cache.end()) {
            value = fit->second.interp(z);
        } else {
            Eigen::VectorXd x = solve(dom, z);
            const Grid& g = dom.grid;
            ScalarField f(dom);
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    int node = g.idx(i, j);
                    f.values[node] = g.unknown[node] >= 0
                                         ? x[g.unknown[node]]
                                         : log_data(dom, g.point(i, j), z);
                }
            value = f.interp(z);
        }
        robin_cache.emplace(key, value);
        return value;
    }
};

GreensTable make_greens_table(const DomainModel& dom) {
    return make_greens_table(dom, dom.is_disk ? GreensTable::Method::closed_form_disk
                                              : GreensTable::Method::grid_solve);
}

GreensTable make_greens_table(const DomainModel& dom, GreensTable::Method method) {
    if (method == GreensTable::Method::closed_form_disk && !dom.is_disk)
        throw ValidationError("closed-form backend requires a disk domain");
    GreensTable t;
    t.dom = &dom;
    t.method = method;
    if (method == GreensTable::Method::grid_solve)
        t.backend = std::make_shared<GridGreensBackend>(dom);
    return t;
}

ScalarField solve_regular_part(const GreensTable& table, Point z) {
    const DomainModel& dom = *table.dom;
    if (!dom.inside(z) || dom.boundary_distance(z) <= 2.0 * dom.grid.h)
        throw ValidationError("source must be interior with margin 2h");
    if (table.method == GreensTable::Method::grid_solve)
        return table.backend->field_for(dom, z);
    ScalarField f(dom);
    const Grid& g = dom.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            f.values[g.idx(i, j)] = disk_regular(dom, g.point(i, j), z);
    return f;
}

double regular_part(const GreensTable& table, Point x, Point z) {
    const DomainModel& dom = *table.dom;
    if (table.method == GreensTable::Method::closed_form_disk)
        return disk_regular(dom, x, z);
    return table.backend->field_for(dom, z).interp(x);
}

double greens_value(const GreensTable& table, Point x, Point z) {
    const DomainModel& dom = *table.dom;
    if (table.method == GreensTable::Method::closed_form_disk)
        return disk_gbar(dom, x, z);
    return log_data(dom, x, z) - table.backend->field_for(dom, z).interp(x);
}

double robin(const GreensTable& table, Point z) {
    const DomainModel& dom = *table.dom;
    if (!dom.inside(z)) throw ValidationError("Robin function needs an interior point");
    if (table.method == GreensTable::Method::closed_form_disk)
        return disk_robin(dom, z);
    return table.backend->robin_at(dom, z);
}

Point harmonic_center(const GreensTable& table) {
    const DomainModel& dom = *table.dom;
    double step = dom.diam / 40.0;
    double margin = std::max(2.0 * dom.grid.h, 0.02 * dom.diam);

    double xmin = dom.grid.x0, ymin = dom.grid.y0;
    int nx = static_cast<int>((dom.grid.nx - 1) * dom.grid.h / step) + 1;
    int ny = static_cast<int>((dom.grid.ny - 1) * dom.grid.h / step) + 1;

    Point best{};
    double best_val = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            Point p{xmin + i * step, ymin + j * step};
            if (!dom.inside(p) || dom.boundary_distance(p) < margin) continue;
            double v = robin(table, p);
            if (v < best_val) {
                best_val = v;
                best = p;
            }
        }
    }
    if (!std::isfinite(best_val))
        throw ValidationError("no interior scan point found for harmonic centre");

    auto objective = [&](const std::vector<double>& v) {
        Point p{v[0], v[1]};
        if (!dom.inside(p) || dom.boundary_distance(p) < margin)
            return std::numeric_limits<double>::infinity();
        return robin(table, p);
    };
    SimplexOptions opt;
    opt.xtol = 1e-9 * dom.diam;
    opt.ftol = 1e-14;
    auto res = nelder_mead(objective, {best.x, best.y}, 0.5 * step, opt);
    return {res.x[0], res.x[1]};
}

double boundary_normal_derivative(const GreensTable& table, Point z, double t) {
    const DomainModel& dom = *table.dom;
    if (!dom.inside(z)) throw ValidationError("source must be interior");
    if (table.method == GreensTable::Method::closed_form_disk) {
        double rho = dom.disk_radius;
        Point zt = (1.0 / rho) * (z - dom.disk_center);
        Point pt = (1.0 / rho) * (dom.boundary_point(t) - dom.disk_center);
        return -(1.0 - dot(zt, zt)) / (rho * dot(pt - zt, pt - zt));
    }
    // one-sided second-order difference along the inward normal; the boundary
    // value itself is exactly zero
    double h = dom.grid.h;
    Point p = dom.boundary_point(t);
    Point nu = dom.boundary_normal(t);
    double f1 = greens_value(table, p - h * nu, z);
    double f2 = greens_value(table, p - 2.0 * h * nu, z);
    return -(4.0 * f1 - f2) / (2.0 * h);
}

} // namespace plasma
