#include "plasma/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "plasma/errors.hpp"
#include "plasma/numerics.hpp"

namespace plasma {

namespace {

// curve parameter of the boundary point nearest to p: coarse scan plus a
// golden refine on the bracketing arc
double nearest_parameter(const DomainModel& dom, Point p) {
    const int m = 1024;
    int best = 0;
    double dbest = dist(dom.boundary_point(0.0), p);
    for (int k = 1; k < m; ++k) {
        double d = dist(dom.boundary_point(static_cast<double>(k) / m), p);
        if (d < dbest) {
            dbest = d;
            best = k;
        }
    }
    double lo = static_cast<double>(best - 1) / m;
    double hi = static_cast<double>(best + 1) / m;
    auto f = [&](double t) {
        double tw = t - std::floor(t);
        return dist(dom.boundary_point(tw), p);
    };
    double t = golden_minimize(f, lo, hi, 1e-12);
    return t - std::floor(t);
}

}  // namespace

std::vector<SweepRecord> gamma_sweep(const GreensTable& table,
                                     const std::vector<double>& gammas,
                                     const MinimizeOptions& opt) {
    if (gammas.empty()) throw ValidationError("gamma list is empty");
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (!(gammas[i] > 0.0) || gammas[i] > 1.0)
            throw ValidationError("gamma values must lie in (0, 1]");
        if (i > 0 && gammas[i] >= gammas[i - 1])
            throw ValidationError("gamma list must be strictly descending");
    }

    const DomainModel& dom = *table.dom;
    Point center = harmonic_center(table);

    // fixed reference pair: center and the midpoint toward its nearest
    // boundary point; its gamma=1 energy bounds every minimum below because
    // the Green data is positive and the weights only shrink with gamma
    Point probe{center.x + dom.diam / 100.0, center.y};
    Point zbar2 = 0.5 * (center + dom.nearest_boundary_point(probe));
    double upper = hamiltonian(table, center, zbar2, 1.0, 1.0);

    std::vector<SweepRecord> out;
    std::optional<std::pair<Point, Point>> prev;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        SweepRecord rec;
        rec.gamma = gammas[i];
        rec.reference_upper_bound = upper;

        MinimizeOptions o = opt;
        if (prev && i % 3 != 0)
            o.warm_start = *prev;
        else
            o.warm_start.reset();
        try {
            MinimizeResult mr = minimize_hamiltonian(table, rec.gamma, o);
            rec.z1 = mr.z1;
            rec.z2 = mr.z2;
            rec.hamiltonian_value = mr.value;
            rec.minimization_ok = true;
            prev = std::pair<Point, Point>{mr.z1, mr.z2};
        } catch (const std::exception& e) {
            rec.note = e.what();
            prev.reset();
            out.push_back(rec);
            continue;
        }

        rec.dist_to_center = dist(rec.z1, center);
        rec.dist_to_boundary = dom.boundary_distance(rec.z2);
        double t = nearest_parameter(dom, rec.z2);
        rec.boundary_projection = dom.boundary_point(t);
        rec.nu_derivative_at_projection = boundary_normal_derivative(table, rec.z1, t);
        out.push_back(rec);
    }
    return out;
}

BoundaryExtremum boundary_extremizer(const GreensTable& table, Point z) {
    const DomainModel& dom = *table.dom;
    if (!dom.inside(z)) throw ValidationError("extremizer source point must be interior");

    const int m = 1024;
    std::vector<double> vals(m);
    int kv = 0, ka = 0;
    double vmin = 0.0, vmax = 0.0;
    for (int k = 0; k < m; ++k) {
        vals[k] = boundary_normal_derivative(table, z, static_cast<double>(k) / m);
        if (k == 0) {
            vmin = vmax = vals[0];
        } else {
            vmin = std::min(vmin, vals[k]);
            vmax = std::max(vmax, vals[k]);
            if (vals[k] > vals[kv]) kv = k;
            if (std::abs(vals[k]) > std::abs(vals[ka])) ka = k;
        }
    }

    auto refine = [&](int k, bool absolute) {
        auto f = [&](double t) {
            double tw = t - std::floor(t);
            double v = boundary_normal_derivative(table, z, tw);
            return absolute ? -std::abs(v) : -v;
        };
        double t = golden_minimize(f, static_cast<double>(k - 1) / m,
                                   static_cast<double>(k + 1) / m, 1e-12);
        return t - std::floor(t);
    };

    BoundaryExtremum ex;
    ex.flat = (vmax - vmin) <= 1e-6;
    ex.t_value = refine(kv, false);
    ex.argmax_value = dom.boundary_point(ex.t_value);
    ex.max_value = boundary_normal_derivative(table, z, ex.t_value);
    ex.t_abs = refine(ka, true);
    ex.argmax_abs = dom.boundary_point(ex.t_abs);
    ex.max_abs = std::abs(boundary_normal_derivative(table, z, ex.t_abs));
    return ex;
}

BoundaryExpansionReport verify_boundary_expansion(const GreensTable& table, Point z,
                                                  Point p,
                                                  const std::vector<double>& depths) {
    const DomainModel& dom = *table.dom;
    if (!dom.inside(z)) throw ValidationError("expansion source point must be interior");
    if (depths.empty()) throw ValidationError("depth list is empty");
    for (double d : depths)
        if (!(d > 0.0) || d >= 0.2 * dom.diam)
            throw ValidationError("depths must lie in (0, 0.2*diam)");

    double t = nearest_parameter(dom, p);
    Point bp = dom.boundary_point(t);
    Point nu = dom.boundary_normal(t);

    BoundaryExpansionReport rep;
    rep.z = z;
    rep.p = bp;
    rep.nu_derivative = -boundary_normal_derivative(table, z, t);

    // with the grid backend the interpolated Green data degrades inside the
    // cut band, so shallow rows come from a linear model fitted deeper in
    const double shallow = 3.0 * dom.grid.h;
    const bool graded = table.method == GreensTable::Method::grid_solve;
    auto direct = [&](double d, DepthSample& row) {
        Point x = bp - d * nu;
        if (!dom.inside(x))
            throw ValidationError("depth stencil leaves the domain");
        row.depth = d;
        row.robin_value = robin(table, x);
        row.gbar_over_depth = greens_value(table, z, x) / d;
        row.extrapolated = false;
    };

    DepthSample ref1, ref2;
    bool have_refs = false;
    for (double d : depths) {
        DepthSample row;
        if (graded && d < shallow) {
            if (!have_refs) {
                direct(shallow, ref1);
                direct(1.5 * shallow, ref2);
                have_refs = true;
            }
            double w = (d - ref1.depth) / (ref2.depth - ref1.depth);
            row.depth = d;
            row.robin_value = ref1.robin_value + w * (ref2.robin_value - ref1.robin_value);
            row.gbar_over_depth =
                ref1.gbar_over_depth + w * (ref2.gbar_over_depth - ref1.gbar_over_depth);
            row.extrapolated = true;
        } else {
            direct(d, row);
        }
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace plasma
