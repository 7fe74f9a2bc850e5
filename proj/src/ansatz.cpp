#include "plasma/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "plasma/errors.hpp"
#include "plasma/numerics.hpp"
#include "plasma/routh.hpp"
#include "plasma/specfun.hpp"

namespace plasma {

namespace {

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

// One projected bubble at x inside the domain. Inner branch subtracts the
// harmonic excess g/L from the bubble, outer branch is the pure Green tail;
// both meet at |x-z| = s*eps with value a(1 - g/L).
double pu_value(const GreensTable& table, Point z, double a, double eps, double k,
                double L, Point x) {
    const double s = core_constants().s;
    const double rho = dist(x, z);
    if (rho < s * eps) {
        return a * (1.0 + k * phi1(rho / eps)) - (a / L) * regular_part(table, x, z);
    }
    return (a / L) * greens_value(table, x, z);
}

void check_core_inside(const DomainModel& dom, Point z, double eps) {
    const double s = core_constants().s;
    if (!dom.inside(z) || dom.boundary_distance(z) <= s * eps)
        throw ValidationError("bubble core ball must lie inside the domain");
}

} // namespace

Amplitudes solve_amplitudes(const GreensTable& table, Point z1, Point z2, double gamma,
                            double epsilon) {
    if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    if (dist(z1, z2) == 0.0) throw ValidationError("peak centres must be distinct");

    const double s = core_constants().s;
    const double L = std::log(table.dom->big_r / (s * epsilon));
    const double g11 = robin(table, z1);
    const double g22 = robin(table, z2);
    const double gb = greens_value(table, z1, z2);
    if (L <= std::max({g11, g22, gb}) + 1.0)
        throw NumericalError("epsilon too large: log factor does not dominate the Green data");

    // Cramer on the symmetric system; writing the determinant through the
    // off-diagonal square keeps it, and hence both amplitudes, bitwise
    // invariant under swapping the two centres.
    const double b11 = 1.0 - g11 / L;
    const double b22 = 1.0 - g22 / L;
    const double b12 = gb / L;
    const double det = b11 * b22 - b12 * b12;
    if (det < 1e-8)
        throw NumericalError("epsilon too large: amplitude system near singular");

    Amplitudes amp;
    amp.a1 = (b22 * 1.0 + b12 * gamma) / det;
    amp.a2 = (b11 * gamma + b12 * 1.0) / det;
    amp.epsilon = epsilon;
    amp.log_factor = L;
    return amp;
}

ScalarField project_bubble(const GreensTable& table, const CellParams& cell) {
    const DomainModel& dom = *table.dom;
    check_core_inside(dom, cell.center, cell.epsilon);
    const double k = k_epsilon(cell.epsilon, dom.big_r);
    const double s = core_constants().s;
    const double L = std::log(dom.big_r / (s * cell.epsilon));

    ScalarField out(dom);
    const Grid& g = dom.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.interior[g.idx(i, j)]) continue;
            out.at(i, j) =
                pu_value(table, cell.center, cell.amplitude, cell.epsilon, k, L, g.point(i, j));
        }
    return out;
}

double eval_PU(const GreensTable& table, const CellParams& cell, Point x) {
    const double k = k_epsilon(cell.epsilon, table.dom->big_r);
    const double L = std::log(table.dom->big_r / (core_constants().s * cell.epsilon));
    return pu_value(table, cell.center, cell.amplitude, cell.epsilon, k, L, x);
}

double eval_W(const GreensTable& table, Point z1, Point z2, const Amplitudes& amp,
              Point x) {
    const double k = k_epsilon(amp.epsilon, table.dom->big_r);
    const double p1 = pu_value(table, z1, amp.a1, amp.epsilon, k, amp.log_factor, x);
    const double p2 = pu_value(table, z2, amp.a2, amp.epsilon, k, amp.log_factor, x);
    return p1 - p2;
}

ScalarField assemble_W(const GreensTable& table, Point z1, Point z2,
                       const Amplitudes& amp) {
    const DomainModel& dom = *table.dom;
    check_core_inside(dom, z1, amp.epsilon);
    check_core_inside(dom, z2, amp.epsilon);
    const double k = k_epsilon(amp.epsilon, dom.big_r);

    ScalarField out(dom);
    const Grid& g = dom.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.interior[g.idx(i, j)]) continue;
            const Point x = g.point(i, j);
            const double p1 = pu_value(table, z1, amp.a1, amp.epsilon, k, amp.log_factor, x);
            const double p2 = pu_value(table, z2, amp.a2, amp.epsilon, k, amp.log_factor, x);
            out.at(i, j) = p1 - p2;
        }
    return out;
}

ScalarField assemble_W_closed_form(const GreensTable& table, Point z1, Point z2,
                                   double gamma, const Amplitudes& amp) {
    const DomainModel& dom = *table.dom;
    check_core_inside(dom, z1, amp.epsilon);
    check_core_inside(dom, z2, amp.epsilon);
    const double k = k_epsilon(amp.epsilon, dom.big_r);
    const double s = core_constants().s;
    const double L = amp.log_factor;
    const double eps = amp.epsilon;
    const double g11 = robin(table, z1);
    const double g22 = robin(table, z2);
    const double gb12 = greens_value(table, z1, z2);

    ScalarField out(dom);
    const Grid& g = dom.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.interior[g.idx(i, j)]) continue;
            const Point x = g.point(i, j);
            const double r1 = dist(x, z1);
            const double r2 = dist(x, z2);
            double v;
            if (r1 < s * eps) {
                v = 1.0 + amp.a1 * k * phi1(r1 / eps)
                    - (amp.a1 / L) * (regular_part(table, x, z1) - g11)
                    - (amp.a2 / L) * (greens_value(table, x, z2) - gb12);
            } else if (r2 < s * eps) {
                v = -gamma - amp.a2 * k * phi1(r2 / eps)
                    + (amp.a2 / L) * (regular_part(table, x, z2) - g22)
                    + (amp.a1 / L) * (greens_value(table, x, z1) - gb12);
            } else {
                v = (amp.a1 / L) * greens_value(table, x, z1)
                    - (amp.a2 / L) * greens_value(table, x, z2);
            }
            out.at(i, j) = v;
        }
    return out;
}

double calibrate_level_T(const GreensTable& table, Point z1, Point z2,
                         const Amplitudes& amp) {
    const double h = table.dom->grid.h;
    const double step = 2.0 * h;
    auto grad_mag = [&](auto&& f, Point at) {
        const double gx = (f(Point{at.x + step, at.y}) - f(Point{at.x - step, at.y})) / (2.0 * step);
        const double gy = (f(Point{at.x, at.y + step}) - f(Point{at.x, at.y - step})) / (2.0 * step);
        return std::hypot(gx, gy);
    };
    const double dg1 = grad_mag([&](Point p) { return regular_part(table, p, z1); }, z1);
    const double db1 = grad_mag([&](Point p) { return greens_value(table, p, z2); }, z1);
    const double dg2 = grad_mag([&](Point p) { return regular_part(table, p, z2); }, z2);
    const double db2 = grad_mag([&](Point p) { return greens_value(table, p, z1); }, z2);
    const double m = std::max(amp.a1 * dg1 + amp.a2 * db1, amp.a2 * dg2 + amp.a1 * db2);
    const double a_min = std::min(amp.a1, amp.a2);
    if (!(a_min > 0.0)) throw NumericalError("amplitudes must be positive for calibration");
    return 1.2 * m * core_constants().s / a_min;
}

LevelSetReport verify_level_sets(const ScalarField& W, Point z1, Point z2,
                                 double gamma, double epsilon, double T,
                                 double sigma) {
    if (W.dom == nullptr) throw ValidationError("field carries no domain");
    if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
    const double s = core_constants().s;

    LevelSetReport rep;
    rep.t_used = T;
    rep.sigma = sigma;
    const double gamma1 = std::min(0.5, gamma / 2.0);
    const double gamma2 = std::max(1.5, gamma + 0.5);
    rep.sigma_bound = gamma1 / (2.0 * gamma2);
    rep.radius_inner = s * epsilon * (1.0 - T * epsilon);
    rep.radius_outer = s * epsilon * (1.0 + std::pow(epsilon, sigma));
    if (rep.radius_inner <= 0.0)
        throw NumericalError("certified core ball is empty at this epsilon");

    const Grid& g = W.dom->grid;
    bool pos_ok = true, neg_ok = true, ann_ok = true;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.interior[g.idx(i, j)]) continue;
            const Point x = g.point(i, j);
            const double v = W.at(i, j);
            const double r1 = dist(x, z1);
            const double r2 = dist(x, z2);
            if (r1 <= rep.radius_inner) {
                ++rep.nodes_core_pos;
                if (!(v > 1.0)) pos_ok = false;
            }
            if (r2 <= rep.radius_inner) {
                ++rep.nodes_core_neg;
                if (!(-v > gamma)) neg_ok = false;
            }
            if (r1 > rep.radius_outer && r2 > rep.radius_outer) {
                if (!(v < 1.0 && v > -gamma)) ann_ok = false;
            }
            if (v > 1.0) rep.radius_pos = std::max(rep.radius_pos, r1);
            if (v < -gamma) rep.radius_neg = std::max(rep.radius_neg, r2);
        }
    if (rep.nodes_core_pos < 8 || rep.nodes_core_neg < 8)
        throw NumericalError("grid too coarse to resolve the certified core balls");
    rep.positive_core_ok = pos_ok;
    rep.negative_core_ok = neg_ok;
    rep.annulus_ok = ann_ok;
    return rep;
}

ErrorTermReport error_term(const ScalarField& W, Point z1, Point z2, double gamma,
                           double epsilon) {
    if (W.dom == nullptr) throw ValidationError("field carries no domain");
    const Grid& g = W.dom->grid;
    ErrorTermReport rep;
    rep.residual = ScalarField(*W.dom);

    const double e2 = epsilon * epsilon;
    double sq_sum = 0.0;
    for (int j = 1; j + 1 < g.ny; ++j)
        for (int i = 1; i + 1 < g.nx; ++i) {
            // the plain stencil only means anything where no arm is cut
            if (!g.interior[g.idx(i, j)] || !g.interior[g.idx(i - 1, j)] ||
                !g.interior[g.idx(i + 1, j)] || !g.interior[g.idx(i, j - 1)] ||
                !g.interior[g.idx(i, j + 1)])
                continue;
            const double v = W.at(i, j);
            const double l = e2 * five_point_laplacian(W, i, j) + positive_part(v - 1.0) -
                             positive_part(-v - gamma);
            rep.residual.at(i, j) = l;
            rep.max_abs = std::max(rep.max_abs, std::abs(l));
            sq_sum += l * l;
        }
    rep.l2_norm = std::sqrt(sq_sum) * g.h;
    rep.at_z1 = rep.residual.interp(z1);
    rep.at_z2 = rep.residual.interp(z2);
    return rep;
}

double energy(const ScalarField& u, double gamma, double epsilon) {
    if (u.dom == nullptr) throw ValidationError("field carries no domain");
    if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
    const Grid& g = u.dom->grid;
    const double h = g.h;

    double grad2 = 0.0, mass_pos = 0.0, mass_neg = 0.0;
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double v00 = u.at(i, j), v10 = u.at(i + 1, j);
            const double v01 = u.at(i, j + 1), v11 = u.at(i + 1, j + 1);
            const double gx = ((v10 + v11) - (v00 + v01)) / (2.0 * h);
            const double gy = ((v01 + v11) - (v00 + v10)) / (2.0 * h);
            grad2 += gx * gx + gy * gy;
            const double vc = 0.25 * (v00 + v10 + v01 + v11);
            const double pp = positive_part(vc - 1.0);
            const double pn = positive_part(-vc - gamma);
            mass_pos += pp * pp;
            mass_neg += pn * pn;
        }
    const double cell = h * h;
    return 0.5 * epsilon * epsilon * grad2 * cell - 0.5 * (mass_pos + mass_neg) * cell;
}

namespace {

// Free-boundary crossing along the ray from center: largest r with the level
// condition flipping sign. A coarse scan brackets the last crossing, then
// bisection tightens it. value(r) is positive at r = 0.
double ray_crossing(const std::function<double(double)>& value, double r_hi) {
    const int scan = 96;
    double lo = 0.0, hi = -1.0;
    double prev = value(0.0);
    for (int m = 1; m <= scan; ++m) {
        const double r = r_hi * m / scan;
        const double v = value(r);
        if (prev > 0.0 && v <= 0.0) {
            lo = r_hi * (m - 1) / scan;
            hi = r;
        }
        prev = v;
    }
    if (hi < 0.0)
        throw NumericalError("free boundary not bracketed along a quadrature ray");
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (value(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double energy_quadrature(const GreensTable& table, Point z1, Point z2,
                         const Amplitudes& amp, double gamma) {
    const double s = core_constants().s;
    const double eps = amp.epsilon;
    const double k = k_epsilon(eps, table.dom->big_r);
    const double rc = s * eps;

    const int nang = 192;
    const auto gl_core = gauss_legendre(96, 0.0, rc);

    // eps^2 int |grad W|^2 equals the core integrals of (U_i - a_i)_+ W by
    // parts; the integrand a_i k phi1(r/eps) W is smooth on each core ball.
    double grad_term = 0.0;
    for (int side = 0; side < 2; ++side) {
        const Point z = side == 0 ? z1 : z2;
        const double a = side == 0 ? amp.a1 : amp.a2;
        const double sign = side == 0 ? 1.0 : -1.0;
        double acc = 0.0;
        for (int m = 0; m < nang; ++m) {
            const double th = 2.0 * M_PI * m / nang;
            const Point e{std::cos(th), std::sin(th)};
            for (std::size_t q = 0; q < gl_core.nodes.size(); ++q) {
                const double r = gl_core.nodes[q];
                const Point x = z + r * e;
                acc += gl_core.weights[q] * a * k * phi1(r / eps) *
                       eval_W(table, z1, z2, amp, x) * r;
            }
        }
        grad_term += sign * acc * (2.0 * M_PI / nang);
    }

    // Mass terms: per angle, locate the level crossing and integrate the
    // squared excess up to it, splitting at the core circle where W is only C^1.
    double mass = 0.0;
    for (int side = 0; side < 2; ++side) {
        const Point z = side == 0 ? z1 : z2;
        double acc = 0.0;
        for (int m = 0; m < nang; ++m) {
            const double th = 2.0 * M_PI * m / nang;
            const Point e{std::cos(th), std::sin(th)};
            auto excess = [&](double r) {
                const double w = eval_W(table, z1, z2, amp, z + r * e);
                return side == 0 ? w - 1.0 : -w - gamma;
            };
            const double rstar = ray_crossing(excess, 2.0 * rc);
            auto shell = [&](double ra, double rb, int n) {
                const auto gl = gauss_legendre(n, ra, rb);
                double t = 0.0;
                for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
                    const double v = excess(gl.nodes[q]);
                    t += gl.weights[q] * v * v * gl.nodes[q];
                }
                return t;
            };
            if (rstar <= rc) {
                acc += shell(0.0, rstar, 64);
            } else {
                acc += shell(0.0, rc, 64) + shell(rc, rstar, 32);
            }
        }
        mass += acc * (2.0 * M_PI / nang);
    }

    return 0.5 * grad_term - 0.5 * mass;
}

EnergyExpansion reduced_energy_expansion(const GreensTable& table, Point z1, Point z2,
                                         const Amplitudes& amp) {
    const CoreConstants& cc = core_constants();
    const double eps = amp.epsilon;
    const double k = k_epsilon(eps, table.dom->big_r);
    const double L = amp.log_factor;
    const double ham = hamiltonian(table, z1, z2, amp.a1, amp.a2);
    const double half_sq = 0.5 * (amp.a1 * amp.a1 + amp.a2 * amp.a2);

    EnergyExpansion ex;
    const double a1_const = 0.5 * cc.mass_phi1;
    ex.interaction = -a1_const * (eps * eps * k / L) * ham;
    ex.volume = eps * eps * k * (half_sq * cc.mass_phi1);
    ex.quadratic = -(eps * eps) * (k * k) * (half_sq * cc.mass_phi1_sq);
    ex.value = ex.interaction + ex.volume + ex.quadratic;
    return ex;
}

} // namespace plasma
