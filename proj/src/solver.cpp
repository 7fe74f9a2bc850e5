#include "plasma/solver.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "plasma/ansatz.hpp"
#include "plasma/errors.hpp"
#include "plasma/numerics.hpp"
#include "plasma/routh.hpp"
#include "plasma/specfun.hpp"

namespace plasma {

namespace {

// Cut-cell five-point rows scaled by h^2, identical to the harmonic solver's
// operator; boundary arms carry homogeneous data here so no right-hand side
// correction is needed.
Eigen::SparseMatrix<double> cut_laplacian(const Grid& g) {
    const int n = g.num_unknowns();
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
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    return A;
}

}  // namespace

SolveResult solve_pde(const GreensTable& table, Point z1, Point z2,
                      double gamma, double epsilon, double tol) {
    const DomainModel& dom = *table.dom;
    const Grid& g = dom.grid;
    if (tol < 1e-10)
        throw ValidationError("solver tolerance below the supported floor 1e-10");
    const double s = core_constants().s;
    if (s * epsilon / g.h < 6.0)
        throw ValidationError(
            "plasma cores span fewer than 6 grid cells at this epsilon; refine "
            "the grid or increase epsilon");

    Amplitudes amp = solve_amplitudes(table, z1, z2, gamma, epsilon);
    ScalarField seed = assemble_W(table, z1, z2, amp);

    const int n = g.num_unknowns();
    Eigen::SparseMatrix<double> A = cut_laplacian(g);
    const double scale = epsilon * epsilon / (g.h * g.h);

    Eigen::VectorXd U(n);
    for (int k = 0; k < n; ++k) U[k] = seed.values[g.stencils[k].node];
    const Eigen::VectorXd seedU = U;

    // residual of the discrete problem in physical units: the scaled matrix
    // product is -eps^2 times the discrete Laplacian
    auto residual = [&](const Eigen::VectorXd& V, Eigen::VectorXd& F) {
        F.noalias() = scale * (A * V);
        for (int k = 0; k < n; ++k)
            F[k] += -std::max(V[k] - 1.0, 0.0) + std::max(-V[k] - gamma, 0.0);
    };

    Eigen::VectorXd F(n), Ftrial(n), Utrial(n), delta(n);
    residual(U, F);
    double res = F.lpNorm<Eigen::Infinity>();
    std::vector<double> history{res};

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    Eigen::SparseMatrix<double> J = scale * A;
    lu.analyzePattern(J);

    // exact solve of the linear piece picked by a full activity pattern
    // (+1 above u=1, -1 below u=-gamma, 0 else); false when the factorisation
    // fails or the solution contradicts the pattern
    auto piece_solve = [&](const std::vector<signed char>& pat, Eigen::VectorXd& V) {
        J = scale * A;
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        for (int k = 0; k < n; ++k) {
            if (pat[k] == 0) continue;
            J.coeffRef(k, k) -= 1.0;
            c[k] = pat[k] > 0 ? 1.0 : -gamma;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success) return false;
        V = lu.solve(c);
        for (int k = 0; k < n; ++k) {
            if (pat[k] > 0 && V[k] < 1.0 - 1e-11) return false;
            if (pat[k] < 0 && V[k] > -gamma + 1e-11) return false;
            if (pat[k] == 0 && (V[k] > 1.0 + 1e-11 || V[k] < -gamma - 1e-11)) return false;
        }
        return true;
    };

    // endgame for kink-straddling iterates: iterate the active set itself,
    // each sweep solving its piece exactly, until the set reproduces
    auto set_iteration = [&]() {
        std::vector<signed char> pat(n, 0);
        for (int k = 0; k < n; ++k)
            pat[k] = static_cast<signed char>(U[k] > 1.0 ? 1 : (U[k] < -gamma ? -1 : 0));
        Eigen::VectorXd V(n);
        std::vector<std::vector<signed char>> seen;
        for (int sweep = 0; sweep < 30; ++sweep) {
            bool feasible = piece_solve(pat, V);
            residual(V, Ftrial);
            double rv = Ftrial.lpNorm<Eigen::Infinity>();
            if (feasible && rv <= tol) {
                U = V;
                F = Ftrial;
                res = rv;
                return true;
            }
            std::vector<signed char> next(n, 0);
            for (int k = 0; k < n; ++k)
                next[k] = static_cast<signed char>(V[k] > 1.0 ? 1 : (V[k] < -gamma ? -1 : 0));
            if (next == pat) return false;
            for (const auto& s : seen)
                if (s == next) return false;
            seen.push_back(pat);
            pat = std::move(next);
        }
        return false;
    };

    std::vector<signed char> act(n, 0);
    std::vector<double> merit_hist{F.squaredNorm()};
    std::vector<double> res_window;
    int endgames = 0;
    int it = 0;
    while (res > tol) {
        if (it >= 50) {
            ScalarField last(dom);
            for (int k = 0; k < n; ++k) last.values[g.stencils[k].node] = U[k];
            throw NonconvergenceError(
                "no convergence in 50 linearisation steps, residual " +
                    std::to_string(res),
                last, it);
        }
        ++it;

        // a flat residual window close to a solution means the iteration is
        // pinched between linear pieces; hand over to the set iteration
        if (res_window.size() == 12 && res < 1e-3) {
            double wmax = 0.0, wmin = res_window[0];
            for (double r : res_window) {
                wmax = std::max(wmax, r);
                wmin = std::min(wmin, r);
            }
            if (wmax < 1.5 * wmin) {
                if (++endgames > 2) {
                    ScalarField last(dom);
                    for (int k = 0; k < n; ++k) last.values[g.stencils[k].node] = U[k];
                    throw NonconvergenceError(
                        "active set keeps flickering near the free boundary, residual " +
                            std::to_string(res),
                        last, it);
                }
                if (set_iteration()) break;
                res_window.clear();
            }
        }

        for (int k = 0; k < n; ++k)
            act[k] = static_cast<signed char>((U[k] > 1.0) || (U[k] < -gamma));
        J = scale * A;
        for (int k = 0; k < n; ++k)
            if (act[k]) J.coeffRef(k, k) -= 1.0;
        lu.factorize(J);
        if (lu.info() != Eigen::Success)
            throw NumericalError("linearised free-boundary operator is singular");
        delta = lu.solve(-F);

        // damping accepts an Armijo decrease of the squared l2 merit against
        // the worst of the last five accepted values; the max norm alone lets
        // a single interface node veto otherwise sound steps
        double mref = 0.0;
        for (double m : merit_hist) mref = std::max(mref, m);
        double t = 1.0;
        for (;;) {
            Utrial = U + t * delta;
            residual(Utrial, Ftrial);
            if (Ftrial.squaredNorm() <= (1.0 - 2e-4 * t) * mref) {
                U.swap(Utrial);
                F.swap(Ftrial);
                res = F.lpNorm<Eigen::Infinity>();
                merit_hist.push_back(F.squaredNorm());
                if (merit_hist.size() > 5) merit_hist.erase(merit_hist.begin());
                res_window.push_back(res);
                if (res_window.size() > 12) res_window.erase(res_window.begin());
                break;
            }
            t *= 0.5;
            if (t < 1e-8) {
                if (res < 1e-2 && ++endgames <= 2 && set_iteration()) break;
                ScalarField last(dom);
                for (int k = 0; k < n; ++k)
                    last.values[g.stencils[k].node] = U[k];
                throw NonconvergenceError(
                    "residual stalled at minimal damping, residual " +
                        std::to_string(res),
                    last, it);
            }
        }
        history.push_back(res);
    }

    if (U.maxCoeff() <= 1.0 || U.minCoeff() >= -gamma)
        throw NumericalError(
            "iteration collapsed onto a coreless branch (peak presence check)");

    SolveResult out;
    out.u = ScalarField(dom);
    for (int k = 0; k < n; ++k) out.u.values[g.stencils[k].node] = U[k];
    out.iterations = it;
    out.residual_norm = res;
    out.correction_norm = (U - seedU).lpNorm<Eigen::Infinity>();
    out.residual_history = std::move(history);
    for (int k = 0; k < n; ++k) {
        if (U[k] > 1.0) out.plasma_pos.push_back(g.stencils[k].node);
        if (U[k] < -gamma) out.plasma_neg.push_back(g.stencils[k].node);
    }
    out.free_boundary_pos = extract_free_boundary(out.u, 1.0);
    out.free_boundary_neg = extract_free_boundary(out.u, -gamma);
    return out;
}

namespace {

// assembled profile restricted to the unknown ordering
void w_on_unknowns(const GreensTable& table, const Grid& g, Point z1, Point z2,
                   const Amplitudes& amp, Eigen::VectorXd& V) {
    ScalarField W = assemble_W(table, z1, z2, amp);
    const int n = g.num_unknowns();
    for (int k = 0; k < n; ++k) V[k] = W.values[g.stencils[k].node];
}

// local minimization of the interaction energy at fixed weights, fenced a
// few cells off the boundary and the diagonal where it blows up
std::pair<Point, Point> interaction_minimum(const GreensTable& table, Point z1,
                                            Point z2, double a1, double a2) {
    const DomainModel& dom = *table.dom;
    const double margin = 3.0 * dom.grid.h;
    auto obj = [&](const std::vector<double>& v) {
        Point p{v[0], v[1]}, q{v[2], v[3]};
        if (!dom.inside(p) || !dom.inside(q))
            return std::numeric_limits<double>::infinity();
        if (dom.boundary_distance(p) < margin || dom.boundary_distance(q) < margin)
            return std::numeric_limits<double>::infinity();
        if (dist(p, q) < margin) return std::numeric_limits<double>::infinity();
        return hamiltonian(table, p, q, a1, a2);
    };
    SimplexOptions so;
    so.max_iter = 4000;
    so.xtol = 1e-12;
    so.ftol = 1e-15;
    SimplexResult r = nelder_mead(obj, {z1.x, z1.y, z2.x, z2.y}, 0.01 * dom.diam, so);
    return {{r.x[0], r.x[1]}, {r.x[2], r.x[3]}};
}

// alternate the amplitude solve with the weighted interaction minimum until
// the pair stops moving; half steps kill the period-2 overshoot the
// alternation otherwise falls into
std::pair<Point, Point> amplitude_fixed_point(const GreensTable& table, Point z1,
                                              Point z2, double gamma,
                                              double epsilon) {
    for (int it = 0; it < 60; ++it) {
        Amplitudes amp = solve_amplitudes(table, z1, z2, gamma, epsilon);
        auto [w1, w2] = interaction_minimum(table, z1, z2, amp.a1, amp.a2);
        // in a rotation-symmetric domain the minimum comes back at an
        // arbitrary orientation; snap to the rotation nearest the current
        // iterate whenever that does not raise the energy
        double cs = w1.x * z1.x + w1.y * z1.y + w2.x * z2.x + w2.y * z2.y;
        double sn = w1.x * z1.y - w1.y * z1.x + w2.x * z2.y - w2.y * z2.x;
        double th = std::atan2(sn, cs);
        double co = std::cos(th), si = std::sin(th);
        Point r1{co * w1.x - si * w1.y, si * w1.x + co * w1.y};
        Point r2{co * w2.x - si * w2.y, si * w2.x + co * w2.y};
        try {
            double hw = hamiltonian(table, w1, w2, amp.a1, amp.a2);
            double hr = hamiltonian(table, r1, r2, amp.a1, amp.a2);
            if (hr <= hw + 1e-12 * std::abs(hw)) {
                w1 = r1;
                w2 = r2;
            }
        } catch (const std::exception&) {
        }
        double move = std::max(dist(w1, z1), dist(w2, z2));
        z1 = {z1.x + 0.5 * (w1.x - z1.x), z1.y + 0.5 * (w1.y - z1.y)};
        z2 = {z2.x + 0.5 * (w2.x - z2.x), z2.y + 0.5 * (w2.y - z2.y)};
        if (move < 3e-9) break;
    }
    return {z1, z2};
}

}  // namespace

std::pair<Point, Point> equilibrate_configuration(const GreensTable& table,
                                                  Point z1, Point z2,
                                                  double gamma, double epsilon) {
    const Grid& g = table.dom->grid;
    if (core_constants().s * epsilon / g.h < 6.0)
        throw ValidationError(
            "plasma cores span fewer than 6 grid cells at this epsilon; refine "
            "the grid or increase epsilon");

    // when the amplitude system refuses the start (log factor too small for
    // the Green data at this epsilon) walk the fixed point up an epsilon
    // ladder; the balanced pair sits further from the boundary and passes
    std::vector<double> ladder{epsilon};
    for (int k = 0;; ++k) {
        try {
            solve_amplitudes(table, z1, z2, gamma, ladder.back());
            break;
        } catch (const NumericalError&) {
            if (k >= 12) throw;
            ladder.push_back(0.7 * ladder.back());
        }
    }
    for (auto lvl = ladder.rbegin(); lvl != ladder.rend(); ++lvl)
        std::tie(z1, z2) = amplitude_fixed_point(table, z1, z2, gamma, *lvl);

    // discrete polish: drive to zero the pairing of the residual of W with
    // the four core-translation derivatives of W at frozen amplitudes; this
    // is the finite-grid solvability condition of the seeded Newton solve
    const int n = g.num_unknowns();
    Eigen::SparseMatrix<double> A = cut_laplacian(g);
    const double scale = epsilon * epsilon / (g.h * g.h);
    auto soft_force = [&](Point p1, Point p2) {
        Amplitudes amp = solve_amplitudes(table, p1, p2, gamma, epsilon);
        Eigen::VectorXd V(n), F(n), Dp(n), Dm(n);
        w_on_unknowns(table, g, p1, p2, amp, V);
        F.noalias() = scale * (A * V);
        for (int k = 0; k < n; ++k)
            F[k] += -std::max(V[k] - 1.0, 0.0) + std::max(-V[k] - gamma, 0.0);
        const double d = 1e-6;
        Eigen::Vector4d G;
        for (int c = 0; c < 4; ++c) {
            Point q1p = p1, q1m = p1, q2p = p2, q2m = p2;
            double* pp[4] = {&q1p.x, &q1p.y, &q2p.x, &q2p.y};
            double* pm[4] = {&q1m.x, &q1m.y, &q2m.x, &q2m.y};
            *pp[c] += d;
            *pm[c] -= d;
            w_on_unknowns(table, g, q1p, q2p, amp, Dp);
            w_on_unknowns(table, g, q1m, q2m, amp, Dm);
            G[c] = 0.0;
            for (int k = 0; k < n; ++k) G[c] += F[k] * (Dp[k] - Dm[k]) / (2.0 * d);
            G[c] *= g.h * g.h;
        }
        return G;
    };

    Eigen::Vector4d G = soft_force(z1, z2);
    const double fd = g.h / 4.0;
    for (int it = 0; it < 8 && G.norm() > 1e-9; ++it) {
        Eigen::Matrix4d Jg;
        for (int c = 0; c < 4; ++c) {
            Point q1p = z1, q1m = z1, q2p = z2, q2m = z2;
            double* pp[4] = {&q1p.x, &q1p.y, &q2p.x, &q2p.y};
            double* pm[4] = {&q1m.x, &q1m.y, &q2m.x, &q2m.y};
            *pp[c] += fd;
            *pm[c] -= fd;
            Jg.col(c) = (soft_force(q1p, q2p) - soft_force(q1m, q2m)) / (2.0 * fd);
        }
        // rotating the pair is a near-null direction of the force, so the
        // 4x4 Newton solve is truncated by singular value
        Eigen::JacobiSVD<Eigen::Matrix4d> svd(Jg,
                                              Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::Vector4d sv = svd.singularValues();
        Eigen::Vector4d rhs = svd.matrixU().transpose() * (-G);
        for (int c = 0; c < 4; ++c)
            rhs[c] = sv[c] > 1e-3 * sv[0] ? rhs[c] / sv[c] : 0.0;
        Eigen::Vector4d step = svd.matrixV() * rhs;
        double t = 1.0;
        const double g0 = G.norm();
        for (;;) {
            Point w1{z1.x + t * step[0], z1.y + t * step[1]};
            Point w2{z2.x + t * step[2], z2.y + t * step[3]};
            Eigen::Vector4d Gt = soft_force(w1, w2);
            if (Gt.norm() < g0) {
                z1 = w1;
                z2 = w2;
                G = Gt;
                break;
            }
            t *= 0.5;
            if (t < 1e-6) break;
        }
        // a step that cannot reduce the force means the finite difference
        // noise floor is reached; the pair is as balanced as the grid allows
        if (t < 1e-6) break;
    }
    return {z1, z2};
}

SolveResult solve_pde_aligned(const GreensTable& table, Point& z1, Point& z2,
                              double gamma, double epsilon, double tol) {
    const Grid& g = table.dom->grid;
    const int n = g.num_unknowns();
    const double rcore = 1.2 * core_constants().s * epsilon;
    for (int round = 0;; ++round) {
        SolveResult sr = solve_pde(table, z1, z2, gamma, epsilon, tol);
        if (round == 2) return sr;

        // least-squares core offset between u and the seed profile, fitted
        // against the translation derivatives of W over the core balls
        Amplitudes amp = solve_amplitudes(table, z1, z2, gamma, epsilon);
        Eigen::VectorXd Wv(n), Dp(n), Dm(n);
        w_on_unknowns(table, g, z1, z2, amp, Wv);
        Eigen::MatrixXd T(n, 4);
        const double d = 1e-6;
        for (int c = 0; c < 4; ++c) {
            Point q1p = z1, q1m = z1, q2p = z2, q2m = z2;
            double* pp[4] = {&q1p.x, &q1p.y, &q2p.x, &q2p.y};
            double* pm[4] = {&q1m.x, &q1m.y, &q2m.x, &q2m.y};
            *pp[c] += d;
            *pm[c] -= d;
            w_on_unknowns(table, g, q1p, q2p, amp, Dp);
            w_on_unknowns(table, g, q1m, q2m, amp, Dm);
            T.col(c) = (Dp - Dm) / (2.0 * d);
        }
        Eigen::Matrix4d N = Eigen::Matrix4d::Zero();
        Eigen::Vector4d b = Eigen::Vector4d::Zero();
        for (int k = 0; k < n; ++k) {
            int node = g.stencils[k].node;
            Point x = g.point(node % g.nx, node / g.nx);
            if (dist(x, z1) > rcore && dist(x, z2) > rcore) continue;
            double e = sr.u.values[node] - Wv[k];
            Eigen::Vector4d gr = T.row(k);
            N += gr * gr.transpose();
            b += gr * e;
        }
        Eigen::Vector4d del = N.ldlt().solve(b);
        double shift = std::max(std::hypot(del[0], del[1]), std::hypot(del[2], del[3]));
        if (!(shift > 0.05 * g.h)) return sr;
        if (shift > 2.0 * g.h) del *= 2.0 * g.h / shift;
        z1 = {z1.x + del[0], z1.y + del[1]};
        z2 = {z2.x + del[2], z2.y + del[3]};
    }
}

namespace {

// global ids for grid edges: even = horizontal (i,j)-(i+1,j), odd = vertical
inline long hedge(const Grid& g, int i, int j) { return 2L * (static_cast<long>(j) * g.nx + i); }
inline long vedge(const Grid& g, int i, int j) { return 2L * (static_cast<long>(j) * g.nx + i) + 1; }

}  // namespace

std::vector<Contour> extract_free_boundary(const ScalarField& u, double level) {
    const Grid& g = u.dom->grid;
    std::unordered_map<long, Point> verts;
    struct Seg {
        long a, b;
    };
    std::vector<Seg> segs;

    auto vertex = [&](long id) {
        auto it = verts.find(id);
        if (it != verts.end()) return;
        long cell = id / 2;
        int i = static_cast<int>(cell % g.nx);
        int j = static_cast<int>(cell / g.nx);
        int i2 = (id & 1) ? i : i + 1;
        int j2 = (id & 1) ? j + 1 : j;
        double a = u.values[g.idx(i, j)];
        double b = u.values[g.idx(i2, j2)];
        double t = (level - a) / (b - a);
        verts.emplace(id, g.point(i, j) + t * (g.point(i2, j2) - g.point(i, j)));
    };
    auto emit = [&](long e1, long e2) {
        vertex(e1);
        vertex(e2);
        segs.push_back({e1, e2});
    };

    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int i = 0; i + 1 < g.nx; ++i) {
            double v00 = u.values[g.idx(i, j)], v10 = u.values[g.idx(i + 1, j)];
            double v11 = u.values[g.idx(i + 1, j + 1)], v01 = u.values[g.idx(i, j + 1)];
            int mask = (v00 > level ? 1 : 0) | (v10 > level ? 2 : 0) |
                       (v11 > level ? 4 : 0) | (v01 > level ? 8 : 0);
            if (mask == 0 || mask == 15) continue;
            long B = hedge(g, i, j), T = hedge(g, i, j + 1);
            long Lf = vedge(g, i, j), R = vedge(g, i + 1, j);
            switch (mask) {
                case 1: emit(Lf, B); break;
                case 2: emit(B, R); break;
                case 3: emit(Lf, R); break;
                case 4: emit(R, T); break;
                case 6: emit(B, T); break;
                case 7: emit(Lf, T); break;
                case 8: emit(Lf, T); break;
                case 9: emit(B, T); break;
                case 11: emit(R, T); break;
                case 12: emit(Lf, R); break;
                case 13: emit(B, R); break;
                case 14: emit(Lf, B); break;
                case 5:
                case 10: {
                    // saddle cell: connect so the centre average stays on the
                    // side its sign indicates
                    bool centre_in = 0.25 * (v00 + v10 + v11 + v01) > level;
                    bool diag_swne = (mask == 5);
                    if (diag_swne == centre_in) {
                        emit(B, R);
                        emit(Lf, T);
                    } else {
                        emit(Lf, B);
                        emit(R, T);
                    }
                    break;
                }
                default: break;
            }
        }
    }

    // stitch segments into polylines through shared edge ids
    std::unordered_map<long, std::array<int, 2>> touch;
    for (int si = 0; si < static_cast<int>(segs.size()); ++si) {
        for (long e : {segs[si].a, segs[si].b}) {
            auto& slot = touch[e];
            if (slot[0] == 0 && slot[1] == 0) slot = {-1, -1};
            (slot[0] < 0 ? slot[0] : slot[1]) = si;
        }
    }
    std::vector<Contour> out;
    std::vector<char> used(segs.size(), 0);
    for (int s0 = 0; s0 < static_cast<int>(segs.size()); ++s0) {
        if (used[s0]) continue;
        used[s0] = 1;
        std::deque<long> chain{segs[s0].a, segs[s0].b};
        bool closed = false;
        // forward walk: follow the unused segment touching the back edge
        for (;;) {
            const auto& slot = touch[chain.back()];
            int nxt = -1;
            for (int cand : {slot[0], slot[1]})
                if (cand >= 0 && !used[cand]) nxt = cand;
            if (nxt < 0) break;
            used[nxt] = 1;
            long far = segs[nxt].a == chain.back() ? segs[nxt].b : segs[nxt].a;
            if (far == chain.front()) {
                closed = true;
                break;
            }
            chain.push_back(far);
        }
        if (!closed) {
            // open chain: extend backward as well
            for (;;) {
                const auto& slot = touch[chain.front()];
                int nxt = -1;
                for (int cand : {slot[0], slot[1]})
                    if (cand >= 0 && !used[cand]) nxt = cand;
                if (nxt < 0) break;
                used[nxt] = 1;
                long far = segs[nxt].a == chain.front() ? segs[nxt].b : segs[nxt].a;
                chain.push_front(far);
            }
        }

        Contour c;
        c.closed = closed;
        for (long e : chain) c.points.push_back(verts.at(e));
        if (closed) {
            double twice = 0.0;
            for (std::size_t m = 0; m < c.points.size(); ++m) {
                const Point& p = c.points[m];
                const Point& q = c.points[(m + 1) % c.points.size()];
                twice += p.x * q.y - q.x * p.y;
            }
            c.area = 0.5 * std::abs(twice);
            c.points.push_back(c.points.front());
        }
        out.push_back(std::move(c));
    }
    return out;
}

int connected_components(const Grid& grid, const std::vector<int>& nodes) {
    if (nodes.empty()) return 0;
    std::vector<char> mask(static_cast<std::size_t>(grid.nx) * grid.ny, 0);
    for (int node : nodes) mask[node] = 1;
    int count = 0;
    std::deque<int> queue;
    for (int start : nodes) {
        if (!mask[start]) continue;
        ++count;
        mask[start] = 0;
        queue.push_back(start);
        while (!queue.empty()) {
            int node = queue.front();
            queue.pop_front();
            int i = node % grid.nx, j = node / grid.nx;
            const int di[4] = {1, -1, 0, 0};
            const int dj[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                int ii = i + di[d], jj = j + dj[d];
                if (!grid.in_box(ii, jj)) continue;
                int nb = grid.idx(ii, jj);
                if (mask[nb]) {
                    mask[nb] = 0;
                    queue.push_back(nb);
                }
            }
        }
    }
    return count;
}

double plasma_eigenvalue(const ScalarField& u, double epsilon, double level) {
    const DomainModel& dom = *u.dom;
    const Grid& g = dom.grid;
    if (core_constants().s * epsilon / g.h < 6.0)
        throw ValidationError("plasma region under-resolved: core spans fewer than 6 cells");

    std::vector<int> local(static_cast<std::size_t>(g.nx) * g.ny, -1);
    std::vector<int> set_nodes;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            int node = g.idx(i, j);
            if (u.values[node] > level) {
                local[node] = static_cast<int>(set_nodes.size());
                set_nodes.push_back(node);
            }
        }
    const int n = static_cast<int>(set_nodes.size());
    if (n < 20)
        throw ValidationError("plasma region under-resolved: fewer than 20 nodes");

    // five-point rows with arms shortened to the interpolated level crossing;
    // the crossing is a Dirichlet-zero point for v = u - level
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 5);
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    for (int k = 0; k < n; ++k) {
        int node = set_nodes[k];
        int i = node % g.nx, j = node / g.nx;
        double a = u.values[node];
        double theta[4];
        int nb[4];
        for (int d = 0; d < 4; ++d) {
            int ii = i + di[d], jj = j + dj[d];
            double b = g.in_box(ii, jj) ? u.values[g.idx(ii, jj)] : 0.0;
            nb[d] = g.in_box(ii, jj) ? local[g.idx(ii, jj)] : -1;
            theta[d] = nb[d] >= 0
                           ? 1.0
                           : std::clamp((a - level) / (a - b), 1e-3, 1.0);
        }
        double tE = theta[0], tW = theta[1], tN = theta[2], tS = theta[3];
        trip.emplace_back(k, k, 2.0 / (tE * tW) + 2.0 / (tN * tS));
        const double c[4] = {2.0 / (tE * (tE + tW)), 2.0 / (tW * (tE + tW)),
                             2.0 / (tN * (tN + tS)), 2.0 / (tS * (tN + tS))};
        for (int d = 0; d < 4; ++d)
            if (nb[d] >= 0) trip.emplace_back(k, nb[d], -c[d]);
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw NumericalError("plasma region operator factorisation failed");

    // v = u - level is the expected principal eigenfunction, so the inverse
    // iteration starts essentially converged
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) v[k] = u.values[set_nodes[k]] - level;
    v.normalize();
    double mu = 0.0, mu_prev = -1.0;
    for (int iter = 0; iter < 1000; ++iter) {
        Eigen::VectorXd w = lu.solve(v);
        mu = w.dot(v) / w.dot(w);
        v = w.normalized();
        if (std::abs(mu - mu_prev) <= 1e-8 * std::abs(mu)) return mu / (g.h * g.h);
        mu_prev = mu;
    }
    throw NumericalError("eigenvalue iteration did not settle in 1000 steps");
}

}  // namespace plasma
