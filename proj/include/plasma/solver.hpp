#pragma once

#include <string>
#include <vector>

#include "plasma/errors.hpp"
#include "plasma/field.hpp"
#include "plasma/geometry.hpp"
#include "plasma/greens.hpp"

namespace plasma {

// One level-set curve from marching squares. Vertices sit on grid edges;
// closed means the walk returned to its starting edge, in which case the
// first vertex is repeated at the back and area holds the unsigned
// shoelace area.
struct Contour {
    std::vector<Point> points;
    bool closed = false;
    double area = 0.0;
};

struct SolveResult {
    ScalarField u;
    int iterations = 0;
    double residual_norm = 0.0;    // max-norm of the nonlinear residual
    double correction_norm = 0.0;  // max-norm distance from the seed profile
    std::vector<double> residual_history;
    std::vector<int> plasma_pos;  // grid node ids with u > 1
    std::vector<int> plasma_neg;  // grid node ids with u < -gamma
    std::vector<Contour> free_boundary_pos;  // level 1
    std::vector<Contour> free_boundary_neg;  // level -gamma
};

// Nonlinear iteration failure carrying the last iterate, so callers can see
// how far the solve drifted before it was abandoned.
struct NonconvergenceError : NumericalError {
    ScalarField last_iterate;
    int iterations = 0;
    NonconvergenceError(const std::string& msg, ScalarField it, int n)
        : NumericalError(msg), last_iterate(std::move(it)), iterations(n) {}
};

// Damped semismooth Newton on the discrete free-boundary problem, seeded by
// the two-peak profile for (z1, z2, gamma, epsilon). The linearisation
// carries the active-set indicator 1_{u>1} + 1_{u<-gamma} on the diagonal;
// nodes sitting exactly at a kink stay inactive. Refuses configurations
// whose cores span fewer than 6 cells.
SolveResult solve_pde(const GreensTable& table, Point z1, Point z2,
                      double gamma, double epsilon, double tol = 1e-10);

// Moves a peak pair to the finite-epsilon equilibrium the solver can hold:
// alternates the amplitude solve with a minimization of the interaction
// energy at those amplitudes until the pair is a fixed point, then runs a
// short Newton polish that zeroes the pairing of the discrete residual of W
// with the four core-translation derivatives of W. Starting from the
// asymptotic minimizer is the intended use; when the amplitude system
// refuses the start at this epsilon the fixed point is walked up from a
// smaller epsilon. Requires a solve-capable grid (s*eps/h >= 6).
std::pair<Point, Point> equilibrate_configuration(const GreensTable& table,
                                                  Point z1, Point z2,
                                                  double gamma, double epsilon);

// solve_pde plus seed registration: after a converged solve the seed pair is
// translated by the least-squares core offset between u and W and the solve
// repeats, so correction_norm measures profile distortion instead of the
// sub-cell placement mismatch between the seed and the discrete solution
// branch. At most three solves; stops once the fitted offset is below a
// twentieth of a cell. The refined seed pair is written back.
SolveResult solve_pde_aligned(const GreensTable& table, Point& z1, Point& z2,
                              double gamma, double epsilon, double tol = 1e-10);

// Marching-squares contours of u at the level, saddle cells disambiguated by
// the cell-centre average. Crossing vertices are computed once per grid edge,
// so the stitched polylines close exactly when the level set does.
std::vector<Contour> extract_free_boundary(const ScalarField& u, double level);

// Component count of a node set under 4-neighbour adjacency.
int connected_components(const Grid& grid, const std::vector<int>& nodes);

// First Dirichlet eigenvalue of -Laplace on the superlevel node set
// {u > level}: five-point rows with arms shortened to the interpolated
// level crossings, then inverse power iteration to relative tolerance 1e-8.
// For the negative plasma set pass the negated field with level = gamma.
// epsilon scales the resolution guard only.
double plasma_eigenvalue(const ScalarField& u, double epsilon,
                         double level = 1.0);

}  // namespace plasma
