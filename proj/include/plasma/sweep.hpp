#pragma once

#include <string>
#include <vector>

#include "plasma/greens.hpp"
#include "plasma/routh.hpp"

namespace plasma {

// One row of the gamma continuation: the minimizing pair at this gamma and
// its relation to the harmonic center and the boundary.
struct SweepRecord {
    double gamma = 0.0;
    Point z1{}, z2{};
    double hamiltonian_value = 0.0;
    double reference_upper_bound = 0.0;  // same fixed-pair bound for every row
    double dist_to_center = 0.0;         // |z1 - harmonic center|
    double dist_to_boundary = 0.0;       // d(z2, boundary)
    Point boundary_projection{};         // boundary point nearest to z2
    double nu_derivative_at_projection = 0.0;  // d_nu Gbar(z1, .) there
    bool minimization_ok = false;
    std::string note;  // failure annotation; empty on success
};

// Minimize the weighted interaction energy at each gamma of the descending
// list, warm-starting from the previous row; every third row runs a fresh
// multistart to catch branch jumps. A failed minimization annotates its row
// and the sweep continues. The upper-bound column uses the fixed pair
// (harmonic center, midpoint toward its nearest boundary point), whose
// gamma=1 energy dominates every row's minimum because the Green data is
// positive.
std::vector<SweepRecord> gamma_sweep(const GreensTable& table,
                                     const std::vector<double>& gammas,
                                     const MinimizeOptions& opt = {});

// Both candidate attractors on the boundary for a peak at z: the largest
// signed normal derivative of Gbar(z, .) (least negative) and the largest in
// magnitude. Sampled at >= 512 boundary parameters, then golden-section
// refined. flat marks a profile whose total variation over the samples is
// below 1e-6, in which case the reported points are meaningless.
struct BoundaryExtremum {
    Point argmax_value{};
    double max_value = 0.0;
    double t_value = 0.0;
    Point argmax_abs{};
    double max_abs = 0.0;
    double t_abs = 0.0;
    bool flat = false;
};

BoundaryExtremum boundary_extremizer(const GreensTable& table, Point z);

// Depth profile toward the boundary point p: Robin values along the inward
// normal and the ratio Gbar(z, p - d nu)/d whose d -> 0 limit is
// -d_nu Gbar(z, p). With the grid backend, depths under three cells are
// linearly extrapolated from deeper samples and tagged.
struct DepthSample {
    double depth = 0.0;
    double robin_value = 0.0;
    double gbar_over_depth = 0.0;
    bool extrapolated = false;
};

struct BoundaryExpansionReport {
    Point z{}, p{};
    std::vector<DepthSample> rows;
    double nu_derivative = 0.0;  // -d_nu Gbar(z, p), the limit of the ratio column
};

BoundaryExpansionReport verify_boundary_expansion(const GreensTable& table, Point z,
                                                  Point p,
                                                  const std::vector<double>& depths);

}  // namespace plasma
