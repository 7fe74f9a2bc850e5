#pragma once

#include "plasma/geometry.hpp"

namespace plasma {

// Parameters of one rescaled core bubble: amplitude a at the free-boundary
// level, core scale epsilon, log-normalisation radius big_r, centre z.
struct CellParams {
    double epsilon = 0.0;
    double big_r = 0.0;
    double amplitude = 1.0;
    Point center{};
};

// Whole-plane cell profile: J0 inside the core radius s, matched log tail
// outside. C^1 across r = s, and every constant multiple solves
// -lap u = u_+ away from the matching circle.
double cell_U(double r);

// k = 1/(s J1(s) log(big_r/(s*epsilon))), the core-to-tail coupling. Positive
// whenever s*epsilon < big_r.
double k_epsilon(double epsilon, double big_r);

// Bubble profile a(1 + k phi1(|x-z|/eps)) in the core, (a/L) log(big_r/|x-z|)
// in the annulus, zero beyond big_r. Continuous, value a on the core circle.
double bubble(const CellParams& p, Point x);

// Derivative of the bubble with respect to the centre at frozen amplitude.
Point bubble_center_gradient(const CellParams& p, Point x);

} // namespace plasma
