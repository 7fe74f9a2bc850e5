#include "plasma/cellfn.hpp"

#include <cmath>

#include "plasma/errors.hpp"
#include "plasma/specfun.hpp"

namespace plasma {

double cell_U(double r) {
    if (r < 0.0) throw ValidationError("cell_U needs a nonnegative radius");
    const auto& c = core_constants();
    if (r < c.s) return phi1(r);
    return c.s * c.j1_at_s * std::log(c.s / r);
}

double k_epsilon(double epsilon, double big_r) {
    if (epsilon <= 0.0 || big_r <= 0.0)
        throw ValidationError("k_epsilon needs positive epsilon and big_r");
    const auto& c = core_constants();
    double L = std::log(big_r / (c.s * epsilon));
    if (L <= 0.0)
        throw ValidationError("core radius s*epsilon must stay below big_r");
    return 1.0 / (c.s * c.j1_at_s * L);
}

double bubble(const CellParams& p, Point x) {
    const auto& c = core_constants();
    double rho = dist(x, p.center);
    if (rho >= p.big_r) return 0.0;
    double L = std::log(p.big_r / (c.s * p.epsilon));
    if (rho < c.s * p.epsilon)
        return p.amplitude * (1.0 + k_epsilon(p.epsilon, p.big_r) * phi1(rho / p.epsilon));
    return p.amplitude / L * std::log(p.big_r / rho);
}

Point bubble_center_gradient(const CellParams& p, Point x) {
    const auto& c = core_constants();
    double rho = dist(x, p.center);
    if (rho >= p.big_r || rho == 0.0) return {0.0, 0.0};
    Point dir = (1.0 / rho) * (p.center - x);
    if (rho < c.s * p.epsilon) {
        double k = k_epsilon(p.epsilon, p.big_r);
        return (k * p.amplitude / p.epsilon) * phi1_prime(rho / p.epsilon) * dir;
    }
    // tail (a/L) log(big_r/rho): moving the centre toward x raises the value
    double L = std::log(p.big_r / (c.s * p.epsilon));
    return (-p.amplitude / (L * rho)) * dir;
}

} // namespace plasma
