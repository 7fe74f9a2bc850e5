#pragma once

#include <array>
#include <optional>
#include <utility>

#include "plasma/greens.hpp"

namespace plasma {

// Two-peak interaction energy
//   H(z1,z2) = a1^2 h(z1) + 2 a1 a2 Gbar(z1,z2) + a2^2 h(z2),
// the Kirchhoff-Routh function of the configuration. The signed version with
// weights (1, gamma) governs where the positive and negative cores settle.
double hamiltonian(const GreensTable& table, Point z1, Point z2, double a1, double a2);

inline double hamiltonian_gamma(const GreensTable& table, Point z1, Point z2,
                                double gamma) {
    return hamiltonian(table, z1, z2, 1.0, gamma);
}

// Central finite differences with step 2h in each of the four coordinates.
std::array<double, 4> hamiltonian_gradient(const GreensTable& table, Point z1, Point z2,
                                           double a1, double a2);

struct MinimizeOptions {
    int starts = 16;
    double delta = 0.0;      // feasibility margin; 0 picks 3h
    unsigned int seed = 0;   // jitter stream for the later starts
    int threads = 1;
    // when set, only a local polish from this configuration is run
    std::optional<std::pair<Point, Point>> warm_start;
};

struct MinimizeResult {
    Point z1{}, z2{};
    double value = 0.0;
    double delta = 0.0;
    int evaluations = 0;
    int starts_polished = 0;
};

// Multistart simplex descent of H_gamma over feasible pairs: both peaks at
// least delta from the boundary and from each other, infeasible trials
// rejected with +inf. Deterministic for a fixed seed; ties between starts
// break lexicographically on (z1, z2).
MinimizeResult minimize_hamiltonian(const GreensTable& table, double gamma,
                                    const MinimizeOptions& opt = {});

} // namespace plasma
