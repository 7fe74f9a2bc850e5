#pragma once

#include <memory>

#include "plasma/field.hpp"
#include "plasma/geometry.hpp"

namespace plasma {

// Convention: Gbar(x,z) = log(big_r/|x-z|) - g(x,z) with -lap Gbar = 2*pi*delta_z
// and Gbar = 0 on the boundary. g(.,z) is the harmonic regular part matching
// log(big_r/|x-z|) on the boundary; the Robin value is h(z) = g(z,z).
struct GreensTable {
    enum class Method { closed_form_disk, grid_solve };

    const DomainModel* dom = nullptr;
    Method method = Method::grid_solve;

    // grid backend state: assembled operator, factorised preconditioner,
    // source caches; absent for the closed-form backend
    std::shared_ptr<struct GridGreensBackend> backend;
};

// Disks get the exact image-charge backend unless grid_solve is forced.
GreensTable make_greens_table(const DomainModel& dom);
GreensTable make_greens_table(const DomainModel& dom, GreensTable::Method method);

// Harmonic extension g(.,z) of the boundary data log(big_r/|x-z|), as nodal
// values; exterior nodes carry the data itself so interpolation is seamless.
ScalarField solve_regular_part(const GreensTable& table, Point z);

double regular_part(const GreensTable& table, Point x, Point z);
double greens_value(const GreensTable& table, Point x, Point z);
double robin(const GreensTable& table, Point z);

// Minimiser of the Robin function: coarse scan at spacing diam/40 plus a
// derivative-free polish.
Point harmonic_center(const GreensTable& table);

// Outward normal derivative of Gbar(z, .) at boundary parameter t in [0,1).
// Negative everywhere by the maximum principle.
double boundary_normal_derivative(const GreensTable& table, Point z, double t);

} // namespace plasma
