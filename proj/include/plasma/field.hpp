#pragma once

#include <vector>

#include "plasma/geometry.hpp"

namespace plasma {

// Nodal values on the embedding grid of a domain. Exterior nodes carry the
// natural extension of the field (zero for functions vanishing on the
// boundary, Dirichlet data for harmonic extensions) so bilinear interpolation
// stays valid up to the boundary. The domain must outlive the field.
struct ScalarField {
    const DomainModel* dom = nullptr;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const DomainModel& d)
        : dom(&d), values(static_cast<std::size_t>(d.grid.nx) * d.grid.ny, 0.0) {}

    double at(int i, int j) const { return values[dom->grid.idx(i, j)]; }
    double& at(int i, int j) { return values[dom->grid.idx(i, j)]; }

    double interp(Point p) const;  // bilinear, clamped to the grid box
};

// Plain five-point Laplacian at an interior node with all four neighbours on
// the grid; used for residual style diagnostics, not for the cut-cell solves.
double five_point_laplacian(const ScalarField& f, int i, int j);

} // namespace plasma
