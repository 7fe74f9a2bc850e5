#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace plasma {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double dist(Point a, Point b) { return norm(a - b); }

// One lattice unknown of the cut-cell Laplacian. Arms run east, west, north,
// south. theta[d] is the arm length as a fraction of h; it is 1 when the
// neighbour node is inside the domain and less when the arm is cut by the
// boundary, in which case bpoint[d] holds the crossing.
struct NodeStencil {
    int node = -1;
    std::array<int, 4> neighbor{-1, -1, -1, -1};  // unknown index, -1 if cut
    std::array<double, 4> theta{1.0, 1.0, 1.0, 1.0};
    std::array<Point, 4> bpoint{};
    bool regular = true;  // all four arms uncut
};

struct Grid {
    int nx = 0, ny = 0;
    double x0 = 0.0, y0 = 0.0;
    double h = 0.0;

    std::vector<unsigned char> interior;  // per node, 1 if strictly inside
    std::vector<int> unknown;             // node -> unknown index, -1 outside
    std::vector<NodeStencil> stencils;    // per unknown

    int idx(int i, int j) const { return j * nx + i; }
    Point point(int i, int j) const { return {x0 + i * h, y0 + j * h}; }
    bool in_box(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    int num_unknowns() const { return static_cast<int>(stencils.size()); }
};

// Planar domain with a sampled closed boundary, an embedding Cartesian grid,
// and the log-normalisation radius R used by the Green function convention
// log(R/|x-z|). Disks keep their analytic description so exact formulas and
// exact arm cuts stay available.
struct DomainModel {
    bool is_disk = false;
    Point disk_center{};
    double disk_radius = 0.0;

    std::vector<Point> boundary;  // closed polyline samples, orientation ccw
    double diam = 0.0;
    double big_r = 0.0;
    Grid grid;

    bool inside(Point p) const;
    double boundary_distance(Point p) const;
    Point nearest_boundary_point(Point p) const;
    // point and outward unit normal at curve parameter t in [0,1)
    Point boundary_point(double t) const;
    Point boundary_normal(double t) const;
};

// grid_n is the node count along the longer side of the bounding box;
// R = r_factor * diam. Boundary resampled to at least 512 points.
DomainModel make_disk_domain(Point center, double radius, int grid_n,
                             double r_factor = 1.1);
DomainModel make_curve_domain(const std::vector<Point>& samples, int grid_n,
                              double r_factor = 1.1);

} // namespace plasma
