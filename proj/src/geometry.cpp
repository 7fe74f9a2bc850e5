#include "plasma/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plasma/errors.hpp"

namespace plasma {

namespace {

constexpr double kThetaMin = 1e-6;  // arms shorter than this snap the node out

bool polygon_inside(const std::vector<Point>& poly, Point p) {
    bool in = false;
    std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = poly[i];
        const Point& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            double xc = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < xc) in = !in;
        }
    }
    return in;
}

double segment_distance(Point p, Point a, Point b, Point* nearest) {
    Point ab = b - a;
    double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    Point q = a + t * ab;
    if (nearest) *nearest = q;
    return dist(p, q);
}

bool segments_cross(Point a, Point b, Point c, Point d) {
    auto orient = [](Point p, Point q, Point r) {
        return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    };
    double o1 = orient(a, b, c), o2 = orient(a, b, d);
    double o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

double signed_area(const std::vector<Point>& poly) {
    double s = 0.0;
    std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
        s += poly[j].x * poly[i].y - poly[i].x * poly[j].y;
    return 0.5 * s;
}

std::vector<double> cumulative_lengths(const std::vector<Point>& poly) {
    std::vector<double> cum(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
        std::size_t j = (i + 1) % poly.size();
        cum[i + 1] = cum[i] + dist(poly[i], poly[j]);
    }
    return cum;
}

std::vector<Point> resample_closed(const std::vector<Point>& poly, std::size_t n) {
    auto cum = cumulative_lengths(poly);
    double total = cum.back();
    std::vector<Point> out(n);
    std::size_t seg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double target = total * k / n;
        while (seg + 1 < poly.size() && cum[seg + 1] < target) ++seg;
        double away = target - cum[seg];
        std::size_t j = (seg + 1) % poly.size();
        double len = dist(poly[seg], poly[j]);
        double t = len > 0.0 ? away / len : 0.0;
        out[k] = poly[seg] + t * (poly[j] - poly[seg]);
    }
    return out;
}

// Crossing of the boundary along the arm p -> p + h*dir, where the far end is
// classified outside. Returns the arm fraction in (0, 1].
double arm_cut(const DomainModel& dom, Point p, Point dir, double h, Point* cross) {
    if (dom.is_disk) {
        // |p + t*h*dir - c|^2 = r^2, take the smallest positive root
        Point w = p - dom.disk_center;
        double a = h * h * dot(dir, dir);
        double b = 2.0 * h * dot(w, dir);
        double c = dot(w, w) - dom.disk_radius * dom.disk_radius;
        double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
            double sq = std::sqrt(disc);
            for (double t : {(-b - sq) / (2 * a), (-b + sq) / (2 * a)}) {
                if (t > 0.0 && t <= 1.0) {
                    *cross = p + t * h * dir;
                    return t;
                }
            }
        }
        // far node lies inside but was snapped out; use the full arm
        *cross = p + h * dir;
        return 1.0;
    }
    double lo = 0.0, hi = 1.0;
    if (dom.inside(p + h * dir)) {  // snapped neighbour
        *cross = p + h * dir;
        return 1.0;
    }
    for (int it = 0; it < 50; ++it) {
        double mid = 0.5 * (lo + hi);
        if (dom.inside(p + mid * h * dir))
            lo = mid;
        else
            hi = mid;
    }
    double t = 0.5 * (lo + hi);
    *cross = p + t * h * dir;
    return t;
}

void build_grid(DomainModel& dom, int grid_n) {
    if (grid_n < 16) throw ValidationError("grid_n must be at least 16");

    double xmin = dom.boundary[0].x, xmax = xmin, ymin = dom.boundary[0].y, ymax = ymin;
    for (const Point& p : dom.boundary) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    if (dom.is_disk) {
        xmin = dom.disk_center.x - dom.disk_radius;
        xmax = dom.disk_center.x + dom.disk_radius;
        ymin = dom.disk_center.y - dom.disk_radius;
        ymax = dom.disk_center.y + dom.disk_radius;
    }

    Grid& g = dom.grid;
    double w = xmax - xmin, ht = ymax - ymin;
    g.h = std::max(w, ht) / (grid_n - 1);
    g.nx = w >= ht ? grid_n : static_cast<int>(std::ceil(w / g.h - 1e-9)) + 1;
    g.ny = ht > w ? grid_n : static_cast<int>(std::ceil(ht / g.h - 1e-9)) + 1;
    g.x0 = xmin;
    g.y0 = ymin;

    g.interior.assign(static_cast<std::size_t>(g.nx) * g.ny, 0);
    g.unknown.assign(static_cast<std::size_t>(g.nx) * g.ny, -1);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            Point p = g.point(i, j);
            if (dom.inside(p) && dom.boundary_distance(p) > kThetaMin * g.h)
                g.interior[g.idx(i, j)] = 1;
        }
    }

    static const std::array<Point, 4> dirs{Point{1, 0}, Point{-1, 0}, Point{0, 1},
                                           Point{0, -1}};
    static const std::array<std::array<int, 2>, 4> offs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (!g.interior[g.idx(i, j)]) continue;
            g.unknown[g.idx(i, j)] = static_cast<int>(g.stencils.size());
            NodeStencil st;
            st.node = g.idx(i, j);
            g.stencils.push_back(st);
        }
    }
    for (NodeStencil& st : g.stencils) {
        int i = st.node % g.nx, j = st.node / g.nx;
        Point p = g.point(i, j);
        for (int d = 0; d < 4; ++d) {
            int ni = i + offs[d][0], nj = j + offs[d][1];
            if (g.in_box(ni, nj) && g.interior[g.idx(ni, nj)]) {
                st.neighbor[d] = g.unknown[g.idx(ni, nj)];
            } else {
                st.theta[d] = std::max(arm_cut(dom, p, dirs[d], g.h, &st.bpoint[d]),
                                       kThetaMin);
                st.regular = false;
            }
        }
    }
}

} // namespace

bool DomainModel::inside(Point p) const {
    if (is_disk) return dist(p, disk_center) < disk_radius;
    return polygon_inside(boundary, p);
}

double DomainModel::boundary_distance(Point p) const {
    if (is_disk) return std::abs(disk_radius - dist(p, disk_center));
    double best = std::numeric_limits<double>::infinity();
    std::size_t n = boundary.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++)
        best = std::min(best, segment_distance(p, boundary[j], boundary[i], nullptr));
    return best;
}

Point DomainModel::nearest_boundary_point(Point p) const {
    if (is_disk) {
        Point w = p - disk_center;
        double r = norm(w);
        if (r < 1e-14) return disk_center + Point{disk_radius, 0.0};
        return disk_center + (disk_radius / r) * w;
    }
    double best = std::numeric_limits<double>::infinity();
    Point bq{};
    std::size_t n = boundary.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        Point q;
        double d = segment_distance(p, boundary[j], boundary[i], &q);
        if (d < best) {
            best = d;
            bq = q;
        }
    }
    return bq;
}

Point DomainModel::boundary_point(double t) const {
    t -= std::floor(t);
    if (is_disk) {
        double a = 2.0 * M_PI * t;
        return disk_center + disk_radius * Point{std::cos(a), std::sin(a)};
    }
    auto cum = cumulative_lengths(boundary);
    double target = cum.back() * t;
    std::size_t seg =
        std::upper_bound(cum.begin(), cum.end(), target) - cum.begin();
    seg = seg > 0 ? seg - 1 : 0;
    if (seg >= boundary.size()) seg = boundary.size() - 1;
    std::size_t j = (seg + 1) % boundary.size();
    double len = dist(boundary[seg], boundary[j]);
    double s = len > 0.0 ? (target - cum[seg]) / len : 0.0;
    return boundary[seg] + s * (boundary[j] - boundary[seg]);
}

Point DomainModel::boundary_normal(double t) const {
    t -= std::floor(t);
    if (is_disk) {
        double a = 2.0 * M_PI * t;
        return {std::cos(a), std::sin(a)};
    }
    auto cum = cumulative_lengths(boundary);
    double target = cum.back() * t;
    std::size_t seg =
        std::upper_bound(cum.begin(), cum.end(), target) - cum.begin();
    seg = seg > 0 ? seg - 1 : 0;
    if (seg >= boundary.size()) seg = boundary.size() - 1;
    std::size_t j = (seg + 1) % boundary.size();
    Point tangent = boundary[j] - boundary[seg];
    double len = norm(tangent);
    if (len == 0.0) return {1.0, 0.0};
    // boundary is stored counterclockwise, so the outward normal is (ty, -tx)
    return (1.0 / len) * Point{tangent.y, -tangent.x};
}

DomainModel make_disk_domain(Point center, double radius, int grid_n, double r_factor) {
    if (radius <= 0.0) throw ValidationError("disk radius must be positive");
    if (r_factor <= 1.0) throw ValidationError("r_factor must exceed 1");
    DomainModel dom;
    dom.is_disk = true;
    dom.disk_center = center;
    dom.disk_radius = radius;
    dom.diam = 2.0 * radius;
    dom.big_r = r_factor * dom.diam;
    dom.boundary.resize(1024);
    for (std::size_t k = 0; k < dom.boundary.size(); ++k) {
        double a = 2.0 * M_PI * static_cast<double>(k) / dom.boundary.size();
        dom.boundary[k] = center + radius * Point{std::cos(a), std::sin(a)};
    }
    build_grid(dom, grid_n);
    return dom;
}

DomainModel make_curve_domain(const std::vector<Point>& samples, int grid_n,
                              double r_factor) {
    if (samples.size() < 3) throw ValidationError("boundary needs at least 3 points");
    if (r_factor <= 1.0) throw ValidationError("r_factor must exceed 1");

    std::vector<Point> pts = samples;
    if (dist(pts.front(), pts.back()) < 1e-14) pts.pop_back();  // drop repeated closer
    if (pts.size() < 3) throw ValidationError("degenerate boundary curve");

    DomainModel dom;
    dom.boundary = pts.size() < 512 ? resample_closed(pts, 1024) : pts;
    if (signed_area(dom.boundary) < 0.0)
        std::reverse(dom.boundary.begin(), dom.boundary.end());
    if (std::abs(signed_area(dom.boundary)) < 1e-12)
        throw ValidationError("boundary curve encloses no area");

    // reject self-intersecting boundaries (non-adjacent segment pairs only)
    std::size_t n = dom.boundary.size();
    for (std::size_t i = 0; i < n; ++i) {
        Point a = dom.boundary[i], b = dom.boundary[(i + 1) % n];
        for (std::size_t k = i + 2; k < n; ++k) {
            if (i == 0 && k == n - 1) continue;
            Point c = dom.boundary[k], d = dom.boundary[(k + 1) % n];
            if (segments_cross(a, b, c, d))
                throw ValidationError("boundary curve is self-intersecting");
        }
    }

    dom.diam = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k)
            dom.diam = std::max(dom.diam, dist(dom.boundary[i], dom.boundary[k]));
    dom.big_r = r_factor * dom.diam;
    build_grid(dom, grid_n);
    return dom;
}

} // namespace plasma
