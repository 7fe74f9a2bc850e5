#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "plasma/errors.hpp"
#include "plasma/field.hpp"
#include "plasma/geometry.hpp"
#include "plasma/greens.hpp"

using plasma::Point;

namespace {

plasma::DomainModel unit_disk(int grid_n) {
    return plasma::make_disk_domain({0.0, 0.0}, 1.0, grid_n, 1.1);
}

std::vector<Point> ellipse_samples(double ax, double ay, int n) {
    std::vector<Point> pts(n);
    for (int k = 0; k < n; ++k) {
        double t = 2.0 * M_PI * k / n;
        pts[k] = {ax * std::cos(t), ay * std::sin(t)};
    }
    return pts;
}

} // namespace

TEST_CASE("closed-form disk backend reproduces the image-charge formulas") {
    auto dom = unit_disk(65);
    auto tbl = plasma::make_greens_table(dom);
    CHECK(tbl.method == plasma::GreensTable::Method::closed_form_disk);

    // Robin function ln R - ln(1-|z|^2)
    CHECK(std::abs(plasma::robin(tbl, {0.0, 0.0}) - std::log(2.2)) <= 1e-14);
    CHECK(std::abs(plasma::robin(tbl, {0.99, 0.0}) -
                   (std::log(2.2) - std::log(1.0 - 0.9801))) <= 1e-12);

    // g((-0.5,0),(0.5,0)) = ln R - ln(|z| * |x - z/|z|^2|) = ln(2.2/1.25)
    CHECK(std::abs(plasma::regular_part(tbl, {-0.5, 0.0}, {0.5, 0.0}) -
                   std::log(2.2 / 1.25)) <= 1e-13);

    // Gbar(x, 0) = ln(1/|x|)
    CHECK(std::abs(plasma::greens_value(tbl, {0.5, 0.0}, {0.0, 0.0}) - std::log(2.0)) <=
          1e-13);
    CHECK(std::abs(plasma::greens_value(tbl, {0.0, 0.25}, {0.0, 0.0}) - std::log(4.0)) <=
          1e-13);

    // symmetry of Gbar
    Point a{0.31, -0.22}, b{-0.45, 0.17};
    CHECK(std::abs(plasma::greens_value(tbl, a, b) - plasma::greens_value(tbl, b, a)) <=
          1e-13);

    // Gbar vanishes on the boundary
    CHECK(std::abs(plasma::greens_value(tbl, {1.0, 0.0}, {0.3, 0.1})) <= 1e-12);

    CHECK_THROWS_AS(plasma::greens_value(tbl, {0.3, 0.3}, {0.3, 0.3}),
                    plasma::ValidationError);
    CHECK_THROWS_AS(plasma::robin(tbl, {1.5, 0.0}), plasma::ValidationError);
}

TEST_CASE("normal derivative of Gbar matches the Poisson kernel on the disk") {
    auto dom = unit_disk(65);
    auto tbl = plasma::make_greens_table(dom);

    // z at the centre: constant -1
    for (double t : {0.0, 0.13, 0.5, 0.77})
        CHECK(std::abs(plasma::boundary_normal_derivative(tbl, {0.0, 0.0}, t) + 1.0) <=
              1e-13);

    // z = (0.5, 0): -(1-|z|^2)/|p-z|^2 is -3 at p=(1,0) and -1/3 at p=(-1,0)
    CHECK(std::abs(plasma::boundary_normal_derivative(tbl, {0.5, 0.0}, 0.0) + 3.0) <=
          1e-12);
    CHECK(std::abs(plasma::boundary_normal_derivative(tbl, {0.5, 0.0}, 0.5) + 1.0 / 3.0) <=
          1e-12);

    // total flux: the integral of -d_nu Gbar over the boundary is 2*pi
    int n = 512;
    double flux = 0.0;
    double ds = 2.0 * M_PI / n;  // arc length element of the unit circle
    for (int k = 0; k < n; ++k)
        flux -= plasma::boundary_normal_derivative(tbl, {0.37, -0.21},
                                                   static_cast<double>(k) / n) * ds;
    CHECK(std::abs(flux - 2.0 * M_PI) <= 1e-10);
}

TEST_CASE("grid backend agrees with the closed form on the disk") {
    auto dom = unit_disk(129);  // h = 1/64
    auto grid_tbl = plasma::make_greens_table(dom, plasma::GreensTable::Method::grid_solve);
    auto exact_tbl = plasma::make_greens_table(dom);

    for (Point z : {Point{0.0, 0.0}, Point{0.5, 0.0}, Point{-0.2, 0.33}}) {
        auto g_grid = plasma::solve_regular_part(grid_tbl, z);
        auto g_exact = plasma::solve_regular_part(exact_tbl, z);
        double err = 0.0, scale = 0.0;
        const auto& g = dom.grid;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                if (!g.interior[g.idx(i, j)]) continue;
                if (dom.boundary_distance(g.point(i, j)) < 0.05) continue;
                err = std::max(err, std::abs(g_grid.at(i, j) - g_exact.at(i, j)));
                scale = std::max(scale, std::abs(g_exact.at(i, j)));
            }
        }
        CHECK(err <= 1e-3 * scale);
    }

    // Robin values track the closed form too
    CHECK(std::abs(plasma::robin(grid_tbl, {0.5, 0.0}) -
                   plasma::robin(exact_tbl, {0.5, 0.0})) <= 2e-4);
}

TEST_CASE("grid solve error drops by at least a factor 3 when h halves") {
    Point z{0.5, 0.0};
    double errs[2];
    int idx = 0;
    for (int grid_n : {129, 257}) {
        auto dom = unit_disk(grid_n);
        auto grid_tbl =
            plasma::make_greens_table(dom, plasma::GreensTable::Method::grid_solve);
        auto exact_tbl = plasma::make_greens_table(dom);
        auto g_grid = plasma::solve_regular_part(grid_tbl, z);
        auto g_exact = plasma::solve_regular_part(exact_tbl, z);
        double err = 0.0;
        const auto& g = dom.grid;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (g.interior[g.idx(i, j)] &&
                    dom.boundary_distance(g.point(i, j)) >= 0.05)
                    err = std::max(err, std::abs(g_grid.at(i, j) - g_exact.at(i, j)));
        errs[idx++] = err;
    }
    CHECK(errs[0] / errs[1] >= 3.0);
}

TEST_CASE("grid regular part is discretely harmonic away from the rim") {
    auto dom = unit_disk(129);
    auto tbl = plasma::make_greens_table(dom, plasma::GreensTable::Method::grid_solve);
    auto f = plasma::solve_regular_part(tbl, {0.3, -0.1});
    double h2 = dom.grid.h * dom.grid.h;
    double worst = 0.0;
    for (const auto& st : dom.grid.stencils) {
        if (!st.regular) continue;
        int i = st.node % dom.grid.nx, j = st.node / dom.grid.nx;
        worst = std::max(worst, std::abs(plasma::five_point_laplacian(f, i, j)) * h2);
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("repeated grid solves are bitwise reproducible") {
    Point z{0.21, 0.4};
    double v[2];
    for (int run = 0; run < 2; ++run) {
        auto dom = unit_disk(129);
        auto tbl = plasma::make_greens_table(dom, plasma::GreensTable::Method::grid_solve);
        v[run] = plasma::robin(tbl, z);
    }
    CHECK(v[0] == v[1]);
}

TEST_CASE("harmonic centre of the disk is its centre") {
    auto dom = unit_disk(129);
    auto tbl = plasma::make_greens_table(dom);
    Point c = plasma::harmonic_center(tbl);
    CHECK(plasma::norm(c) <= 1e-3);
}

TEST_CASE("harmonic centre of a 2x1 ellipse sits at the centroid") {
    auto dom = plasma::make_curve_domain(ellipse_samples(1.0, 0.5, 512), 129, 1.1);
    auto tbl = plasma::make_greens_table(dom);
    CHECK(tbl.method == plasma::GreensTable::Method::grid_solve);
    Point c = plasma::harmonic_center(tbl);
    CHECK(plasma::norm(c) <= 1e-2);
}

TEST_CASE("grid normal derivative tracks the closed form") {
    auto dom = unit_disk(257);
    auto grid_tbl = plasma::make_greens_table(dom, plasma::GreensTable::Method::grid_solve);
    auto exact_tbl = plasma::make_greens_table(dom);
    Point z{0.5, 0.0};
    for (double t : {0.0, 0.25, 0.5}) {
        double a = plasma::boundary_normal_derivative(grid_tbl, z, t);
        double b = plasma::boundary_normal_derivative(exact_tbl, z, t);
        CHECK(std::abs(a - b) <= 0.02 * std::abs(b));
        CHECK(a < 0.0);
    }
}

TEST_CASE("interior-margin validation for sources") {
    auto dom = unit_disk(65);
    auto tbl = plasma::make_greens_table(dom);
    CHECK_THROWS_AS(plasma::solve_regular_part(tbl, {0.999, 0.0}),
                    plasma::ValidationError);
    CHECK_THROWS_AS(plasma::solve_regular_part(tbl, {1.2, 0.0}),
                    plasma::ValidationError);
}
