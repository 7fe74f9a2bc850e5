#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "plasma/errors.hpp"
#include "plasma/greens.hpp"
#include "plasma/sweep.hpp"

using plasma::Point;

namespace {

struct Setup {
    plasma::DomainModel dom;
    plasma::GreensTable tbl;
};

Setup disk_setup(int grid_n = 65) {
    Setup s{plasma::make_disk_domain({0.0, 0.0}, 1.0, grid_n, 1.1), {}};
    s.tbl = plasma::make_greens_table(s.dom);
    return s;
}

} // namespace

TEST_CASE("boundary attraction profile is flat seen from the disk center") {
    auto s = disk_setup();
    auto ex = plasma::boundary_extremizer(s.tbl, {0.0, 0.0});
    CHECK(ex.flat);
    CHECK(std::abs(ex.max_value + 1.0) <= 1e-9);
    CHECK(std::abs(ex.max_abs - 1.0) <= 1e-9);
}

TEST_CASE("signed and absolute boundary extremizers sit at opposite ends") {
    auto s = disk_setup();
    auto ex = plasma::boundary_extremizer(s.tbl, {0.5, 0.0});
    CHECK_FALSE(ex.flat);
    // Poisson kernel: the normal derivative at p is -(1-|z|^2)/|p-z|^2
    CHECK(std::abs(ex.max_value + 1.0 / 3.0) <= 1e-8);
    CHECK(plasma::dist(ex.argmax_value, {-1.0, 0.0}) <= 1e-5);
    CHECK(std::abs(ex.max_abs - 3.0) <= 1e-8);
    CHECK(plasma::dist(ex.argmax_abs, {1.0, 0.0}) <= 1e-5);
    // the reported value is the derivative evaluated at the reported point
    CHECK(ex.max_value ==
          plasma::boundary_normal_derivative(s.tbl, {0.5, 0.0}, ex.t_value));

    CHECK_THROWS_AS(plasma::boundary_extremizer(s.tbl, {1.5, 0.0}),
                    plasma::ValidationError);
}

TEST_CASE("depth profile reproduces the disk closed form") {
    auto s = disk_setup();
    auto rep = plasma::verify_boundary_expansion(s.tbl, {0.0, 0.0}, {1.0, 0.0},
                                                 {0.1, 0.05, 0.02, 0.01});
    CHECK(std::abs(rep.nu_derivative - 1.0) <= 1e-9);
    REQUIRE(rep.rows.size() == 4);
    for (const auto& row : rep.rows) {
        // Robin value at depth d on the unit disk: log R - log(2d - d^2)
        double oracle = std::log(2.2) - std::log(2.0 * row.depth - row.depth * row.depth);
        CHECK(std::abs(row.robin_value - oracle) <= 1e-10);
        CHECK_FALSE(row.extrapolated);
    }
    // the ratio column decreases toward the limit 1 as the depth shrinks
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        CHECK(rep.rows[i].gbar_over_depth < rep.rows[i - 1].gbar_over_depth);
    CHECK(std::abs(rep.rows.back().gbar_over_depth - 1.00503359) <= 1e-6);

    CHECK_THROWS_AS(
        plasma::verify_boundary_expansion(s.tbl, {0.0, 0.0}, {1.0, 0.0}, {0.5}),
        plasma::ValidationError);
    CHECK_THROWS_AS(
        plasma::verify_boundary_expansion(s.tbl, {0.0, 0.0}, {1.0, 0.0}, {}),
        plasma::ValidationError);
    CHECK_THROWS_AS(
        plasma::verify_boundary_expansion(s.tbl, {0.0, 0.0}, {1.0, 0.0}, {0.1, 0.0}),
        plasma::ValidationError);
}

TEST_CASE("shallow depth rows are tagged as extrapolated with the grid backend") {
    auto s = disk_setup();
    auto grid_tbl =
        plasma::make_greens_table(s.dom, plasma::GreensTable::Method::grid_solve);
    double h = s.dom.grid.h;
    auto rep = plasma::verify_boundary_expansion(s.tbl, {0.0, 0.0}, {1.0, 0.0},
                                                 {h, 4.0 * h});
    CHECK_FALSE(rep.rows[0].extrapolated);  // closed form needs no grading
    auto repg = plasma::verify_boundary_expansion(grid_tbl, {0.0, 0.0}, {1.0, 0.0},
                                                  {h, 4.0 * h});
    CHECK(repg.rows[0].extrapolated);
    CHECK_FALSE(repg.rows[1].extrapolated);
    // the graded row still tracks the exact ratio to leading order
    CHECK(std::abs(repg.rows[0].gbar_over_depth - rep.rows[0].gbar_over_depth) <= 0.1);
}

TEST_CASE("gamma sweep walks the peaks toward center and boundary") {
    auto s = disk_setup(257);
    std::vector<double> gs{1.0, 0.5, 0.3, 0.2, 0.1, 0.05};
    auto recs = plasma::gamma_sweep(s.tbl, gs);
    REQUIRE(recs.size() == gs.size());
    double h = s.dom.grid.h;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        CHECK(r.minimization_ok);
        CHECK(r.note.empty());
        CHECK(r.hamiltonian_value <= r.reference_upper_bound + 1e-9);
        CHECK(plasma::dist(r.z1, r.z2) >= 5.0 * h);
        CHECK(s.dom.boundary_distance(r.z1) >= 0.3);
        if (i > 0) CHECK(r.dist_to_center <= recs[i - 1].dist_to_center + 2.0 * h);
    }
    CHECK(recs.back().dist_to_center <= 0.05);
    CHECK(recs.back().dist_to_boundary <= 0.1);

    // the gamma=1 row is exchange symmetric in value
    CHECK(std::abs(plasma::hamiltonian(s.tbl, recs[0].z2, recs[0].z1, 1.0, 1.0) -
                   recs[0].hamiltonian_value) <= 1e-12);

    // the boundary point that attracts the negative peak is the signed
    // extremizer of the normal derivative, not the largest in magnitude
    auto ex = plasma::boundary_extremizer(s.tbl, recs.back().z1);
    CHECK(plasma::dist(recs.back().boundary_projection, ex.argmax_value) <= 1e-3);
    CHECK(plasma::dist(recs.back().boundary_projection, ex.argmax_abs) >= 1.0);
}

TEST_CASE("gamma list validation") {
    auto s = disk_setup();
    CHECK_THROWS_AS(plasma::gamma_sweep(s.tbl, {}), plasma::ValidationError);
    CHECK_THROWS_AS(plasma::gamma_sweep(s.tbl, {0.3, 0.5}), plasma::ValidationError);
    CHECK_THROWS_AS(plasma::gamma_sweep(s.tbl, {1.5, 0.5}), plasma::ValidationError);
    CHECK_THROWS_AS(plasma::gamma_sweep(s.tbl, {0.5, 0.5}), plasma::ValidationError);
}
