#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "plasma/errors.hpp"
#include "plasma/greens.hpp"
#include "plasma/routh.hpp"

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

TEST_CASE("hamiltonian reproduces the frozen disk value") {
    auto s = disk_setup();
    // h(0) + 2*0.5*Gbar(0,(0.6,0)) + 0.25*h((0.6,0)) with R = 2.2
    double H = plasma::hamiltonian(s.tbl, {0.0, 0.0}, {0.6, 0.0}, 1.0, 0.5);
    CHECK(std::abs(H - 1.6079690998784333) <= 1e-12);

    CHECK_THROWS_AS(plasma::hamiltonian(s.tbl, {0.2, 0.2}, {0.2, 0.2}, 1.0, 1.0),
                    plasma::ValidationError);
    CHECK_THROWS_AS(plasma::hamiltonian(s.tbl, {1.4, 0.0}, {0.0, 0.0}, 1.0, 1.0),
                    plasma::ValidationError);
}

TEST_CASE("hamiltonian blows up toward the boundary and toward collision") {
    auto s = disk_setup();
    double base = plasma::hamiltonian(s.tbl, {-0.3, 0.0}, {0.4, 0.0}, 1.0, 0.7);
    CHECK(plasma::hamiltonian(s.tbl, {-0.3, 0.0}, {0.995, 0.0}, 1.0, 0.7) > base + 1.0);
    CHECK(plasma::hamiltonian(s.tbl, {0.39, 0.0}, {0.4, 0.0}, 1.0, 0.7) > base + 1.0);
}

TEST_CASE("gradient matches a tighter finite difference and vanishes at the minimum") {
    auto s = disk_setup();
    Point z1{-0.2, 0.1}, z2{0.5, -0.3};
    auto grad = plasma::hamiltonian_gradient(s.tbl, z1, z2, 1.0, 0.5);
    // independent check of one component with a much smaller step
    double d = 1e-6;
    double fd = (plasma::hamiltonian(s.tbl, {z1.x + d, z1.y}, z2, 1.0, 0.5) -
                 plasma::hamiltonian(s.tbl, {z1.x - d, z1.y}, z2, 1.0, 0.5)) /
                (2 * d);
    CHECK(std::abs(grad[0] - fd) <= 5e-3 * std::max(1.0, std::abs(fd)));

    auto min = plasma::minimize_hamiltonian(s.tbl, 0.5);
    auto g0 = plasma::hamiltonian_gradient(s.tbl, min.z1, min.z2, 1.0, 0.5);
    for (double gc : g0) CHECK(std::abs(gc) <= 2e-2);
}

TEST_CASE("minimiser for gamma 0.3 keeps the heavy peak central") {
    auto s = disk_setup();
    auto res = plasma::minimize_hamiltonian(s.tbl, 0.3);

    // dense oracle: z2 restricted to the positive axis by rotational symmetry,
    // z1 free on a 0.02 lattice
    double best = std::numeric_limits<double>::infinity();
    for (double x2 = 0.02; x2 < 0.99; x2 += 0.02) {
        Point z2{x2, 0.0};
        for (double x1 = -0.98; x1 < 0.99; x1 += 0.02)
            for (double y1 = -0.98; y1 < 0.99; y1 += 0.02) {
                Point z1{x1, y1};
                if (std::hypot(x1, y1) > 0.97 || plasma::dist(z1, z2) < 0.02) continue;
                best = std::min(best, plasma::hamiltonian(s.tbl, z1, z2, 1.0, 0.3));
            }
    }
    CHECK(res.value <= best + 1e-6);
    CHECK(plasma::norm(res.z1) <= 0.1);
    CHECK(plasma::norm(res.z2) > plasma::norm(res.z1));
}

TEST_CASE("minimum value is rotation invariant for the symmetric weight") {
    auto s = disk_setup();
    auto res = plasma::minimize_hamiltonian(s.tbl, 1.0);
    double c = std::cos(0.5), sn = std::sin(0.5);
    auto rot = [&](Point p) { return Point{c * p.x - sn * p.y, sn * p.x + c * p.y}; };
    double v = plasma::hamiltonian(s.tbl, rot(res.z1), rot(res.z2), 1.0, 1.0);
    CHECK(std::abs(v - res.value) <= 1e-10);
    // the two peaks sit symmetrically about the centre
    CHECK(plasma::norm(res.z1 + res.z2) <= 5e-3);
}

TEST_CASE("minimisation is deterministic for a fixed seed") {
    auto s = disk_setup();
    auto a = plasma::minimize_hamiltonian(s.tbl, 0.5);
    auto b = plasma::minimize_hamiltonian(s.tbl, 0.5);
    CHECK(a.z1.x == b.z1.x);
    CHECK(a.z1.y == b.z1.y);
    CHECK(a.z2.x == b.z2.x);
    CHECK(a.z2.y == b.z2.y);
    CHECK(a.value == b.value);
}

TEST_CASE("warm start polish stays near the supplied configuration") {
    auto s = disk_setup();
    auto full = plasma::minimize_hamiltonian(s.tbl, 0.5);
    plasma::MinimizeOptions opt;
    opt.warm_start = {{full.z1, full.z2}};
    auto polished = plasma::minimize_hamiltonian(s.tbl, 0.5, opt);
    CHECK(std::abs(polished.value - full.value) <= 1e-9);
    CHECK(plasma::dist(polished.z1, full.z1) <= 1e-4);
}
