#include "plasma/specfun.hpp"

#include <cmath>

namespace plasma {

namespace {

// Alternating power series. Safe up to |x| ~ 13: the largest intermediate
// term there is ~5e3, so cancellation costs at most ~4 digits.
double j0_series(double x) {
    double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int m = 1; m <= 48; ++m) {
        term *= -q / (static_cast<double>(m) * m);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

double j1_series(double x) {
    double q = 0.25 * x * x;
    double term = 0.5 * x, sum = term;
    for (int m = 1; m <= 48; ++m) {
        term *= -q / (static_cast<double>(m) * (m + 1));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// Integral representation J_n(x) = (1/2pi) int_0^{2pi} cos(n t - x sin t) dt.
// The integrand is periodic and entire, so the trapezoid rule converges
// geometrically; 256 nodes leave an error far below 1e-13 for x <= 50.
double jn_integral(int n, double x) {
    constexpr int N = 256;
    double acc = 0.0;
    for (int k = 0; k < N; ++k) {
        double t = 2.0 * M_PI * k / N;
        acc += std::cos(n * t - x * std::sin(t));
    }
    return acc / N;
}

} // namespace

double bessel_j0(double x) {
    double ax = std::abs(x);
    return ax <= 12.0 ? j0_series(ax) : jn_integral(0, ax);
}

double bessel_j1(double x) {
    double ax = std::abs(x);
    double v = ax <= 12.0 ? j1_series(ax) : jn_integral(1, ax);
    return x < 0.0 ? -v : v;
}

double first_zero_j0() {
    static const double s = [] {
        double lo = 2.0, hi = 3.0;
        for (int i = 0; i < 80; ++i) {
            double mid = 0.5 * (lo + hi);
            if (bessel_j0(mid) > 0.0)
                lo = mid;
            else
                hi = mid;
            if (hi - lo < 1e-15) break;
        }
        return 0.5 * (lo + hi);
    }();
    return s;
}

double phi1(double r) { return bessel_j0(r); }

double phi1_prime(double r) { return -bessel_j1(r); }

const CoreConstants& core_constants() {
    static const CoreConstants c = [] {
        CoreConstants k;
        k.s = first_zero_j0();
        k.j1_at_s = bessel_j1(k.s);
        k.phi1_prime_s = -k.j1_at_s;
        // from (r J1)' = r J0 and int_0^s J0^2 r dr = (s^2/2) J1(s)^2
        k.mass_phi1 = 2.0 * M_PI * k.s * k.j1_at_s;
        k.mass_phi1_sq = M_PI * k.s * k.s * k.j1_at_s * k.j1_at_s;
        return k;
    }();
    return c;
}

} // namespace plasma
