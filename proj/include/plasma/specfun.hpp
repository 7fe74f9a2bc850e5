#pragma once

namespace plasma {

// Bessel functions of the first kind, orders 0 and 1, for |x| <= 50.
// Power series up to |x| = 12, trapezoid evaluation of the integral
// representation beyond; the branches agree to 1e-12 at the switch point.
double bessel_j0(double x);
double bessel_j1(double x);

// First positive zero of J0, located by bisection to 1e-13.
double first_zero_j0();

// Radial profile of the principal Dirichlet eigenfunction of the unit-mass
// core problem: phi1(r) = J0(r), positive on [0, s) and vanishing at r = s.
double phi1(double r);
double phi1_prime(double r);

// Constants derived from the core profile. All integrals are over the disk
// of radius s where phi1 is positive.
struct CoreConstants {
    double s;              // first zero of J0
    double j1_at_s;        // J1(s)
    double phi1_prime_s;   // phi1'(s) = -J1(s)
    double mass_phi1;      // integral of phi1 over B_s = 2*pi*s*J1(s)
    double mass_phi1_sq;   // integral of phi1^2 over B_s = pi*s^2*J1(s)^2
};

const CoreConstants& core_constants();

} // namespace plasma
