#pragma once

#include "plasma/cellfn.hpp"
#include "plasma/field.hpp"
#include "plasma/greens.hpp"

namespace plasma {

// Amplitudes (a1, a2) of the two bubbles, chosen so that the assembled
// profile takes the exact free-boundary levels 1 and -gamma at the two
// centres. They solve the 2x2 linear system
//   (1 - g(z1,z1)/L) a1 - (Gbar(z1,z2)/L) a2 = 1
//   -(Gbar(z1,z2)/L) a1 + (1 - g(z2,z2)/L) a2 = gamma
// with L = log(big_r/(s*epsilon)).
struct Amplitudes {
    double a1 = 0.0;
    double a2 = 0.0;
    double epsilon = 0.0;
    double log_factor = 0.0;  // L
};

Amplitudes solve_amplitudes(const GreensTable& table, Point z1, Point z2, double gamma,
                            double epsilon);

// Boundary-corrected bubble: the raw bubble minus its harmonic boundary
// excess, i.e. a(1 + k phi1 - g/L) in the core and (a/L) Gbar outside, zero
// on and beyond the boundary.
ScalarField project_bubble(const GreensTable& table, const CellParams& cell);
double eval_PU(const GreensTable& table, const CellParams& cell, Point x);

// Two-peak profile W = PU(a1, z1) - PU(a2, z2). eval_W gives the same
// expression pointwise for quadrature purposes; at grid nodes it agrees with
// the assembled field.
ScalarField assemble_W(const GreensTable& table, Point z1, Point z2,
                       const Amplitudes& amp);
double eval_W(const GreensTable& table, Point z1, Point z2, const Amplitudes& amp,
              Point x);

// Algebraically equivalent three-piece form obtained by substituting the
// amplitude equations: 1 + a1 k phi1 minus first-order Green increments near
// z1, the mirrored expression near z2, pure Green tails elsewhere. Used as a
// consistency cross-check of the assembly.
ScalarField assemble_W_closed_form(const GreensTable& table, Point z1, Point z2,
                                   double gamma, const Amplitudes& amp);

// Band-width constant for the level-set check, 1.2*M*s/a_min: M bounds the
// amplitude-weighted Green gradients at the two centres and a_min = min(a1,a2)
// is the realized amplitude lower bound. The asymptotic surrogate
// min(1/2, gamma/2) would inflate T until the certified ball is empty at any
// practical epsilon.
double calibrate_level_T(const GreensTable& table, Point z1, Point z2,
                         const Amplitudes& amp);

struct LevelSetReport {
    bool positive_core_ok = false;  // W > 1 on the shrunk core ball at z1
    bool negative_core_ok = false;  // -W > gamma on the shrunk core ball at z2
    bool annulus_ok = false;        // -gamma < W < 1 outside the grown balls
    double radius_inner = 0.0;      // s*eps*(1 - T*eps)
    double radius_outer = 0.0;      // s*eps*(1 + eps^sigma)
    double radius_pos = 0.0;        // measured extent of {W > 1} around z1
    double radius_neg = 0.0;        // measured extent of {-W > gamma} around z2
    int nodes_core_pos = 0;
    int nodes_core_neg = 0;
    double t_used = 0.0;
    double sigma = 0.0;
    double sigma_bound = 0.0;       // gamma1/(2*gamma2) diagnostic, not gated
};

// Checks the three-band structure of W: value above 1 on the shrunk core ball
// at z1, below -gamma on the one at z2, strictly between the levels outside
// the grown balls. Throws a resolution error when a shrunk ball holds fewer
// than 8 nodes.
LevelSetReport verify_level_sets(const ScalarField& W, Point z1, Point z2,
                                 double gamma, double epsilon, double T,
                                 double sigma = 0.5);

struct ErrorTermReport {
    ScalarField residual;   // eps^2 lap_h W + (W-1)_+ - (-W-gamma)_+
    double max_abs = 0.0;   // over nodes with a full uncut stencil
    double l2_norm = 0.0;
    double at_z1 = 0.0;     // interpolated
    double at_z2 = 0.0;
};

ErrorTermReport error_term(const ScalarField& W, Point z1, Point z2, double gamma,
                           double epsilon);

// Discrete energy (eps^2/2)|grad u|^2 - (1/2)(u-1)_+^2 - (1/2)(-u-gamma)_+^2
// by midpoint quadrature over grid cells.
double energy(const ScalarField& u, double gamma, double epsilon);

// Same functional evaluated on the assembled W by radial Gauss quadrature
// around the cores, locating the free boundary per angle; accurate to
// quadrature precision rather than grid resolution.
double energy_quadrature(const GreensTable& table, Point z1, Point z2,
                         const Amplitudes& amp, double gamma);

struct EnergyExpansion {
    double value = 0.0;
    double interaction = 0.0;  // -A1 (eps^2 k / L) H
    double volume = 0.0;       // eps^2 k A2
    double quadratic = 0.0;    // -eps^2 k^2 A3
};

EnergyExpansion reduced_energy_expansion(const GreensTable& table, Point z1, Point z2,
                                         const Amplitudes& amp);

} // namespace plasma
