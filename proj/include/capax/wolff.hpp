#pragma once
// Hedberg-Wolff potentials of a discrete measure, their dyadic-lattice
// counterpart, the parabolic maximal function, and the two norm-comparison
// diagnostics tying them to the dual kernel transform.
//
// All box masses use the off-center box family
//   B_r(x0, t0) = { |x - x0| < r/2,  r < t - t0 < 2r }   (open conditions),
// so a box never contains its own base point; potentials evaluated at an
// atom's location count only the mass strictly above it.
#include <array>
#include <vector>

#include "capax/grid.hpp"
#include "capax/kernel.hpp"
#include "capax/measure.hpp"

namespace capax {

// Log-spaced radii discretizing the truncated dr/r integrals.
struct RadiusGrid {
  std::vector<double> r;  // strictly increasing, all positive
};

void validate(const RadiusGrid& rg);
RadiusGrid log_radius_grid(double r_min, double r_max, int count);
// Radii spanning [h/2, 8L].
RadiusGrid default_radius_grid(const GridSpec& spec, int count = 256);

// Mass strictly inside B_r(x0, t0); boundary atoms excluded.
double box_mass(const DiscreteMeasure& mu, double r, const double* x0,
                double t0);

// M mu(x) = sup_r r^{-n} mu(B_r(x, r)); with the base point at t0 = r the
// boxes ride at heights (2r, 3r). Sup taken over the radius grid.
double parabolic_maximal(const DiscreteMeasure& mu, const double* x,
                         const RadiusGrid& rg);

// H_p mu(x,t) = int_0^inf (r^{-n} mu(B_r(x,t)))^{p'-1} dr/r by log-trapezoid
// quadrature over rg. Requires p > 1.
double wolff_potential(const DiscreteMeasure& mu, const double* x, double t,
                       double p, const RadiusGrid& rg);

// Same integral, exactly: the integrand is piecewise constant between atom
// entry/exit radii, so enumerating breakpoints evaluates it in closed form.
// This is the reference the quadrature is tested against.
double wolff_potential_exact(const DiscreteMeasure& mu, const double* x,
                             double t, double p);

// Dyadic Wolff potential at each atom: sum over lattice cubes of side
// l = 2^{-g} (then shifted by `shift`, an offset in the closed upper half
// space) containing the atom of (mu(cube)/l^n)^{p'-1}. Cubes are open and
// their t-extent lies above the shift height; generations run over
// [g_lo, g_hi]. With auto_widen the coarse end extends until its boundary
// generation contributes < 0.1% to every atom's sum; the fine end stays as
// given, since an atom's own-cube term (w/l^n)^{p'-1} grows without bound
// for a purely atomic measure.
std::vector<double> dyadic_wolff(const DiscreteMeasure& mu, double p,
                                 int g_lo = -6, int g_hi = 6,
                                 const std::array<double, 3>& shift = {0.0,
                                                                       0.0,
                                                                       0.0},
                                 bool auto_widen = true);

// || M mu ||_p vs || P* mu ||_p on the grid (both truncated to the core box).
struct MaximalComparisonReport {
  double maximal_norm = 0.0;
  double dual_norm = 0.0;
  double ratio = 0.0;  // maximal_norm / dual_norm
};

MaximalComparisonReport maximal_comparison_check(const DiscreteMeasure& mu,
                                                 double p,
                                                 const KernelParams& params,
                                                 const GridSpec& spec,
                                                 int rcount = 256);

// || P* mu ||_{p'}^{p'} vs int H_p mu dmu (breakpoint-exact potentials).
// The ratio may be infinite when no atom sees another (e.g. a single atom).
struct WolffEnergyReport {
  double dual_energy = 0.0;   // grid quadrature of (P* mu)^{p'}
  double wolff_energy = 0.0;  // sum_a w_a H_p mu(x_a, t_a)
  double ratio = 0.0;         // dual_energy / wolff_energy
};

WolffEnergyReport wolff_energy_check(const DiscreteMeasure& mu, double p,
                                     const KernelParams& params,
                                     const GridSpec& spec);

}  // namespace capax
