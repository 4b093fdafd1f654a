#pragma once
// Fractional Laplacian (spectral and principal-value routes), homogeneous
// Sobolev seminorms, fractional perimeter with its coarea identity, Riesz
// capacity, and the Riesz convolution bound diagnostic.
#include <string>
#include <utility>
#include <vector>

#include "capax/grid.hpp"
#include "capax/kernel.hpp"
#include "capax/sets.hpp"

namespace capax {

enum class SobolevBranch { fourier, difference };

struct SobolevParams {
  double beta = 0.5;  // in (0, n)
  double p = 2.0;     // fourier: in (1, n/beta); difference: 1 or n/beta
  SobolevBranch branch = SobolevBranch::fourier;

  int k() const;  // difference order, 1 + floor(beta)
};

void validate(const SobolevParams& sp, int n);

// Spectral route: inverse transform of (2 pi |xi|)^s f_hat on the periodic
// grid frequencies xi_k = k/(2L). If bandlimit_ok is given it receives
// whether the top-quarter frequencies carry < 1% of the spectral energy.
GridFunction frac_laplacian_fourier(const GridFunction& f, double s,
                                    bool* bandlimit_ok = nullptr);

// Principal-value route (1D only): exact per-cell kernel integrals away from
// the diagonal, a second-order Taylor correction on the diagonal cell, and
// the analytic power tail outside the box (f treated as compactly
// supported).
GridFunction frac_laplacian_pv(const GridFunction& f, double s);

// Homogeneous Sobolev seminorm. The difference branch integrates
// ||delta_h^k f||_p^p / |h|^{n+p beta} over |h| in [h_cell, hmax] on exact
// grid-multiple shifts, adds a Taylor-estimated correction for |h| < h_cell,
// and (optionally) reports the analytic bound for the discarded |h| > hmax
// tail through tail_bound. hmax <= 0 selects the default 4L.
double sobolev_norm(const GridFunction& f, const SobolevParams& sp,
                    double hmax = 0.0, double* tail_bound = nullptr);

// Per_s(E) = int_E int_{E^c} |x-y|^{-n-s}, complement taken in all of R^n.
// 1D pairs and outer tails are closed-form exact. 2D pairs reduce exactly to
// the difference variables (triangular cell weights); the resulting 2D
// integral uses Gauss panels graded toward the shared-boundary singularity
// plus an analytic core, midpoint rule for far pairs, and the outer tail
// half-plane/corner reductions.
double frac_perimeter(const IndicatorSet& E, double s);

struct CoareaReport {
  double seminorm = 0.0;    // ||f||_{W^{s,1}} by the difference branch
  double layer_sum = 0.0;   // 2 int Per_s({f > t}) dt on the value lattice
  double ratio = 0.0;       // seminorm / layer_sum
  bool level_mismatch = false;  // f was not constant on cells of the lattice
};

// Levels default to the distinct positive cell values of f.
CoareaReport coarea_check(const GridFunction& f, double s,
                          std::vector<double> levels = {});

struct PerimeterExtensionReport {
  double perimeter = 0.0;
  double energy = 0.0;  // Gamma-weighted extension gradient energy
  double ratio = 0.0;   // energy / perimeter
  bool ladder_coarse = false;
};

// Per_s(E) against the alpha = s extension energy of 1_E times the constant
// Gamma((n+s)/2) / (2 pi^{n/2} Gamma(s/2)).
PerimeterExtensionReport perimeter_via_extension(const IndicatorSet& E,
                                                 double s, int ladder_k = 48);

struct FracCapacityResult {
  double value = 0.0;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double rel_gap = 0.0;
  bool converged = true;
};

// Riesz capacity of an open cell union: for p in (1, n/beta), minimizes
// ||g||_p^p over g >= 0 with I_beta * g >= 1 on O (linear convolution, no
// periodic images), primal and dual bounds as in the box capacity solver.
// For p = 1 returns 2 Per_beta of the 1-cell dilation of O.
FracCapacityResult frac_capacity(const IndicatorSet& O, double beta, double p);

struct FracStrongTypeReport {
  std::vector<double> levels;
  double lhs_direct = 0.0;   // int Cap({|f| >= s}) ds^p, level surrogate
  double lhs_maximal = 0.0;  // same for {Mf >= s}
  double norm_p = 0.0;       // ||f||_{W^{beta,p}}^p, fourier branch
  double ratio_direct = 0.0;
  double ratio_maximal = 0.0;
  bool too_coarse = false;
};

FracStrongTypeReport frac_strong_type_check(const GridFunction& f, double beta,
                                            double p,
                                            std::vector<double> levels = {});

struct RieszBoundReport {
  struct Row {
    double x = 0.0;
    double t = 0.0;
    double lhs = 0.0;
    double ratio = 0.0;  // lhs / (t^2 + x^2)^{(beta-n)/2}
  };
  std::vector<Row> rows;
  double sup_ratio = 0.0;
};

// lhs(x,t) = int p_t(y) |y-x|^{beta-n} dy by singular-aware quadrature on a
// per-sample scaled grid; samples default to a log-spaced (x,t) sweep.
RieszBoundReport riesz_convolution_bound_check(
    const KernelParams& params, double beta,
    const std::vector<std::pair<double, double>>& samples = {},
    int resolution = 4096);

}  // namespace capax
