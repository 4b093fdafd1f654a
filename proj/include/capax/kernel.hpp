#pragma once
// Closed-form kernels: the half-space extension kernel p^a_t, its
// normalization constant, the trace (Dirichlet-to-Neumann) constant, and the
// Riesz kernel. All functions are pure and thread-safe.
#include <array>

namespace capax {

struct KernelParams {
  int n = 1;        // boundary dimension, >= 1
  double alpha = 1; // order, in (0,2)
};

// Throws std::invalid_argument unless n >= 1 and 0 < alpha < 2.
void validate(const KernelParams& params);

// c(n,a) = Gamma((n+a)/2) / (pi^{n/2} Gamma(a/2)), via log-Gamma.
double normalization_constant(const KernelParams& params);

// p^a_t(x) = c(n,a) t^a (|x|^2+t^2)^{-(n+a)/2}.  x points to n coordinates.
double poisson_kernel(const KernelParams& params, const double* x, double t);
double poisson_kernel_radial(const KernelParams& params, double absx, double t);

// Trace constant c_a = Gamma(a/2) / (2^{1-a} Gamma(1-a/2)) relating the
// weighted normal derivative of the extension to the fractional Laplacian.
double trace_constant(double alpha);

// Constant of the pointwise (principal value) form of (-Delta)^{s/2}:
// s 2^s Gamma((n+s)/2) / (2 Gamma(1-s/2) pi^{n/2}).
double pv_constant(int n, double s);

// |x-y|^{beta-n} for 0 < beta < n; returns +infinity at x == y (the caller's
// quadrature layer must substitute a cell-averaged value there).
double riesz_kernel(int n, double beta, const double* x, const double* y);

// Mass of p^a_t outside the centered ball of radius L: exact for n=2, a
// two-term large-L asymptotic for n=1 (used for tail-corrected normalization
// checks; for n=2 callers should clip their quadrature to the disk r <= L).
double kernel_tail_mass(const KernelParams& params, double t, double L);

}  // namespace capax
