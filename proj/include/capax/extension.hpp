#pragma once
// Half-space extension u(x,t) = p^a_t * f and friends: the subordination
// (spectral multiplier) route, the adjoint applied to discrete measures, the
// boundary derivative map, energy and mixed-norm functionals, and the
// nontangential / Hardy-Littlewood maximal operators.
#include <string>
#include <vector>

#include "capax/grid.hpp"
#include "capax/kernel.hpp"
#include "capax/measure.hpp"

namespace capax {

struct ExtensionResult {
  HalfSpaceField field;
  KernelParams params;
  std::string method;  // "direct" | "fast-convolution" | "subordination"
  // Subordination only: max disagreement between the two quadrature node
  // counts, and the flag that it exceeded 1e-8 somewhere.
  double max_node_diff = 0.0;
  bool quadrature_flag = false;
};

// Multiplier m(t,xi) = (1/Gamma(a/2)) int_0^inf e^{-s} e^{-(2 pi t xi)^2/(4s)}
// s^{a/2-1} ds, evaluated by a power series for small 2 pi t |xi| and
// generalized Gauss-Laguerre quadrature otherwise. m(t,0) = 1, decreasing to
// 0. If node_diff is given it receives the two-node-count disagreement for
// this evaluation (0 on the series branch).
double subordination_multiplier(double alpha, double t, double xi_abs,
                                double* node_diff = nullptr);

// Per-slice convolution with the kernel sampled on the full offset lattice
// (exact linear convolution on the box).
ExtensionResult extend(const GridFunction& f, const TLadder& ladder,
                       const KernelParams& params);
// Brute-force reference; O(size^2) per slice, keep to m <= 32.
ExtensionResult extend_direct(const GridFunction& f, const TLadder& ladder,
                              const KernelParams& params);
// Spectral route: pad the box by pad_factor per axis, multiply the DFT by
// m(t,xi), transform back and crop. Independent of the convolution route.
ExtensionResult subordination_extend(const GridFunction& f,
                                     const TLadder& ladder,
                                     const KernelParams& params,
                                     int pad_factor = 4);
// One slice of the spectral route (avoids building a full field).
GridFunction subordination_slice(const GridFunction& f, double t,
                                 const KernelParams& params,
                                 int pad_factor = 4);

// P*mu(x) = sum_atoms w p^a_t(x - z); exact sum, no quadrature.
GridFunction adjoint_extend(const DiscreteMeasure& mu, const GridSpec& spec,
                            const KernelParams& params);

struct PairingResult {
  double lhs = 0;  // <P f, mu>: field interpolated at the atoms
  double rhs = 0;  // <f, P* mu>: grid quadrature against the adjoint
  bool off_ladder = false;  // some atom's t matched no ladder slice
};
PairingResult duality_pairing_check(const GridFunction& f,
                                    const DiscreteMeasure& mu,
                                    const TLadder& ladder,
                                    const KernelParams& params);

struct DtnResult {
  GridFunction g;  // -c_a t^{1-a} d_t u extrapolated to t -> 0
  bool bandlimit_warning = false;   // top-quarter spectrum > 1% of energy
  bool divergence_flag = false;     // extrapolations from (t,2t) and (2t,4t)
                                    // disagree by > 25% in L^2
  double extrapolation_spread = 0;  // that relative disagreement
};
// t_min <= 0 selects the default L/1000. Derivatives in t are symmetric
// differences at t(1 +- 0.05); extrapolation removes the t^{2-a} error term
// from nodes t_min, 2 t_min, 4 t_min.
DtnResult dirichlet_to_neumann(const GridFunction& f,
                               const KernelParams& params, double t_min = 0.0,
                               int pad_factor = 4);

struct EnergyResult {
  double lhs = 0;    // int |2 pi xi|^a |fhat|^2 dxi
  double rhs = 0;    // int int t^{1-a} |grad u|^2 dx dt over the ladder
  double ratio = 0;  // lhs / rhs (NaN when rhs = 0)
  bool coarse_ladder_flag = false;  // doubling the ladder moves rhs > 2%
};
EnergyResult energy_identity(const GridFunction& f, const KernelParams& params,
                             int ladder_k = 64, int pad_factor = 4);

struct MixedNormResult {
  double lhs = 0;    // ||u(.,t)||_p
  double bound = 0;  // t^{n(1/p - 1/r)} ||f||_r
};
// Requires 1 <= r <= p (either may be infinity).
MixedNormResult mixed_norm_check(const GridFunction& f, double t, double p,
                                 double r, const KernelParams& params,
                                 int pad_factor = 4);

// N u(x) = sup { |u(y,t_j)| : ladder slice j, |y - x| < t_j } (Euclidean,
// strict).
GridFunction nontangential_max(const HalfSpaceField& u);
// M f(x) = max over r in {h, 2h, 4h, ..., 2L} of r^{-n} h^n sum_{|y-x|<r}
// |f(y)|.
GridFunction hl_max(const GridFunction& f);

}  // namespace capax
