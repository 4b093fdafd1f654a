#pragma once

#include <string>
#include <utility>
#include <vector>

#include "capax/grid.hpp"
#include "capax/kernel.hpp"
#include "capax/measure.hpp"
#include "capax/sets.hpp"

namespace capax {

CompactSetGrid empty_set(const GridSpec& spec, const TLadder& ladder);
// Box {|x - x0| < r0/2, r0 < t - t0 < 2 r0} (Euclidean in x, both strict).
// Throws if no grid node or no ladder slice falls inside.
CompactSetGrid box_set(const GridSpec& spec, const TLadder& ladder,
                       const double* x0, double t0, double r0);
CompactSetGrid node_set(const GridSpec& spec, const TLadder& ladder,
                        std::vector<std::pair<int, int>> nodes);

struct SolverConfig {
  int dual_iters = 300;
  int primal_iters = 60;                        // per temperature stage
  std::vector<double> temps = {8, 32, 128, 512};  // penalty sharpness ladder
  double tol = 1e-3;  // relative change of the rescaled value between stages
};

struct CapacityResult {
  double primal_value = 0;  // feasible upper bound (rescaled iterate)
  double dual_value = 0;    // feasible lower bound (normalized measure)
  double rel_gap = 0;       // (primal - dual)/primal
  GridFunction minimizer;   // feasible f >= 0 realizing primal_value
  DiscreteMeasure maximizer;  // weights >= 0 on E, ||adjoint||_{p'} = 1
  int iterations = 0;
  double tolerance = 0;
  bool converged = true;
};

// min sum f^p h^n over f >= 0 with (P f)(node) >= 1 on E; smoothed-penalty
// projected gradient plus exact feasibility rescaling, so the reported value
// is an upper bound regardless of optimizer quality.  p in (1.05, 16].
CapacityResult capacity_primal(const CompactSetGrid& E, double p,
                               const KernelParams& params,
                               const SolverConfig& cfg = {});
// max (sum w)^p over w >= 0 on E with ||sum_e w_e K(. - x_e, t_e)||_{p'} <= 1;
// exponentiated-gradient ascent, final normalization makes the constraint
// active, so the reported value is a feasible lower bound.
CapacityResult capacity_dual(const CompactSetGrid& E, double p,
                             const KernelParams& params,
                             const SolverConfig& cfg = {});
// Dual first, then primal warm-started from the dual certificate; fills both
// sides and the gap.
CapacityResult capacity(const CompactSetGrid& E, double p,
                        const KernelParams& params,
                        const SolverConfig& cfg = {});

// Equilibrium identities for the scaled maximizer mu_K = value^{1/p'} mu:
// mass, int (P* mu_K)^{p'} dx, and the mutual energy int P (P* mu_K)^{p'-1}
// d mu_K all estimate the capacity; f^p should match (P* mu_K)^{p'}.
struct EquilibriumReport {
  double capacity = 0;       // dual value used as the reference
  double mass = 0;           // mu_K(K)
  double dual_norm_int = 0;  // int (P* mu_K)^{p'} dx
  double mutual_energy = 0;  // int P (P* mu_K)^{p'-1} d mu_K
  double max_rel_dev = 0;    // max pairwise deviation of the four above
  double pointwise_residual = 0;  // ||f^p - (P* mu_K)^{p'}||_1 / ||f^p||_1
  double bound = 0;          // contract: max_rel_dev <= 3 rel_gap + 0.05
  bool ok = false;
};
// Refuses results that did not converge or have rel_gap > 0.1.
EquilibriumReport equilibrium_check(const CapacityResult& result,
                                    const CompactSetGrid& E, double p,
                                    const KernelParams& params);

struct CheckLine {
  std::string name;
  double lhs = 0, rhs = 0, ratio = 0;
  bool pass = false;
};
struct AxiomsReport {
  std::vector<CheckLine> checks;  // monotonicity, subadditivity, translation
  bool pass = false;
};
// Randomized nested/disjoint box families on a fixed 1d grid.
AxiomsReport capacity_axioms_suite(const KernelParams& params, double p,
                                   unsigned seed = 1,
                                   const SolverConfig& cfg = {});

struct BallScalingReport {
  std::vector<double> radii;
  std::vector<double> values;      // C(B_r(0,0))
  std::vector<double> normalized;  // C / r^n
  double spread = 0;               // max/min of normalized
  bool pass = false;               // spread <= 1.25
};
BallScalingReport ball_scaling_check(double p, const KernelParams& params,
                                     const std::vector<double>& radii,
                                     const GridSpec& spec,
                                     const SolverConfig& cfg = {});

struct BallBoundsReport {
  struct Row {
    double r0 = 0, t0 = 0, value = 0;
    double lower_c = 0;  // value / r^n
    double upper_c = 0;  // value r^{n(p-1)} / (t0+r0)^{pn}
  };
  std::vector<Row> rows;
  double inf_lower = 0, sup_upper = 0;
  double sup_shallow = 0;  // sup value/r^n over rows with t0 <= r0
  bool finite = false;
};
BallBoundsReport ball_bounds_check(double p, const KernelParams& params,
                                   const std::vector<std::pair<double, double>>&
                                       sweep,  // (r0, t0)
                                   const GridSpec& spec,
                                   const SolverConfig& cfg = {});

struct StrongTypeReport {
  std::vector<double> levels;      // descending lambda grid
  std::vector<double> capacities;  // C(E_lambda) per level
  double lhs = 0;      // sum C(E_lambda_j) (lambda_j^p - lambda_{j-1}^p)
  double fp_norm = 0;  // ||f||_p^p
  double ratio = 0;    // lhs / fp_norm; NaN when f = 0
  bool too_coarse = false;
};
// Levels <= 0 entries are ignored; an empty levels vector selects a dyadic
// grid from max field value down 12 octaves.
StrongTypeReport strong_type_check(const GridFunction& f, double p,
                                   const KernelParams& params,
                                   std::vector<double> levels = {},
                                   int ladder_k = 48,
                                   const SolverConfig& cfg = {});

}  // namespace capax
