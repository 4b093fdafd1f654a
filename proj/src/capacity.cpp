#include "capax/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "capax/numerics.hpp"

namespace capax {

namespace {

void validate_p(double p) {
  if (!(p > 1.05 && p <= 16.0))
    throw std::invalid_argument("capacity: p outside the supported (1.05, 16]");
}

void validate_set(const CompactSetGrid& E) {
  validate(E.spec);
  validate(E.ladder);
  auto ts = E.ladder.slices();
  for (const HalfSpaceNode& hn : E.nodes) {
    if (hn.node >= E.spec.size() || hn.slice < 0 || hn.slice >= E.ladder.k ||
        !(ts[hn.slice] > 0.0))
      throw std::invalid_argument("CompactSetGrid: node outside grid/ladder");
  }
}

// Forward/adjoint pair between grid functions and the atoms of E, grouped by
// slice so each application is one lattice convolution per distinct height.
// Both directions index the same sampled-kernel tables, so
// <forward(f), w> = h^n <f, adjoint_density(w)> holds to roundoff and the
// primal/dual bounds they certify obey weak duality exactly.
struct SetOperator {
  const GridSpec spec;
  std::vector<double> heights;             // distinct slice heights
  std::vector<std::vector<double>> kw;     // kernel table per height
  std::vector<std::vector<int>> members;   // atom index list per height
  std::vector<int> node_of;                // flat grid node per atom
  std::vector<double> t_of;                // height per atom

  SetOperator(const CompactSetGrid& E, const KernelParams& params)
      : spec(E.spec) {
    auto ts = E.ladder.slices();
    std::map<int, std::vector<int>> by_slice;
    node_of.resize(E.nodes.size());
    t_of.resize(E.nodes.size());
    for (std::size_t a = 0; a < E.nodes.size(); ++a) {
      node_of[a] = static_cast<int>(E.nodes[a].node);
      t_of[a] = ts[E.nodes[a].slice];
      by_slice[E.nodes[a].slice].push_back(static_cast<int>(a));
    }
    double h = spec.h();
    for (auto& [j, list] : by_slice) {
      heights.push_back(ts[j]);
      members.push_back(std::move(list));
      std::vector<double> table;
      if (spec.n == 1) {
        table.resize(2 * spec.m);
        for (int d = -spec.m; d < spec.m; ++d) {
          double x = d * h;
          table[d + spec.m] = poisson_kernel(params, &x, ts[j]);
        }
      } else {
        table.resize(4 * static_cast<std::size_t>(spec.m) * spec.m);
        for (int d0 = -spec.m; d0 < spec.m; ++d0)
          for (int d1 = -spec.m; d1 < spec.m; ++d1) {
            double x[2] = {d0 * h, d1 * h};
            table[static_cast<std::size_t>(d0 + spec.m) * 2 * spec.m +
                  (d1 + spec.m)] = poisson_kernel(params, x, ts[j]);
          }
      }
      kw.push_back(std::move(table));
    }
  }

  std::size_t atom_count() const { return node_of.size(); }

  // (P f)(atom) = h^n sum_y K(x_a - y, t_a) f(y).
  std::vector<double> forward(const GridFunction& f) const {
    std::vector<double> out(atom_count(), 0.0);
    for (std::size_t s = 0; s < heights.size(); ++s) {
      std::vector<double> conv = convolve_offsets(f, kw[s]);
      for (int a : members[s]) out[a] = conv[node_of[a]];
    }
    return out;
  }

  // (P* w)(y) = sum_a w_a K(y - x_a, t_a); a density, no h^n factor.
  GridFunction adjoint(const std::vector<double>& w) const {
    GridFunction acc{spec, std::vector<double>(spec.size(), 0.0)};
    double hn = std::pow(spec.h(), spec.n);
    for (std::size_t s = 0; s < heights.size(); ++s) {
      GridFunction atoms{spec, std::vector<double>(spec.size(), 0.0)};
      for (int a : members[s]) atoms.v[node_of[a]] += w[a];
      std::vector<double> conv = convolve_offsets(atoms, kw[s]);
      for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += conv[i] / hn;
    }
    return acc;
  }
};

DiscreteMeasure measure_from(const SetOperator& op,
                             const std::vector<double>& w) {
  DiscreteMeasure mu;
  mu.n = op.spec.n;
  mu.atoms.resize(op.atom_count());
  for (std::size_t a = 0; a < op.atom_count(); ++a) {
    auto pt = op.spec.point(op.node_of[a]);
    mu.atoms[a] = Atom{{pt[0], pt[1]}, op.t_of[a], w[a]};
  }
  return mu;
}

CapacityResult empty_result(const CompactSetGrid& E) {
  CapacityResult res;
  res.minimizer = GridFunction{E.spec, std::vector<double>(E.spec.size(), 0.0)};
  res.maximizer = DiscreteMeasure{E.spec.n, {}};
  return res;
}

// Exponentiated-gradient ascent on log(sum w) - log ||P* w||_{p'}; the
// objective is scale invariant, the final normalization activates the
// constraint.
void run_dual(const SetOperator& op, double p, const SolverConfig& cfg,
              CapacityResult& res) {
  double pp = p / (p - 1.0);
  std::size_t na = op.atom_count();
  std::vector<double> w(na, 1.0 / static_cast<double>(na));
  double hn = std::pow(op.spec.h(), op.spec.n);

  auto eval = [&](const std::vector<double>& ww, GridFunction& dens) {
    dens = op.adjoint(ww);
    std::vector<double> q(dens.v.size());
    for (std::size_t i = 0; i < q.size(); ++i)
      q[i] = std::pow(std::abs(dens.v[i]), pp);
    return num::pairwise_sum(q) * hn;  // S^{p'}
  };

  GridFunction dens;
  double spp = eval(w, dens);
  double wsum = 1.0;
  double obj = std::log(wsum) - std::log(spp) / pp;
  double eta = 0.5;
  int it = 0;
  for (; it < cfg.dual_iters; ++it) {
    // grad_a log obj = 1/W - B_a / S^{p'},  B = forward((P* w)^{p'-1}).
    GridFunction qf{op.spec, std::vector<double>(dens.v.size())};
    for (std::size_t i = 0; i < dens.v.size(); ++i)
      qf.v[i] = std::pow(std::abs(dens.v[i]), pp - 1.0);
    std::vector<double> B = op.forward(qf);
    bool moved = false;
    while (eta > 1e-8) {
      std::vector<double> trial(na);
      for (std::size_t a = 0; a < na; ++a)
        trial[a] = w[a] * std::exp(eta * (1.0 - wsum * B[a] / spp));
      GridFunction tdens;
      double tspp = eval(trial, tdens);
      double tsum = num::pairwise_sum(trial);
      double tobj = std::log(tsum) - std::log(tspp) / pp;
      if (tobj > obj) {
        w = std::move(trial);
        dens = std::move(tdens);
        spp = tspp;
        wsum = tsum;
        double gain = tobj - obj;
        obj = tobj;
        eta = std::min(eta * 2.0, 4.0);
        moved = true;
        if (gain < 1e-12 * std::abs(obj) + 1e-14) it = cfg.dual_iters;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
  }
  // Normalize with a hair of slack so the certificate stays feasible, and
  // weak duality against the primal bound holds, under float rounding too.
  double s = std::pow(spp, 1.0 / pp) * (1.0 + 1e-12);
  for (auto& v : w) v /= s;
  res.dual_value = std::pow(wsum / s, p);
  res.maximizer = measure_from(op, w);
  res.iterations += it;
}

// Smoothed-penalty projected gradient with exact feasibility rescaling; every
// iterate's rescaled value is a true upper bound and the best one is kept.
void run_primal(const SetOperator& op, double p, const SolverConfig& cfg,
                const GridFunction* warm, double penalty_scale,
                CapacityResult& res) {
  const GridSpec& s = op.spec;
  double hn = std::pow(s.h(), s.n);
  std::size_t N = s.size();
  GridFunction f{s, std::vector<double>(N, 0.0)};
  if (warm && warm->v.size() == N) f = *warm;

  double best = std::numeric_limits<double>::infinity();
  GridFunction best_f = f;
  double kappa = 2.0 * p * std::max(penalty_scale, 1e-12);

  auto rescaled = [&](const GridFunction& g, const std::vector<double>& field) {
    double c = *std::min_element(field.begin(), field.end());
    if (!(c > 0.0)) return;
    std::vector<double> q(N);
    for (std::size_t i = 0; i < N; ++i) q[i] = std::pow(g.v[i] / c, p);
    double val = num::pairwise_sum(q) * hn;
    if (val < best) {
      best = val;
      best_f = g;
      for (auto& v : best_f.v) v /= c;
    }
  };

  double prev_stage = std::numeric_limits<double>::infinity();
  res.converged = false;
  for (double T : cfg.temps) {
    auto energy = [&](const GridFunction& g, const std::vector<double>& field) {
      std::vector<double> q(N);
      for (std::size_t i = 0; i < N; ++i) q[i] = std::pow(g.v[i], p);
      double e = num::pairwise_sum(q) * hn;
      std::vector<double> pen(field.size());
      for (std::size_t a = 0; a < field.size(); ++a) {
        double z = T * (1.0 - field[a]);
        pen[a] = (z > 30.0 ? z : std::log1p(std::exp(z))) / T;
      }
      return e + kappa * num::pairwise_sum(pen);
    };

    std::vector<double> field = op.forward(f);
    rescaled(f, field);
    double E = energy(f, field);
    double step = 1.0;
    for (int it = 0; it < cfg.primal_iters; ++it) {
      std::vector<double> sig(field.size());
      for (std::size_t a = 0; a < field.size(); ++a)
        sig[a] = 1.0 / (1.0 + std::exp(-T * (1.0 - field[a])));
      GridFunction adj = op.adjoint(sig);
      std::vector<double> grad(N);
      for (std::size_t i = 0; i < N; ++i)
        grad[i] = hn * (p * std::pow(f.v[i], p - 1.0) - kappa * adj.v[i]);
      bool moved = false;
      while (step > 1e-12) {
        GridFunction trial{s, std::vector<double>(N)};
        for (std::size_t i = 0; i < N; ++i)
          trial.v[i] = std::max(0.0, f.v[i] - step * grad[i]);
        std::vector<double> tfield = op.forward(trial);
        double tE = energy(trial, tfield);
        if (tE < E) {
          f = std::move(trial);
          field = std::move(tfield);
          E = tE;
          rescaled(f, field);
          step *= 2.0;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      ++res.iterations;
      if (!moved) break;
    }
    if (std::isfinite(best) && std::isfinite(prev_stage) &&
        std::abs(best - prev_stage) <= cfg.tol * best) {
      res.converged = true;
    }
    prev_stage = best;
  }
  if (!std::isfinite(best)) {
    // No feasible rescaling found (optimizer collapsed to f = 0); fall back
    // to the flat competitor, which is always feasible for nonempty E.
    GridFunction flat{s, std::vector<double>(N, 1.0)};
    std::vector<double> field = op.forward(flat);
    rescaled(flat, field);
  }
  res.primal_value = best;
  res.minimizer = std::move(best_f);
  res.tolerance = cfg.tol;
}

}  // namespace

CompactSetGrid empty_set(const GridSpec& spec, const TLadder& ladder) {
  return CompactSetGrid{spec, ladder, {}, "empty"};
}

CompactSetGrid box_set(const GridSpec& spec, const TLadder& ladder,
                       const double* x0, double t0, double r0) {
  validate(spec);
  validate(ladder);
  if (!(r0 > 0.0)) throw std::invalid_argument("box_set: r0 <= 0");
  CompactSetGrid E{spec, ladder, {}, "box"};
  auto ts = ladder.slices();
  for (int j = 0; j < ladder.k; ++j) {
    if (!(ts[j] - t0 > r0 && ts[j] - t0 < 2.0 * r0)) continue;
    for (std::size_t i = 0; i < spec.size(); ++i) {
      auto pt = spec.point(i);
      double d = spec.n == 1 ? std::abs(pt[0] - x0[0])
                             : std::hypot(pt[0] - x0[0], pt[1] - x0[1]);
      if (d < 0.5 * r0) E.nodes.push_back({i, j});
    }
  }
  std::sort(E.nodes.begin(), E.nodes.end());
  if (E.nodes.empty())
    throw std::invalid_argument("box_set: box resolves to no grid nodes");
  return E;
}

CompactSetGrid node_set(const GridSpec& spec, const TLadder& ladder,
                        std::vector<std::pair<int, int>> nodes) {
  CompactSetGrid E{spec, ladder, {}, "nodes"};
  for (auto& [i, j] : nodes) {
    if (i < 0) throw std::invalid_argument("node_set: negative node index");
    E.nodes.push_back({static_cast<std::size_t>(i), j});
  }
  std::sort(E.nodes.begin(), E.nodes.end());
  E.nodes.erase(std::unique(E.nodes.begin(), E.nodes.end()), E.nodes.end());
  validate_set(E);
  return E;
}

CapacityResult capacity_dual(const CompactSetGrid& E, double p,
                             const KernelParams& params,
                             const SolverConfig& cfg) {
  validate_p(p);
  validate(params);
  validate_set(E);
  if (E.nodes.empty()) return empty_result(E);
  SetOperator op(E, params);
  CapacityResult res = empty_result(E);
  run_dual(op, p, cfg, res);
  return res;
}

CapacityResult capacity_primal(const CompactSetGrid& E, double p,
                               const KernelParams& params,
                               const SolverConfig& cfg) {
  validate_p(p);
  validate(params);
  validate_set(E);
  if (E.nodes.empty()) {
    CapacityResult res = empty_result(E);
    res.converged = true;
    return res;
  }
  SetOperator op(E, params);
  CapacityResult res = empty_result(E);
  // Cheap dual pass to scale the penalty; its value is not reported here.
  CapacityResult pilot = empty_result(E);
  SolverConfig pcfg = cfg;
  pcfg.dual_iters = std::min(cfg.dual_iters, 80);
  run_dual(op, p, pcfg, pilot);
  run_primal(op, p, cfg, nullptr, pilot.dual_value, res);
  res.rel_gap = res.primal_value > 0.0
                    ? (res.primal_value - res.dual_value) / res.primal_value
                    : 0.0;
  return res;
}

CapacityResult capacity(const CompactSetGrid& E, double p,
                        const KernelParams& params, const SolverConfig& cfg) {
  validate_p(p);
  validate(params);
  validate_set(E);
  if (E.nodes.empty()) {
    CapacityResult res = empty_result(E);
    res.converged = true;
    return res;
  }
  SetOperator op(E, params);
  CapacityResult res = empty_result(E);
  run_dual(op, p, cfg, res);
  // Warm start from the equilibrium relation f^p = (P* mu)^{p'} with
  // mu scaled to mass value^{1/p'}.
  double pp = p / (p - 1.0);
  std::vector<double> w(op.atom_count());
  for (std::size_t a = 0; a < w.size(); ++a) w[a] = res.maximizer.atoms[a].w;
  GridFunction dens = op.adjoint(w);
  GridFunction warm{E.spec, std::vector<double>(E.spec.size())};
  double scale = std::pow(res.dual_value, 1.0 / pp);
  for (std::size_t i = 0; i < warm.v.size(); ++i)
    warm.v[i] = std::pow(scale * std::abs(dens.v[i]), pp / p);
  CapacityResult prim = empty_result(E);
  run_primal(op, p, cfg, &warm, res.dual_value, prim);
  res.primal_value = prim.primal_value;
  res.minimizer = std::move(prim.minimizer);
  res.iterations += prim.iterations;
  res.converged = prim.converged;
  res.tolerance = cfg.tol;
  res.rel_gap = res.primal_value > 0.0
                    ? (res.primal_value - res.dual_value) / res.primal_value
                    : 0.0;
  return res;
}

EquilibriumReport equilibrium_check(const CapacityResult& result,
                                    const CompactSetGrid& E, double p,
                                    const KernelParams& params) {
  validate_p(p);
  if (!result.converged || result.rel_gap > 0.1)
    throw std::invalid_argument(
        "equilibrium_check: refusing unconverged capacity result");
  EquilibriumReport rep;
  rep.capacity = result.dual_value;
  rep.bound = 3.0 * result.rel_gap + 0.05;
  if (E.nodes.empty() || rep.capacity <= 0.0) {
    rep.ok = true;
    return rep;
  }
  SetOperator op(E, params);
  double pp = p / (p - 1.0);
  double hn = std::pow(E.spec.h(), E.spec.n);
  double scale = std::pow(rep.capacity, 1.0 / pp);
  std::vector<double> w(op.atom_count());
  for (std::size_t a = 0; a < w.size(); ++a)
    w[a] = scale * result.maximizer.atoms[a].w;
  rep.mass = num::pairwise_sum(w);
  GridFunction dens = op.adjoint(w);  // P* mu_K
  std::vector<double> q(dens.v.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    q[i] = std::pow(std::abs(dens.v[i]), pp);
  rep.dual_norm_int = num::pairwise_sum(q) * hn;
  GridFunction qf{E.spec, std::vector<double>(dens.v.size())};
  for (std::size_t i = 0; i < qf.v.size(); ++i)
    qf.v[i] = std::pow(std::abs(dens.v[i]), pp - 1.0);
  std::vector<double> B = op.forward(qf);
  std::vector<double> me(B.size());
  for (std::size_t a = 0; a < B.size(); ++a) me[a] = B[a] * w[a];
  rep.mutual_energy = num::pairwise_sum(me);

  double vals[4] = {rep.capacity, rep.mass, rep.dual_norm_int,
                    rep.mutual_energy};
  for (double a : vals)
    for (double b : vals)
      if (std::max(std::abs(a), std::abs(b)) > 0.0)
        rep.max_rel_dev =
            std::max(rep.max_rel_dev,
                     std::abs(a - b) / std::max(std::abs(a), std::abs(b)));

  if (result.minimizer.v.size() == E.spec.size()) {
    std::vector<double> num_t(E.spec.size()), den_t(E.spec.size());
    for (std::size_t i = 0; i < E.spec.size(); ++i) {
      double fp = std::pow(std::abs(result.minimizer.v[i]), p);
      num_t[i] = std::abs(fp - q[i]);
      den_t[i] = fp;
    }
    double den = num::pairwise_sum(den_t);
    rep.pointwise_residual =
        den > 0.0 ? num::pairwise_sum(num_t) / den
                  : std::numeric_limits<double>::quiet_NaN();
  }
  rep.ok = rep.max_rel_dev <= rep.bound;
  return rep;
}

AxiomsReport capacity_axioms_suite(const KernelParams& params, double p,
                                   unsigned seed, const SolverConfig& cfg) {
  validate_p(p);
  GridSpec s{params.n, 8.0, params.n == 1 ? 128 : 32};
  TLadder lad = default_ladder(s, 32);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ur(0.6, 1.4);
  AxiomsReport rep;
  auto value = [&](const CompactSetGrid& E) {
    return capacity(E, p, params, cfg).primal_value;
  };

  // Monotonicity: a sub-sampled node subset against its superset.
  {
    double x0[2] = {ur(rng) - 1.0, 0.0};
    CompactSetGrid big = box_set(s, lad, x0, 0.0, ur(rng));
    std::vector<std::pair<int, int>> half;
    for (std::size_t i = 0; i < big.nodes.size(); i += 2)
      half.push_back({static_cast<int>(big.nodes[i].node),
                      big.nodes[i].slice});
    CompactSetGrid small = node_set(s, lad, half);
    double cs = value(small), cb = value(big);
    rep.checks.push_back(
        {"monotone-subset", cs, cb, cb > 0 ? cs / cb : 0, cs <= cb * 1.1});
  }
  // Horizontal translation by a whole number of cells.
  {
    double r = ur(rng);
    double x0[2] = {-2.0, 0.0};
    double x1[2] = {-2.0 + 8.0 * s.h(), 0.0};
    CompactSetGrid e0 = box_set(s, lad, x0, 0.0, r);
    CompactSetGrid e1 = box_set(s, lad, x1, 0.0, r);
    double c0 = value(e0), c1 = value(e1);
    double dev = std::abs(c0 - c1) / std::max(c0, c1);
    rep.checks.push_back({"translation", c0, c1, dev, dev <= 0.1});
  }
  // Subadditivity on far-separated boxes.
  {
    double r = ur(rng);
    double xa[2] = {-4.0, 0.0}, xb[2] = {4.0, 0.0};
    CompactSetGrid ea = box_set(s, lad, xa, 0.0, r);
    CompactSetGrid eb = box_set(s, lad, xb, 0.0, r);
    double cu = value(union_sets(ea, eb));
    double csum = value(ea) + value(eb);
    rep.checks.push_back(
        {"subadditive", cu, csum, csum > 0 ? cu / csum : 0, cu <= csum * 1.1});
  }
  rep.pass = true;
  for (auto& c : rep.checks) rep.pass = rep.pass && c.pass;
  return rep;
}

BallScalingReport ball_scaling_check(double p, const KernelParams& params,
                                     const std::vector<double>& radii,
                                     const GridSpec& spec,
                                     const SolverConfig& cfg) {
  validate_p(p);
  BallScalingReport rep;
  TLadder lad = default_ladder(spec, 48);
  double origin[2] = {0.0, 0.0};
  for (double r : radii) {
    if (r / spec.h() < 4.0)
      throw std::invalid_argument(
          "ball_scaling_check: radius under 4 cells across");
    CapacityResult c = capacity(box_set(spec, lad, origin, 0.0, r), p, params,
                                cfg);
    rep.radii.push_back(r);
    rep.values.push_back(c.primal_value);
    rep.normalized.push_back(c.primal_value / std::pow(r, spec.n));
  }
  auto [mn, mx] =
      std::minmax_element(rep.normalized.begin(), rep.normalized.end());
  rep.spread = *mn > 0.0 ? *mx / *mn : std::numeric_limits<double>::infinity();
  rep.pass = rep.spread <= 1.25;
  return rep;
}

BallBoundsReport ball_bounds_check(
    double p, const KernelParams& params,
    const std::vector<std::pair<double, double>>& sweep, const GridSpec& spec,
    const SolverConfig& cfg) {
  validate_p(p);
  BallBoundsReport rep;
  TLadder lad = default_ladder(spec, 48);
  double origin[2] = {0.0, 0.0};
  rep.inf_lower = std::numeric_limits<double>::infinity();
  for (auto& [r0, t0] : sweep) {
    CapacityResult c =
        capacity(box_set(spec, lad, origin, t0, r0), p, params, cfg);
    BallBoundsReport::Row row;
    row.r0 = r0;
    row.t0 = t0;
    row.value = c.primal_value;
    row.lower_c = c.primal_value / std::pow(r0, spec.n);
    row.upper_c = c.primal_value * std::pow(r0, spec.n * (p - 1.0)) /
                  std::pow(t0 + r0, p * spec.n);
    rep.rows.push_back(row);
    rep.inf_lower = std::min(rep.inf_lower, row.lower_c);
    rep.sup_upper = std::max(rep.sup_upper, row.upper_c);
    if (t0 <= r0) rep.sup_shallow = std::max(rep.sup_shallow, row.lower_c);
  }
  rep.finite = std::isfinite(rep.inf_lower) && rep.inf_lower > 0.0 &&
               std::isfinite(rep.sup_upper) && rep.sup_upper > 0.0 &&
               std::isfinite(rep.sup_shallow);
  return rep;
}

StrongTypeReport strong_type_check(const GridFunction& f, double p,
                                   const KernelParams& params,
                                   std::vector<double> levels, int ladder_k,
                                   const SolverConfig& cfg) {
  validate_p(p);
  validate(f.spec);
  for (double v : f.v)
    if (v < 0.0)
      throw std::invalid_argument("strong_type_check: f must be >= 0");
  StrongTypeReport rep;
  std::vector<double> q(f.v.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    q[i] = std::pow(f.v[i], p);
  rep.fp_norm = num::pairwise_sum(q) * std::pow(f.spec.h(), f.spec.n);
  double fmax = *std::max_element(f.v.begin(), f.v.end());
  if (!(fmax > 0.0)) {
    rep.ratio = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }

  TLadder lad = default_ladder(f.spec, ladder_k);
  // Field P f over the whole ladder, one convolution per slice, with the
  // same raw kernel tables the capacity operator uses.
  std::vector<double> field(static_cast<std::size_t>(lad.k) * f.spec.size());
  auto ts = lad.slices();
  for (int j = 0; j < lad.k; ++j) {
    std::vector<double> kw;
    double h = f.spec.h();
    if (f.spec.n == 1) {
      kw.resize(2 * f.spec.m);
      for (int d = -f.spec.m; d < f.spec.m; ++d) {
        double x = d * h;
        kw[d + f.spec.m] = poisson_kernel(params, &x, ts[j]);
      }
    } else {
      kw.resize(4 * static_cast<std::size_t>(f.spec.m) * f.spec.m);
      for (int d0 = -f.spec.m; d0 < f.spec.m; ++d0)
        for (int d1 = -f.spec.m; d1 < f.spec.m; ++d1) {
          double x[2] = {d0 * h, d1 * h};
          kw[static_cast<std::size_t>(d0 + f.spec.m) * 2 * f.spec.m +
             (d1 + f.spec.m)] = poisson_kernel(params, x, ts[j]);
        }
    }
    std::vector<double> conv = convolve_offsets(f, kw);
    std::copy(conv.begin(), conv.end(),
              field.begin() + static_cast<std::size_t>(j) * f.spec.size());
  }
  double field_max = *std::max_element(field.begin(), field.end());

  if (levels.empty()) {
    for (int j = 0; j < 12; ++j)
      levels.push_back(field_max * std::pow(0.5, j));
  }
  std::sort(levels.begin(), levels.end(), std::greater<double>());
  levels.erase(std::remove_if(levels.begin(), levels.end(),
                              [](double v) { return !(v > 0.0); }),
               levels.end());
  rep.too_coarse = levels.size() < 4;

  // Ascending in set size (descending lambda), warm-starting each primal from
  // the previous level's minimizer; nested sets keep the values monotone.
  GridFunction warm{f.spec, {}};
  std::vector<double> caps_desc;
  for (double lam : levels) {
    std::vector<std::pair<int, int>> nodes;
    for (int j = 0; j < lad.k; ++j) {
      const double* base = field.data() + static_cast<std::size_t>(j) *
                                              f.spec.size();
      for (std::size_t i = 0; i < f.spec.size(); ++i)
        if (base[i] >= lam) nodes.emplace_back(static_cast<int>(i), j);
    }
    if (nodes.empty()) {
      caps_desc.push_back(0.0);
      continue;
    }
    CompactSetGrid E = node_set(f.spec, lad, std::move(nodes));
    SetOperator lop(E, params);
    CapacityResult r = empty_result(E);
    SolverConfig lcfg = cfg;
    run_dual(lop, p, lcfg, r);
    CapacityResult prim = empty_result(E);
    run_primal(lop, p, lcfg, warm.v.empty() ? nullptr : &warm, r.dual_value,
               prim);
    warm = prim.minimizer;
    caps_desc.push_back(prim.primal_value);
  }
  rep.levels = levels;
  rep.capacities = caps_desc;

  // int C(E_lambda) d(lambda^p) with trapezoid weights on the interior
  // intervals: C(E_lambda) decreases in lambda, so the endpoint sums bracket
  // the integral and their midpoint converges under level-grid refinement.
  // Below the lowest level C is only known from the smallest lambda, so that
  // tail keeps the one-sided estimate.
  std::vector<double> terms;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    double hi = std::pow(levels[j], p);
    if (j + 1 < levels.size()) {
      double width = hi - std::pow(levels[j + 1], p);
      terms.push_back(0.5 * (caps_desc[j] + caps_desc[j + 1]) * width);
    } else {
      terms.push_back(caps_desc[j] * hi);
    }
  }
  rep.lhs = terms.empty() ? 0.0 : num::pairwise_sum(terms);
  rep.ratio = rep.fp_norm > 0.0 ? rep.lhs / rep.fp_norm
                                : std::numeric_limits<double>::quiet_NaN();
  // Grid-geometry coarseness: steps much wider than one octave leave whole
  // capacity transitions unsampled between adjacent levels.
  for (std::size_t j = 0; j + 1 < levels.size(); ++j)
    if (levels[j] > 4.0 * levels[j + 1]) rep.too_coarse = true;
  return rep;
}

}  // namespace capax
