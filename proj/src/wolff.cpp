#include "capax/wolff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

#include "capax/numerics.hpp"

namespace capax {

namespace {

void require_p(double p) {
  if (!(p > 1.0))
    throw std::invalid_argument("wolff: requires p > 1");
}

double xdist(int n, const Atom& a, const double* x0) {
  double dx = a.x[0] - x0[0];
  if (n == 1) return std::abs(dx);
  double dy = a.x[1] - x0[1];
  return std::hypot(dx, dy);
}

}  // namespace

void validate(const RadiusGrid& rg) {
  if (rg.r.size() < 2)
    throw std::invalid_argument("RadiusGrid: needs at least two radii");
  if (!(rg.r.front() > 0.0))
    throw std::invalid_argument("RadiusGrid: radii must be positive");
  for (std::size_t i = 0; i + 1 < rg.r.size(); ++i)
    if (!(rg.r[i] < rg.r[i + 1]))
      throw std::invalid_argument("RadiusGrid: radii must increase strictly");
}

RadiusGrid log_radius_grid(double r_min, double r_max, int count) {
  if (!(r_min > 0.0) || !(r_max > r_min) || count < 2)
    throw std::invalid_argument("log_radius_grid: bad window");
  RadiusGrid rg;
  rg.r.resize(count);
  double ratio = std::log(r_max / r_min);
  for (int i = 0; i < count; ++i)
    rg.r[i] = r_min * std::exp(ratio * i / (count - 1));
  rg.r.front() = r_min;
  rg.r.back() = r_max;
  return rg;
}

RadiusGrid default_radius_grid(const GridSpec& spec, int count) {
  validate(spec);
  return log_radius_grid(spec.h() / 2.0, 8.0 * spec.L, count);
}

double box_mass(const DiscreteMeasure& mu, double r, const double* x0,
                double t0) {
  if (!(r > 0.0)) throw std::invalid_argument("box_mass: r must be positive");
  double sum = 0.0;
  for (const Atom& a : mu.atoms) {
    double dt = a.t - t0;
    if (dt > r && dt < 2.0 * r && xdist(mu.n, a, x0) < 0.5 * r) sum += a.w;
  }
  return sum;
}

double parabolic_maximal(const DiscreteMeasure& mu, const double* x,
                         const RadiusGrid& rg) {
  validate(rg);
  double best = 0.0;
  for (double r : rg.r) {
    double m = box_mass(mu, r, x, r);
    if (m > 0.0) best = std::max(best, m * std::pow(r, -mu.n));
  }
  return best;
}

double wolff_potential(const DiscreteMeasure& mu, const double* x, double t,
                       double p, const RadiusGrid& rg) {
  require_p(p);
  validate(rg);
  double pe = 1.0 / (p - 1.0);  // p' - 1
  std::vector<double> psi(rg.r.size());
  for (std::size_t i = 0; i < rg.r.size(); ++i) {
    double m = box_mass(mu, rg.r[i], x, t);
    psi[i] = m > 0.0 ? std::pow(m * std::pow(rg.r[i], -mu.n), pe) : 0.0;
  }
  // dr/r = du with u = log r: trapezoid in u.
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < rg.r.size(); ++i)
    total += 0.5 * (psi[i] + psi[i + 1]) * std::log(rg.r[i + 1] / rg.r[i]);
  return total;
}

double wolff_potential_exact(const DiscreteMeasure& mu, const double* x,
                             double t, double p) {
  require_p(p);
  double pe = 1.0 / (p - 1.0);
  double q = mu.n * pe;
  // An atom at height t + tau, horizontal distance d, sits in B_r(x,t) for
  // r in (max(2d, tau/2), tau): sweep the entry/exit radii, integrating the
  // piecewise-constant mass in closed form on each segment.
  std::vector<std::pair<double, double>> ev;
  double wtot = 0.0;
  for (const Atom& a : mu.atoms) {
    wtot += a.w;
    double tau = a.t - t;
    if (!(tau > 0.0)) continue;
    double entry = std::max(2.0 * xdist(mu.n, a, x), 0.5 * tau);
    if (entry < tau && a.w > 0.0) {
      ev.emplace_back(entry, a.w);
      ev.emplace_back(tau, -a.w);
    }
  }
  if (ev.empty()) return 0.0;
  std::sort(ev.begin(), ev.end());
  double eps = wtot * 1e-12;  // absorbs sweep roundoff in the running mass
  double total = 0.0, mass = 0.0;
  std::size_t i = 0;
  while (i < ev.size()) {
    double r0 = ev[i].first;
    while (i < ev.size() && ev[i].first == r0) mass += ev[i++].second;
    if (i == ev.size()) break;
    double r1 = ev[i].first;
    if (mass > eps && r1 > r0)
      total += std::pow(mass, pe) *
               (std::pow(r0, -q) - std::pow(r1, -q)) / q;
  }
  return total;
}

namespace {

// Per-atom contribution of one lattice generation: side l = 2^{-g}, cubes
// open, indexed below the atom after the shift; atoms at or below the shift
// height fall outside the (shifted) lattice and contribute zero.
std::vector<double> dyadic_generation(const DiscreteMeasure& mu, double pe,
                                      int g, const std::array<double, 3>& sh) {
  double l = std::ldexp(1.0, -g);
  std::map<std::array<long long, 3>, double> mass;
  std::vector<std::array<long long, 3>> key(mu.atoms.size());
  std::vector<char> inside(mu.atoms.size(), 0);
  for (std::size_t a = 0; a < mu.atoms.size(); ++a) {
    const Atom& at = mu.atoms[a];
    double tr = at.t - sh[2];
    if (!(tr > 0.0)) continue;
    std::array<long long, 3> k{0, 0, 0};
    k[0] = static_cast<long long>(std::floor((at.x[0] - sh[0]) / l));
    if (mu.n == 2)
      k[1] = static_cast<long long>(std::floor((at.x[1] - sh[1]) / l));
    k[2] = static_cast<long long>(std::floor(tr / l));
    key[a] = k;
    inside[a] = 1;
    mass[k] += at.w;
  }
  std::vector<double> c(mu.atoms.size(), 0.0);
  double ln = std::pow(l, mu.n);
  for (std::size_t a = 0; a < mu.atoms.size(); ++a)
    if (inside[a]) c[a] = std::pow(mass[key[a]] / ln, pe);
  return c;
}

}  // namespace

std::vector<double> dyadic_wolff(const DiscreteMeasure& mu, double p, int g_lo,
                                 int g_hi, const std::array<double, 3>& shift,
                                 bool auto_widen) {
  require_p(p);
  validate(mu);
  if (g_lo > g_hi)
    throw std::invalid_argument("dyadic_wolff: empty generation range");
  if (!(shift[2] >= 0.0))
    throw std::invalid_argument("dyadic_wolff: shift height must be >= 0");
  double pe = 1.0 / (p - 1.0);
  std::vector<double> tot(mu.atoms.size(), 0.0);
  for (int g = g_lo; g <= g_hi; ++g) {
    std::vector<double> c = dyadic_generation(mu, pe, g, shift);
    for (std::size_t a = 0; a < tot.size(); ++a) tot[a] += c[a];
  }
  if (auto_widen) {
    // Coarse end only: terms there decay like (mass * l^{-n})^{p'-1} -> 0,
    // so the 0.1% stopping rule terminates.
    for (int ext = 1; ext <= 16; ++ext) {
      std::vector<double> c = dyadic_generation(mu, pe, g_lo - ext, shift);
      double frac = 0.0;
      for (std::size_t a = 0; a < tot.size(); ++a) {
        tot[a] += c[a];
        if (tot[a] > 0.0) frac = std::max(frac, c[a] / tot[a]);
      }
      if (frac < 1e-3) break;
    }
  }
  return tot;
}

MaximalComparisonReport maximal_comparison_check(const DiscreteMeasure& mu,
                                                 double p,
                                                 const KernelParams& params,
                                                 const GridSpec& spec,
                                                 int rcount) {
  require_p(p);
  validate(mu);
  validate(spec);
  validate(params);
  if (params.n != spec.n || mu.n != spec.n)
    throw std::invalid_argument("maximal_comparison_check: dimension mismatch");
  RadiusGrid rg = default_radius_grid(spec, rcount);
  double hn = std::pow(spec.h(), spec.n);
  std::vector<double> mp(spec.size()), dp(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    auto pt = spec.point(i);
    double x[2] = {pt[0], pt[1]};
    mp[i] = std::pow(parabolic_maximal(mu, x, rg), p);
    double dual = 0.0;
    for (const Atom& a : mu.atoms) {
      double d[2] = {pt[0] - a.x[0], pt[1] - a.x[1]};
      dual += a.w * poisson_kernel(params, d, a.t);
    }
    dp[i] = std::pow(dual, p);
  }
  MaximalComparisonReport rep;
  rep.maximal_norm = std::pow(num::pairwise_sum(mp) * hn, 1.0 / p);
  rep.dual_norm = std::pow(num::pairwise_sum(dp) * hn, 1.0 / p);
  rep.ratio = rep.maximal_norm / rep.dual_norm;
  return rep;
}

WolffEnergyReport wolff_energy_check(const DiscreteMeasure& mu, double p,
                                     const KernelParams& params,
                                     const GridSpec& spec) {
  require_p(p);
  validate(mu);
  validate(spec);
  validate(params);
  if (params.n != spec.n || mu.n != spec.n)
    throw std::invalid_argument("wolff_energy_check: dimension mismatch");
  double pp = p / (p - 1.0);
  double hn = std::pow(spec.h(), spec.n);
  std::vector<double> dp(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    auto pt = spec.point(i);
    double dual = 0.0;
    for (const Atom& a : mu.atoms) {
      double d[2] = {pt[0] - a.x[0], pt[1] - a.x[1]};
      dual += a.w * poisson_kernel(params, d, a.t);
    }
    dp[i] = std::pow(dual, pp);
  }
  WolffEnergyReport rep;
  rep.dual_energy = num::pairwise_sum(dp) * hn;
  std::vector<double> terms;
  terms.reserve(mu.atoms.size());
  for (const Atom& a : mu.atoms)
    terms.push_back(a.w * wolff_potential_exact(mu, a.x.data(), a.t, p));
  rep.wolff_energy = terms.empty() ? 0.0 : num::pairwise_sum(terms);
  rep.ratio = rep.dual_energy / rep.wolff_energy;
  return rep;
}

}  // namespace capax
