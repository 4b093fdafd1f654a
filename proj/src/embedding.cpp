// Embedding criteria over declared candidate families.  The family engines
// cache capacity solves keyed by recentered geometry, so one engine serves
// every mass argument and refinement level of a battery; lattice anchoring
// plus recentered solves give exact horizontal-translation covariance.
#include "capax/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "capax/fracspaces.hpp"
#include "capax/wolff.hpp"

namespace capax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

}  // namespace

void validate(const OpenSetGrid& o) {
  validate(o.cells);
  const GridSpec& g = o.cells.spec;
  for (std::size_t idx = 0; idx < o.cells.member.size(); ++idx) {
    if (!o.cells.member[idx]) continue;
    auto ij = g.unflat(idx);
    bool edge = ij[0] < 1 || ij[0] > g.m - 2;
    if (g.n == 2) edge = edge || ij[1] < 1 || ij[1] > g.m - 2;
    if (edge)
      throw std::invalid_argument(
          "OpenSetGrid: member cell touches the outer ring (set unbounded)");
  }
}

OpenSetGrid open_ball(const GridSpec& spec, const std::array<double, 2>& c,
                      double r) {
  OpenSetGrid o{ball_set(spec, c, r)};
  validate(o);
  return o;
}

OpenSetGrid open_intersect(const OpenSetGrid& a, const OpenSetGrid& b) {
  if (!(a.cells.spec == b.cells.spec))
    throw std::invalid_argument("open_intersect: grid mismatch");
  OpenSetGrid o{a.cells};
  for (std::size_t i = 0; i < o.cells.member.size(); ++i)
    o.cells.member[i] = a.cells.member[i] && b.cells.member[i];
  o.cells.generator = "intersect";
  return o;
}

bool tent_contains(const OpenSetGrid& o, const double* x, double t) {
  const GridSpec& g = o.cells.spec;
  const double h = g.h();
  if (!(t > 0)) return false;
  int lo0 = static_cast<int>(std::floor((x[0] - t + g.L) / h)) - 1;
  int hi0 = static_cast<int>(std::ceil((x[0] + t + g.L) / h)) + 1;
  bool any = false;
  if (g.n == 1) {
    for (int i = lo0; i <= hi0; ++i) {
      double d = std::abs(g.coord(i) - x[0]);
      if (d > t) continue;
      if (i < 0 || i > g.m - 1) return false;  // ball exits the grid
      if (!o.cells.member[static_cast<std::size_t>(i)]) return false;
      any = true;
    }
    return any;
  }
  int lo1 = static_cast<int>(std::floor((x[1] - t + g.L) / h)) - 1;
  int hi1 = static_cast<int>(std::ceil((x[1] + t + g.L) / h)) + 1;
  for (int i0 = lo0; i0 <= hi0; ++i0) {
    double dx = g.coord(i0) - x[0];
    for (int i1 = lo1; i1 <= hi1; ++i1) {
      double dy = g.coord(i1) - x[1];
      if (dx * dx + dy * dy > t * t) continue;
      if (i0 < 0 || i0 > g.m - 1 || i1 < 0 || i1 > g.m - 1) return false;
      if (!o.cells.member[g.flat(i0, i1)]) return false;
      any = true;
    }
  }
  return any;
}

bool TentRegion::contains(int slice, std::size_t node) const {
  return member[static_cast<std::size_t>(slice) * spec.size() + node] != 0;
}

std::size_t TentRegion::count() const {
  std::size_t c = 0;
  for (auto v : member) c += v != 0;
  return c;
}

TentRegion tent(const OpenSetGrid& o, const TLadder& ladder) {
  validate(o);
  validate(ladder);
  const GridSpec& g = o.cells.spec;
  TentRegion tr{g, ladder,
                std::vector<std::uint8_t>(g.size() * ladder.k, 0)};
  for (int j = 0; j < ladder.k; ++j) {
    double t = ladder.slice(j);
    if (t > 2.0 * g.L * std::sqrt(static_cast<double>(g.n))) continue;
    for (std::size_t node = 0; node < g.size(); ++node) {
      auto pt = g.point(node);
      if (tent_contains(o, pt.data(), t))
        tr.member[static_cast<std::size_t>(j) * g.size() + node] = 1;
    }
  }
  return tr;
}

double tent_mass(const DiscreteMeasure& mu, const OpenSetGrid& o) {
  validate(mu);
  if (mu.n != o.cells.spec.n)
    throw std::invalid_argument("tent_mass: dimension mismatch");
  double s = 0;
  for (const Atom& a : mu.atoms)
    if (tent_contains(o, a.x.data(), a.t)) s += a.w;
  return s;
}

double ball_tent_mass(const DiscreteMeasure& mu, const double* c, double rho) {
  validate(mu);
  double s = 0;
  for (const Atom& a : mu.atoms) {
    double d = mu.n == 1 ? std::abs(a.x[0] - c[0])
                         : std::hypot(a.x[0] - c[0], a.x[1] - c[1]);
    if (d + a.t < rho) s += a.w;
  }
  return s;
}

LevelSets level_sets(const HalfSpaceField& u, double s) {
  if (!(s > 0)) throw std::invalid_argument("level_sets: level must be > 0");
  LevelSets ls;
  ls.exceed.spec = u.spec;
  ls.exceed.ladder = u.ladder;
  ls.exceed.generator = "level";
  for (int j = 0; j < u.ladder.k; ++j)
    for (std::size_t node = 0; node < u.spec.size(); ++node)
      if (std::abs(u.at(j, node)) > s) ls.exceed.nodes.push_back({node, j});
  GridFunction nmax = nontangential_max(u);
  ls.cone.spec = u.spec;
  ls.cone.generator = "cone";
  ls.cone.member.assign(u.spec.size(), 0);
  for (std::size_t node = 0; node < u.spec.size(); ++node)
    ls.cone.member[node] = nmax.v[node] > s;
  return ls;
}

LevelSets level_sets(const GridFunction& f, double s,
                     const KernelParams& params, const TLadder& ladder) {
  return level_sets(extend(f, ladder, params).field, s);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::finite: return "finite";
    case Verdict::infinite: return "infinite";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::unsupported: return "unsupported";
  }
  return "inconclusive";
}

namespace {

// Verdict from the per-level values: stable on the last refinement step is
// finite, doubling on both steps is infinite, anything else inconclusive.
Verdict classify(const std::vector<double>& v) {
  std::size_t k = v.size();
  double a = v[k - 3], b = v[k - 2], c = v[k - 1];
  if (!std::isfinite(c) || !std::isfinite(b)) return Verdict::infinite;
  if (b == 0.0 && c == 0.0) return Verdict::finite;
  if (std::abs(c - b) <= 0.1 * std::abs(b)) return Verdict::finite;
  if (b > 2.0 * a && c > 2.0 * b) return Verdict::infinite;
  return Verdict::inconclusive;
}

struct Anchor {
  std::array<double, 2> x{0.0, 0.0};
  double t_hi = 0.0;
  bool any = false;
};

// Anchor: x of the atom minimizing (x0, x1, t) lexicographically.  Weights
// are ignored so atom-wise dominated measures share one lattice.
Anchor anchor_of(const DiscreteMeasure& mu) {
  Anchor a;
  const Atom* best = nullptr;
  for (const Atom& at : mu.atoms) {
    if (!best || std::make_tuple(at.x[0], at.x[1], at.t) <
                     std::make_tuple(best->x[0], best->x[1], best->t))
      best = &at;
    a.t_hi = std::max(a.t_hi, at.t);
  }
  if (best) {
    a.x = best->x;
    a.any = true;
  }
  return a;
}

bool in_box(const Atom& at, int n, double r, const double* x0, double t0) {
  double dt = at.t - t0;
  if (!(dt > r && dt < 2.0 * r)) return false;
  double dx = at.x[0] - x0[0];
  if (n == 1) return std::abs(dx) < 0.5 * r;
  double dy = at.x[1] - x0[1];
  return dx * dx + dy * dy < 0.25 * r * r;
}

struct FamilyMember {
  double r = 0.0, t0 = 0.0;           // boxes: scale and base height
  std::array<double, 2> c{0.0, 0.0};  // absolute center
  std::array<int, 4> key{0, 0, 0, 0};  // lattice index (jr, kt, jx, jy)
  std::vector<int> captured;           // sorted atom indices
  double mass = 0.0;
  std::vector<int> parts;  // union: indices into the singles; empty = single
};

double mass_of(const DiscreteMeasure& mu, const std::vector<int>& captured) {
  double s = 0;
  for (int i : captured) s += mu.atoms[static_cast<std::size_t>(i)].w;
  return s;
}

std::vector<int> merge_captured(const std::vector<int>& a,
                                const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

// Greedy mass cover over the singles: each step adds the member with the
// largest uncovered mass (ties to the smallest lattice key, i.e. the order
// of `singles`); prefixes of length >= 2 become union members.
template <class CapturedOf>
std::vector<FamilyMember> greedy_unions(
    const std::vector<FamilyMember>& singles, const DiscreteMeasure& mu,
    int max_union, CapturedOf recapture) {
  std::vector<FamilyMember> unions;
  std::vector<char> covered(mu.atoms.size(), 0);
  std::vector<int> seq;
  std::vector<int> cum;
  for (int step = 0; step < max_union; ++step) {
    int best = -1;
    double best_gain = 0.0;
    for (std::size_t s = 0; s < singles.size(); ++s) {
      double gain = 0.0;
      for (int ai : singles[s].captured)
        if (!covered[static_cast<std::size_t>(ai)])
          gain += mu.atoms[static_cast<std::size_t>(ai)].w;
      if (gain > best_gain) {
        best_gain = gain;
        best = static_cast<int>(s);
      }
    }
    if (best < 0) break;
    seq.push_back(best);
    for (int ai : singles[static_cast<std::size_t>(best)].captured)
      covered[static_cast<std::size_t>(ai)] = 1;
    cum = merge_captured(cum, singles[static_cast<std::size_t>(best)].captured);
    if (seq.size() >= 2) {
      FamilyMember u;
      u.parts = seq;
      u.captured = recapture(seq, cum);
      u.mass = mass_of(mu, u.captured);
      u.key = singles[static_cast<std::size_t>(seq[0])].key;
      unions.push_back(std::move(u));
    }
  }
  return unions;
}

// Half-space box family: dyadic radii, centers and bases on (r/2)-lattices
// anchored at the measure; capacities solved on the recentered box.
class BoxEngine {
 public:
  BoxEngine(const DiscreteMeasure& mu, double p, const KernelParams& params,
            const EmbedConfig& cfg)
      : mu_(mu), p_(p), params_(params), cfg_(cfg) {
    validate(mu_);
    validate(cfg_.spec);
    if (mu_.n != cfg_.spec.n)
      throw std::invalid_argument("embedding: measure/grid dimension mismatch");
    ladder_ = cfg_.ladder.k >= 2 ? cfg_.ladder : default_ladder(cfg_.spec, 24);
    validate(ladder_);
    anchor_ = anchor_of(mu_);
    r_max_ = cfg_.r_max > 0
                 ? cfg_.r_max
                 : (anchor_.any ? std::exp2(std::ceil(std::log2(anchor_.t_hi)))
                                : 1.0);
    total_ = mu_.total_mass();
  }

  int radii(int level) const { return cfg_.depth + level; }
  double r_at(int jr) const { return r_max_ * std::exp2(-jr); }
  double total_mass() const { return total_; }
  const Anchor& anchor() const { return anchor_; }
  const TLadder& ladder() const { return ladder_; }

  const std::vector<FamilyMember>& pool(int level) {
    while (static_cast<int>(pools_.size()) <= level)
      pools_.push_back(build(static_cast<int>(pools_.size())));
    return pools_[static_cast<std::size_t>(level)];
  }

  // Candidate boxes of scale r containing the atom, as lattice keys; the
  // enumeration is grid-free and exact (predicates re-checked directly).
  template <class Emit>
  void capture_candidates(const Atom& at, int jr, double kt_cap,
                          Emit emit) const {
    double r = r_at(jr);
    double half = 0.5 * r;
    double u0 = (at.x[0] - anchor_.x[0]) / half;
    double w = at.t / half;
    int kt_lo = std::max(0, static_cast<int>(std::floor(w)) - 5);
    int kt_hi = static_cast<int>(std::floor(w)) + 1;
    if (kt_cap >= 0) kt_hi = std::min(kt_hi, static_cast<int>(kt_cap));
    for (int kt = kt_lo; kt <= kt_hi; ++kt) {
      double t0 = kt * half;
      double dt = at.t - t0;
      if (!(dt > r && dt < 2.0 * r)) continue;
      for (int jx = static_cast<int>(std::floor(u0)) - 1;
           jx <= static_cast<int>(std::floor(u0)) + 2; ++jx) {
        double cx = anchor_.x[0] + jx * half;
        if (mu_.n == 1) {
          double c[2] = {cx, 0.0};
          if (in_box(at, 1, r, c, t0)) emit(kt, jx, 0, c, t0, r);
          continue;
        }
        double u1 = (at.x[1] - anchor_.x[1]) / half;
        for (int jy = static_cast<int>(std::floor(u1)) - 1;
             jy <= static_cast<int>(std::floor(u1)) + 2; ++jy) {
          double c[2] = {cx, anchor_.x[1] + jy * half};
          if (in_box(at, 2, r, c, t0)) emit(kt, jx, jy, c, t0, r);
        }
      }
    }
  }

  // Recentered capacity of the box B_r(0, t0); +inf when the box resolves
  // no grid node or ladder slice.
  double cap_box(double r, double t0) {
    auto it = cap_single_.find({r, t0});
    if (it != cap_single_.end()) return it->second;
    double v;
    try {
      double origin[2] = {0.0, 0.0};
      CompactSetGrid e = box_set(cfg_.spec, ladder_, origin, t0, r);
      v = capacity(e, p_, params_, cfg_.solver).primal_value;
    } catch (const std::exception&) {
      v = kInf;
    }
    cap_single_[{r, t0}] = v;
    return v;
  }

  double cap_of(const FamilyMember& m, const std::vector<FamilyMember>& singles) {
    if (m.parts.empty()) return cap_box(m.r, m.t0);
    std::vector<double> key;
    const FamilyMember& base = singles[static_cast<std::size_t>(m.parts[0])];
    for (int pi : m.parts) {
      const FamilyMember& s = singles[static_cast<std::size_t>(pi)];
      key.push_back(s.r);
      key.push_back(s.t0);
      key.push_back(s.c[0] - base.c[0]);
      key.push_back(s.c[1] - base.c[1]);
    }
    auto it = cap_union_.find(key);
    if (it != cap_union_.end()) return it->second;
    double v;
    try {
      bool first = true;
      CompactSetGrid e;
      for (int pi : m.parts) {
        const FamilyMember& s = singles[static_cast<std::size_t>(pi)];
        double off[2] = {s.c[0] - base.c[0], s.c[1] - base.c[1]};
        CompactSetGrid part = box_set(cfg_.spec, ladder_, off, s.t0, s.r);
        e = first ? part : union_sets(e, part);
        first = false;
      }
      v = capacity(e, p_, params_, cfg_.solver).primal_value;
    } catch (const std::exception&) {
      v = kInf;
    }
    cap_union_[key] = v;
    return v;
  }

  // c(lambda) = min capacity over pool members with mass >= lambda.
  double profile_at(int level, double lambda, CriterionWitness* wit) {
    const std::vector<FamilyMember>& members = pool(level);
    double best = kInf;
    const FamilyMember* bm = nullptr;
    for (const FamilyMember& m : members) {
      if (m.mass < lambda) continue;
      double v = cap_of(m, members);
      if (v < best) {
        best = v;
        bm = &m;
      }
    }
    if (wit) *wit = box_witness(bm, lambda);
    return best;
  }

  CriterionWitness box_witness(const FamilyMember* m, double lambda) const {
    CriterionWitness w;
    if (!m) {
      w.kind = "none";
      double cap_mass = 0;
      if (!pools_.empty())
        for (const auto& pm : pools_.back())
          cap_mass = std::max(cap_mass, pm.mass);
      w.label = "family exhausted: max capturable mass " + fmt(cap_mass) +
                " < " + fmt(lambda);
      return w;
    }
    if (m->parts.empty()) {
      w.kind = "box";
      w.data = {m->r, m->t0, m->c[0]};
      if (mu_.n == 2) w.data.push_back(m->c[1]);
      w.label = "box r=" + fmt(m->r) + " t0=" + fmt(m->t0) + " x0=" +
                fmt(m->c[0]) + (mu_.n == 2 ? "," + fmt(m->c[1]) : "");
    } else {
      w.kind = "set";
      w.data = {static_cast<double>(m->parts.size())};
      w.label = "union of " + fmt(static_cast<double>(m->parts.size())) +
                " boxes (mass " + fmt(m->mass) + ")";
    }
    return w;
  }

  std::string family_string(int levels) const {
    return "dyadic boxes: r_max=" + fmt(r_max_) + ", depth=" +
           fmt(cfg_.depth) + ".." + fmt(cfg_.depth + levels - 1) +
           ", (r/2)-lattice anchored to mu, unions<=" + fmt(cfg_.max_union) +
           ", recentered primal capacities";
  }

 private:
  std::vector<FamilyMember> build(int level) {
    std::vector<FamilyMember> singles;
    if (anchor_.any) {
      // key: (jr, kt, captured) -> representative with smallest (jx, jy)
      std::map<std::tuple<int, int, std::vector<int>>, FamilyMember> dedup;
      for (int jr = 0; jr < radii(level); ++jr) {
        for (const Atom& at : mu_.atoms) {
          capture_candidates(
              at, jr, -1.0,
              [&](int kt, int jx, int jy, const double* c, double t0,
                  double r) {
                FamilyMember m;
                m.r = r;
                m.t0 = t0;
                m.c = {c[0], c[1]};
                m.key = {jr, kt, jx, jy};
                for (std::size_t a = 0; a < mu_.atoms.size(); ++a)
                  if (in_box(mu_.atoms[a], mu_.n, r, c, t0))
                    m.captured.push_back(static_cast<int>(a));
                m.mass = mass_of(mu_, m.captured);
                auto k = std::make_tuple(jr, kt, m.captured);
                auto it = dedup.find(k);
                if (it == dedup.end() ||
                    std::make_pair(jx, jy) <
                        std::make_pair(it->second.key[2], it->second.key[3]))
                  dedup[k] = std::move(m);
              });
        }
      }
      for (auto& kv : dedup) singles.push_back(std::move(kv.second));
      std::sort(singles.begin(), singles.end(),
                [](const FamilyMember& a, const FamilyMember& b) {
                  return a.key < b.key;
                });
    }
    std::vector<FamilyMember> unions = greedy_unions(
        singles, mu_, cfg_.max_union,
        [&](const std::vector<int>&, const std::vector<int>& cum) {
          return cum;  // box unions capture exactly the union of captures
        });
    for (auto& u : unions) singles.push_back(std::move(u));
    return singles;
  }

  const DiscreteMeasure& mu_;
  double p_;
  KernelParams params_;
  EmbedConfig cfg_;
  TLadder ladder_;
  Anchor anchor_;
  double r_max_ = 1.0;
  double total_ = 0.0;
  std::vector<std::vector<FamilyMember>> pools_;
  std::map<std::pair<double, double>, double> cap_single_;
  std::map<std::vector<double>, double> cap_union_;
};

// Boundary ball family for the Sobolev criteria: dyadic radii, centers on
// (rho/2)-lattices anchored at the measure, nominal (continuum) tent
// capture, Riesz capacities and perimeters solved on the recentered set.
class BallEngine {
 public:
  BallEngine(const DiscreteMeasure& mu, double beta, double p,
             const EmbedConfig& cfg)
      : mu_(mu), beta_(beta), p_(p), cfg_(cfg) {
    validate(mu_);
    validate(cfg_.spec);
    if (mu_.n != cfg_.spec.n)
      throw std::invalid_argument("embedding: measure/grid dimension mismatch");
    anchor_ = anchor_of(mu_);
    double h = cfg_.spec.h();
    rho_cap_ = cfg_.spec.L - 3.0 * h;
    double need = anchor_.any ? (4.0 / 3.0) * anchor_.t_hi + h : 1.0;
    rho_max_ = cfg_.r_max > 0 ? cfg_.r_max
                              : std::min(rho_cap_, std::exp2(std::ceil(
                                                       std::log2(need))));
  }

  int radii(int level) const { return cfg_.depth + level; }
  double rho_at(int jr) const { return rho_max_ * std::exp2(-jr); }
  const Anchor& anchor() const { return anchor_; }

  const std::vector<FamilyMember>& pool(int level) {
    while (static_cast<int>(pools_.size()) <= level)
      pools_.push_back(build(static_cast<int>(pools_.size())));
    return pools_[static_cast<std::size_t>(level)];
  }

  double max_mass(int level) {
    double m = 0;
    for (const auto& fm : pool(level)) m = std::max(m, fm.mass);
    return m;
  }

  IndicatorSet recentered(const FamilyMember& m,
                          const std::vector<FamilyMember>& singles) const {
    if (m.parts.empty())
      return ball_set(cfg_.spec, {0.0, 0.0}, m.r);
    const FamilyMember& base = singles[static_cast<std::size_t>(m.parts[0])];
    IndicatorSet out;
    bool first = true;
    for (int pi : m.parts) {
      const FamilyMember& s = singles[static_cast<std::size_t>(pi)];
      IndicatorSet part = ball_set(
          cfg_.spec, {s.c[0] - base.c[0], s.c[1] - base.c[1]}, s.r);
      out = first ? part : union_sets(out, part);
      first = false;
    }
    return out;
  }

  // value_kind 0: Cap^{beta,p}; 1: Per_beta; 2: Cap^{beta,1}.
  double solve_of(const FamilyMember& m,
                  const std::vector<FamilyMember>& singles, int value_kind) {
    std::vector<double> key{static_cast<double>(value_kind)};
    if (m.parts.empty()) {
      key.push_back(m.r);
    } else {
      const FamilyMember& base = singles[static_cast<std::size_t>(m.parts[0])];
      for (int pi : m.parts) {
        const FamilyMember& s = singles[static_cast<std::size_t>(pi)];
        key.push_back(s.r);
        key.push_back(s.c[0] - base.c[0]);
        key.push_back(s.c[1] - base.c[1]);
      }
    }
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    double v;
    try {
      IndicatorSet o = recentered(m, singles);
      if (o.empty()) throw std::invalid_argument("empty candidate");
      if (value_kind == 1)
        v = frac_perimeter(o, beta_);
      else
        v = frac_capacity(o, beta_, value_kind == 2 ? 1.0 : p_).value;
    } catch (const std::exception&) {
      v = kInf;
    }
    cache_[key] = v;
    return v;
  }

  double profile_at(int level, double t, int value_kind,
                    CriterionWitness* wit) {
    const std::vector<FamilyMember>& members = pool(level);
    double best = kInf;
    const FamilyMember* bm = nullptr;
    for (const FamilyMember& m : members) {
      if (!(m.mass > t)) continue;
      double v = solve_of(m, members, value_kind);
      if (v < best) {
        best = v;
        bm = &m;
      }
    }
    if (wit) *wit = ball_witness(bm, t);
    return best;
  }

  CriterionWitness ball_witness(const FamilyMember* m, double t) const {
    CriterionWitness w;
    if (!m) {
      w.kind = "none";
      w.label = "family exhausted: no member tent-captures mass > " + fmt(t);
      return w;
    }
    if (m->parts.empty()) {
      w.kind = "ball";
      w.data = {m->r, m->c[0]};
      if (mu_.n == 2) w.data.push_back(m->c[1]);
      w.label = "ball rho=" + fmt(m->r) + " c=" + fmt(m->c[0]) +
                (mu_.n == 2 ? "," + fmt(m->c[1]) : "");
    } else {
      w.kind = "set";
      w.data = {static_cast<double>(m->parts.size())};
      w.label = "union of " + fmt(static_cast<double>(m->parts.size())) +
                " balls (tent mass " + fmt(m->mass) + ")";
    }
    return w;
  }

  std::string family_string(int levels) const {
    return "dyadic balls: rho_max=" + fmt(rho_max_) + ", depth=" +
           fmt(cfg_.depth) + ".." + fmt(cfg_.depth + levels - 1) +
           ", (rho/2)-lattice anchored to mu, unions<=" + fmt(cfg_.max_union) +
           ", nominal tent capture, recentered boundary solves";
  }

 private:
  bool captured_by_ball(const Atom& at, const double* c, double rho) const {
    double d = mu_.n == 1 ? std::abs(at.x[0] - c[0])
                          : std::hypot(at.x[0] - c[0], at.x[1] - c[1]);
    return d + at.t < rho;
  }

  // Union capture in 1d: the closed shadow [x-t, x+t] must sit in one merged
  // component; in 2d the conservative per-member test is used.
  std::vector<int> union_capture(const std::vector<int>& seq,
                                 const std::vector<FamilyMember>& singles,
                                 const std::vector<int>& cum) const {
    if (mu_.n == 2) return cum;
    std::vector<std::pair<double, double>> iv;
    for (int pi : seq) {
      const FamilyMember& s = singles[static_cast<std::size_t>(pi)];
      iv.push_back({s.c[0] - s.r, s.c[0] + s.r});
    }
    std::sort(iv.begin(), iv.end());
    std::vector<std::pair<double, double>> merged;
    for (auto& p : iv) {
      if (!merged.empty() && p.first <= merged.back().second)
        merged.back().second = std::max(merged.back().second, p.second);
      else
        merged.push_back(p);
    }
    std::vector<int> out;
    for (std::size_t a = 0; a < mu_.atoms.size(); ++a) {
      const Atom& at = mu_.atoms[a];
      for (auto& m : merged)
        if (m.first < at.x[0] - at.t && at.x[0] + at.t < m.second) {
          out.push_back(static_cast<int>(a));
          break;
        }
    }
    return out;
  }

  std::vector<FamilyMember> build(int level) {
    std::vector<FamilyMember> singles;
    double h = cfg_.spec.h();
    if (anchor_.any) {
      std::map<std::pair<int, std::vector<int>>, FamilyMember> dedup;
      for (int jr = 0; jr < radii(level); ++jr) {
        double rho = rho_at(jr);
        if (rho < 2.0 * h || rho > rho_cap_) continue;
        double half = 0.5 * rho;
        for (const Atom& at : mu_.atoms) {
          if (!(at.t < rho)) continue;
          double u0 = (at.x[0] - anchor_.x[0]) / half;
          for (int jx = static_cast<int>(std::floor(u0)) - 3;
               jx <= static_cast<int>(std::floor(u0)) + 3; ++jx) {
            double cx = anchor_.x[0] + jx * half;
            int jy_lo = 0, jy_hi = 0;
            if (mu_.n == 2) {
              double u1 = (at.x[1] - anchor_.x[1]) / half;
              jy_lo = static_cast<int>(std::floor(u1)) - 3;
              jy_hi = static_cast<int>(std::floor(u1)) + 3;
            }
            for (int jy = jy_lo; jy <= jy_hi; ++jy) {
              double c[2] = {cx, anchor_.x[1] + jy * half};
              if (!captured_by_ball(at, c, rho)) continue;
              FamilyMember m;
              m.r = rho;
              m.c = {c[0], c[1]};
              m.key = {jr, 0, jx, jy};
              for (std::size_t a = 0; a < mu_.atoms.size(); ++a)
                if (captured_by_ball(mu_.atoms[a], c, rho))
                  m.captured.push_back(static_cast<int>(a));
              m.mass = mass_of(mu_, m.captured);
              auto k = std::make_pair(jr, m.captured);
              auto it = dedup.find(k);
              if (it == dedup.end() ||
                  std::make_pair(jx, jy) <
                      std::make_pair(it->second.key[2], it->second.key[3]))
                dedup[k] = std::move(m);
            }
          }
        }
      }
      for (auto& kv : dedup) singles.push_back(std::move(kv.second));
      std::sort(singles.begin(), singles.end(),
                [](const FamilyMember& a, const FamilyMember& b) {
                  return a.key < b.key;
                });
    }
    std::vector<FamilyMember> unions = greedy_unions(
        singles, mu_, cfg_.max_union,
        [&](const std::vector<int>& seq, const std::vector<int>& cum) {
          return union_capture(seq, singles, cum);
        });
    for (auto& u : unions) singles.push_back(std::move(u));
    return singles;
  }

  const DiscreteMeasure& mu_;
  double beta_;
  double p_;
  EmbedConfig cfg_;
  Anchor anchor_;
  double rho_max_ = 1.0, rho_cap_ = 1.0;
  std::vector<std::vector<FamilyMember>> pools_;
  std::map<std::vector<double>, double> cache_;
};

// Dyadic mass grid below an absolute power-of-two top (grids of dominated
// measures coincide whenever their totals share a dyadic ceiling).
std::vector<double> dyadic_mass_grid(double total, int count, bool strict) {
  std::vector<double> out;
  if (!(total > 0)) return out;
  double top = std::exp2(std::ceil(std::log2(total)));
  for (int j = strict ? 1 : 0; j < count + (strict ? 1 : 0); ++j)
    out.push_back(top * std::exp2(-j));
  return out;
}

void finalize(CriterionReport& rep, std::vector<double> vals,
              CriterionWitness wit, std::string family) {
  rep.refinement_values = std::move(vals);
  rep.value = rep.refinement_values.back();
  rep.witness = std::move(wit);
  rep.family = std::move(family);
  rep.verdict = classify(rep.refinement_values);
}

}  // namespace

double cap_minimizing_Lp(const DiscreteMeasure& mu, double lambda, double p,
                         const KernelParams& params, const EmbedConfig& cfg,
                         int level, CriterionWitness* witness) {
  std::vector<CriterionWitness> ws;
  double v = cap_profile_Lp(mu, {lambda}, p, params, cfg, level,
                            witness ? &ws : nullptr)[0];
  if (witness) *witness = ws[0];
  return v;
}

std::vector<double> cap_profile_Lp(const DiscreteMeasure& mu,
                                   const std::vector<double>& lambdas,
                                   double p, const KernelParams& params,
                                   const EmbedConfig& cfg, int level,
                                   std::vector<CriterionWitness>* w) {
  validate(params);
  BoxEngine eng(mu, p, params, cfg);
  std::vector<double> out;
  if (w) w->clear();
  for (double lam : lambdas) {
    if (!(lam > 0))
      throw std::invalid_argument("cap_minimizing_Lp: mass must be positive");
    CriterionWitness wit;
    out.push_back(eng.profile_at(level, lam, w ? &wit : nullptr));
    if (w) w->push_back(std::move(wit));
  }
  return out;
}

double cap_minimizing_frac(const DiscreteMeasure& mu, double t, double beta,
                           double p, const EmbedConfig& cfg, int level,
                           CriterionWitness* witness) {
  std::vector<CriterionWitness> ws;
  double v = cap_profile_frac(mu, {t}, beta, p, cfg, level,
                              witness ? &ws : nullptr)[0];
  if (witness) *witness = ws[0];
  return v;
}

std::vector<double> cap_profile_frac(const DiscreteMeasure& mu,
                                     const std::vector<double>& ts,
                                     double beta, double p,
                                     const EmbedConfig& cfg, int level,
                                     std::vector<CriterionWitness>* w) {
  int n = cfg.spec.n;
  if (!(beta > 0 && beta < static_cast<double>(n)))
    throw std::invalid_argument("cap_minimizing_frac: beta outside (0, n)");
  BallEngine eng(mu, beta, p, cfg);
  std::vector<double> out;
  if (w) w->clear();
  for (double t : ts) {
    if (!(t >= 0))
      throw std::invalid_argument("cap_minimizing_frac: t must be >= 0");
    CriterionWitness wit;
    out.push_back(eng.profile_at(level, t, 0, w ? &wit : nullptr));
    if (w) w->push_back(std::move(wit));
  }
  return out;
}

namespace {

// sup over lattice boxes with t0 <= factor * r of mass / r^{qn/p}; grid-free,
// so the sweep sees arbitrarily small scales.
CriterionReport box_growth_report(BoxEngine& eng, const DiscreteMeasure& mu,
                                  double p, double q, double factor,
                                  int levels, const EmbedConfig& cfg,
                                  const std::string& id) {
  CriterionReport rep;
  rep.id = id;
  double expo = q * mu.n / p;
  std::vector<double> vals;
  CriterionWitness wit{"none", {}, "empty measure"};
  for (int lvl = 0; lvl < levels; ++lvl) {
    double sup = 0.0;
    CriterionWitness w{"none", {}, "empty measure"};
    for (int jr = 0; jr < eng.radii(lvl); ++jr) {
      double r = eng.r_at(jr);
      // candidates sorted by lattice key so sup ties break lexicographically
      std::map<std::array<int, 3>, std::array<double, 4>> cand;
      for (const Atom& at : mu.atoms)
        eng.capture_candidates(at, jr, 2.0 * factor,
                               [&](int kt, int jx, int jy, const double* c,
                                   double t0, double rr) {
                                 cand[{kt, jx, jy}] = {c[0], c[1], t0, rr};
                               });
      for (const auto& kv : cand) {
        const auto& g = kv.second;
        double x0[2] = {g[0], g[1]};
        double v = box_mass(mu, g[3], x0, g[2]) / std::pow(g[3], expo);
        if (v > sup) {
          sup = v;
          w.kind = "box";
          w.data = {g[3], g[2], g[0]};
          if (mu.n == 2) w.data.push_back(g[1]);
          w.label = "box r=" + fmt(g[3]) + " t0=" + fmt(g[2]) +
                    " x0=" + fmt(g[0]) + (mu.n == 2 ? "," + fmt(g[1]) : "");
        }
      }
    }
    vals.push_back(sup);
    if (lvl == levels - 1) wit = w;
  }
  finalize(rep, std::move(vals), std::move(wit),
           "dyadic box lattice, grid-free mass sweep, t0<=" + fmt(factor) +
               "r, depth=" + fmt(cfg.depth) + ".." +
               fmt(cfg.depth + levels - 1));
  return rep;
}

}  // namespace

std::vector<CriterionReport> check_Lp_embedding(const DiscreteMeasure& mu,
                                                double p, double q,
                                                const KernelParams& params,
                                                const EmbedConfig& cfg) {
  if (!(p > 1.0) || !(q > 1.0) || !std::isfinite(p) || !std::isfinite(q))
    throw std::invalid_argument("check_Lp_embedding: need p, q in (1, inf)");
  validate(params);
  int levels = std::max(2, cfg.refinements) + 1;
  BoxEngine eng(mu, p, params, cfg);
  double total = eng.total_mass();
  std::vector<CriterionReport> out;
  const double ln2 = std::log(2.0);

  if (p <= q) {
    CriterionReport rep;
    rep.id = "mass-capacity-sup";
    std::vector<double> vals;
    CriterionWitness wit{"none", {}, "empty measure"};
    for (int lvl = 0; lvl < levels; ++lvl) {
      double sup = 0.0;
      CriterionWitness w{"none", {}, "empty measure"};
      for (double lam : dyadic_mass_grid(total, cfg.mass_levels + 2 * lvl,
                                         false)) {
        double c = eng.profile_at(lvl, lam, nullptr);
        if (!std::isfinite(c)) continue;
        double ratio = c > 0 ? std::pow(lam, p / q) / c : kInf;
        if (ratio > sup) {
          sup = ratio;
          w.kind = "lambda";
          w.data = {lam, c};
          w.label = "lambda=" + fmt(lam) + " c=" + fmt(c);
        }
      }
      vals.push_back(sup);
      if (lvl == levels - 1) wit = w;
    }
    finalize(rep, std::move(vals), std::move(wit),
             eng.family_string(levels) + ", dyadic mass grid " +
                 fmt(cfg.mass_levels) + ".." +
                 fmt(cfg.mass_levels + 2 * (levels - 1)));
    out.push_back(std::move(rep));
    out.push_back(
        box_growth_report(eng, mu, p, q, 1.0, levels, cfg, "box-mass-growth"));
    out.push_back(box_growth_report(eng, mu, p, q, 2.0, levels, cfg,
                                    "box-mass-growth-wide"));
    return out;
  }

  // p > q: integral conditions.
  double ex = q / (p - q);
  {
    CriterionReport rep;
    rep.id = "mass-capacity-integral";
    std::vector<double> vals;
    CriterionWitness wit{"none", {}, "empty measure"};
    for (int lvl = 0; lvl < levels; ++lvl) {
      double sum = 0.0;
      double peak = -1.0;
      CriterionWitness w{"none", {}, "empty measure"};
      for (double lam : dyadic_mass_grid(total, cfg.mass_levels + 2 * lvl,
                                         false)) {
        double c = eng.profile_at(lvl, lam, nullptr);
        if (!std::isfinite(c) || !(c > 0)) continue;
        double term = std::pow(std::pow(lam, p / q) / c, ex) * ln2;
        sum += term;
        if (term > peak) {
          peak = term;
          w.kind = "lambda";
          w.data = {lam, c};
          w.label = "peak term at lambda=" + fmt(lam) + " c=" + fmt(c);
        }
      }
      vals.push_back(sum);
      if (lvl == levels - 1) wit = w;
    }
    finalize(rep, std::move(vals), std::move(wit),
             eng.family_string(levels) + ", dyadic dlambda/lambda sum");
    out.push_back(std::move(rep));
  }
  {
    CriterionReport rep;
    rep.id = "ball-wolff-integral";
    std::vector<double> vals;
    CriterionWitness wit{"none", {}, "empty measure"};
    for (int lvl = 0; lvl < levels; ++lvl) {
      double sum = 0.0;
      double peak = -1.0;
      CriterionWitness w{"none", {}, "empty measure"};
      for (const Atom& at : mu.atoms) {
        double term = 0.0;
        for (int jr = 0; jr < eng.radii(lvl); ++jr) {
          double r = eng.r_at(jr);
          double m = box_mass(mu, r, at.x.data(), at.t);
          if (!(m > 0)) continue;
          double c = eng.cap_box(r, at.t);
          if (!std::isfinite(c) || !(c > 0)) continue;
          term += std::pow(m / c, 1.0 / (p - 1.0)) * ln2;
        }
        sum += at.w * term;
        if (at.w * term > peak) {
          peak = at.w * term;
          w.kind = "atom";
          w.data = {at.x[0], at.t, term};
          w.label = "atom x=" + fmt(at.x[0]) + " t=" + fmt(at.t) +
                    " radial sum " + fmt(term);
        }
      }
      vals.push_back(sum);
      if (lvl == levels - 1) wit = w;
    }
    finalize(rep, std::move(vals), std::move(wit),
             "atom-based boxes B_r(x_a, t_a), dyadic dr/r sum, " +
                 eng.family_string(levels));
    out.push_back(std::move(rep));
  }
  {
    CriterionReport rep;
    rep.id = "energy-integral";
    double expo = q * (p - 1.0) / (p - q);
    double sum = 0.0;
    double peak = -1.0;
    CriterionWitness w{"none", {}, "empty measure"};
    for (const Atom& at : mu.atoms) {
      double hp = wolff_potential_exact(mu, at.x.data(), at.t, p);
      double term = at.w * std::pow(hp, expo);
      sum += term;
      if (term > peak) {
        peak = term;
        w.kind = "atom";
        w.data = {at.x[0], at.t, hp};
        w.label = "atom x=" + fmt(at.x[0]) + " t=" + fmt(at.t) +
                  " H_p=" + fmt(hp);
      }
    }
    finalize(rep, std::vector<double>(static_cast<std::size_t>(levels), sum),
             std::move(w),
             "breakpoint-exact Wolff potentials (no family limit)");
    out.push_back(std::move(rep));
  }
  return out;
}

std::vector<CriterionReport> check_sobolev_embedding(const DiscreteMeasure& mu,
                                                     double beta, double p,
                                                     double q,
                                                     const EmbedConfig& cfg) {
  validate(mu);
  int n = cfg.spec.n;
  if (mu.n != n)
    throw std::invalid_argument("check_sobolev_embedding: dimension mismatch");
  if (!(beta > 0 && beta < static_cast<double>(n)))
    throw std::invalid_argument("check_sobolev_embedding: beta outside (0, n)");
  if (!(q > 0) || !std::isfinite(q))
    throw std::invalid_argument("check_sobolev_embedding: q must be positive");
  if (!(p >= 1))
    throw std::invalid_argument("check_sobolev_embedding: p must be >= 1");
  int levels = std::max(2, cfg.refinements) + 1;
  std::vector<CriterionReport> out;

  if (p == 1.0 && beta >= 1.0) {
    for (const char* id : {"tent-perimeter-sup", "tent-capacity-sup"}) {
      CriterionReport rep;
      rep.id = id;
      rep.verdict = Verdict::unsupported;
      rep.witness.kind = "none";
      rep.family =
          "unsupported: the p=1 route goes through the fractional perimeter, "
          "defined for beta in (0,1)";
      out.push_back(std::move(rep));
    }
    return out;
  }
  if (p > 1.0 && p >= static_cast<double>(n) / beta * (1.0 - 1e-12))
    throw std::invalid_argument(
        "check_sobolev_embedding: p at or above n/beta unsupported");

  BallEngine eng(mu, beta, p, cfg);

  auto sup_report = [&](const std::string& id, double mass_expo,
                        int value_kind, bool singles_only) {
    CriterionReport rep;
    rep.id = id;
    std::vector<double> vals;
    CriterionWitness wit{"none", {}, "empty measure"};
    for (int lvl = 0; lvl < levels; ++lvl) {
      double sup = 0.0;
      CriterionWitness w{"none", {}, "empty measure"};
      const auto& members = eng.pool(lvl);
      for (const FamilyMember& m : members) {
        if (singles_only && !m.parts.empty()) continue;
        if (!(m.mass > 0)) continue;
        double denom = eng.solve_of(m, members, value_kind);
        if (!std::isfinite(denom)) continue;
        double v = denom > 0 ? std::pow(m.mass, mass_expo) / denom : kInf;
        if (v > sup) {
          sup = v;
          w = eng.ball_witness(&m, 0.0);
          w.data.push_back(m.mass);
          w.data.push_back(denom);
        }
      }
      vals.push_back(sup);
      if (lvl == levels - 1) wit = w;
    }
    finalize(rep, std::move(vals), std::move(wit), eng.family_string(levels));
    return rep;
  };

  if (p == 1.0) {
    out.push_back(sup_report("tent-perimeter-sup", 1.0 / q, 1, false));
    out.push_back(sup_report("tent-capacity-sup", 1.0 / q, 2, false));
    return out;
  }

  const double ln2 = std::log(2.0);
  if (p <= q) {
    CriterionReport rep;
    rep.id = "tent-mass-capacity-sup";
    std::vector<double> vals;
    CriterionWitness wit{"none", {}, "empty measure"};
    for (int lvl = 0; lvl < levels; ++lvl) {
      double sup = 0.0;
      CriterionWitness w{"none", {}, "empty measure"};
      for (double t : dyadic_mass_grid(eng.max_mass(lvl),
                                       cfg.mass_levels + 2 * lvl, true)) {
        double c = eng.profile_at(lvl, t, 0, nullptr);
        if (!std::isfinite(c)) continue;
        double ratio = c > 0 ? std::pow(t, p / q) / c : kInf;
        if (ratio > sup) {
          sup = ratio;
          w.kind = "lambda";
          w.data = {t, c};
          w.label = "t=" + fmt(t) + " c=" + fmt(c);
        }
      }
      vals.push_back(sup);
      if (lvl == levels - 1) wit = w;
    }
    finalize(rep, std::move(vals), std::move(wit),
             eng.family_string(levels) + ", dyadic tent-mass grid");
    out.push_back(std::move(rep));
    out.push_back(sup_report("tent-capacity-family-sup", p / q, 0, false));
    out.push_back(sup_report("tent-capacity-ball-sup", 1.0 / q, 0, true));
    return out;
  }

  CriterionReport rep;
  rep.id = "tent-mass-capacity-integral";
  double ex = q / (p - q);
  std::vector<double> vals;
  CriterionWitness wit{"none", {}, "empty measure"};
  for (int lvl = 0; lvl < levels; ++lvl) {
    double sum = 0.0;
    double peak = -1.0;
    CriterionWitness w{"none", {}, "empty measure"};
    for (double t : dyadic_mass_grid(eng.max_mass(lvl),
                                     cfg.mass_levels + 2 * lvl, true)) {
      double c = eng.profile_at(lvl, t, 0, nullptr);
      if (!std::isfinite(c) || !(c > 0)) continue;
      double term = std::pow(std::pow(t, p / q) / c, ex) * ln2;
      sum += term;
      if (term > peak) {
        peak = term;
        w.kind = "lambda";
        w.data = {t, c};
        w.label = "peak term at t=" + fmt(t) + " c=" + fmt(c);
      }
    }
    vals.push_back(sum);
    if (lvl == levels - 1) wit = w;
  }
  finalize(rep, std::move(vals), std::move(wit),
           eng.family_string(levels) + ", dyadic dt/t sum");
  out.push_back(std::move(rep));
  return out;
}

EmpiricalRatioReport empirical_embedding_ratio(
    const DiscreteMeasure& mu, double p, double q, TestSpace space,
    const KernelParams& params, const GridSpec& spec, double beta,
    const EmpiricalFamilyConfig& cfg) {
  validate(mu);
  validate(params);
  validate(spec);
  if (mu.n != spec.n || params.n != spec.n)
    throw std::invalid_argument("empirical_embedding_ratio: dim mismatch");
  if (!(q > 0) || !(p >= 1))
    throw std::invalid_argument("empirical_embedding_ratio: bad exponents");
  SobolevParams sp;
  if (space == TestSpace::sobolev) {
    sp.beta = beta;
    sp.p = p;
    sp.branch = p == 1.0 ? SobolevBranch::difference : SobolevBranch::fourier;
  }

  double h = spec.h();
  std::array<double, 2> lo{0.0, 0.0}, hi{0.0, 0.0};
  bool any = false;
  for (const Atom& a : mu.atoms) {
    if (!any) {
      lo = hi = a.x;
      any = true;
      continue;
    }
    for (int d = 0; d < 2; ++d) {
      lo[d] = std::min(lo[d], a.x[d]);
      hi[d] = std::max(hi[d], a.x[d]);
    }
  }
  double spread = std::max(hi[0] - lo[0], hi[1] - lo[1]);
  double pad = cfg.center_pad > 0 ? cfg.center_pad
                                  : std::max(2.0 * h, 0.25 * spread);
  double smin = cfg.scale_min > 0 ? cfg.scale_min : h;
  double smax = cfg.scale_max > 0 ? cfg.scale_max : 0.5 * spec.L;
  if (smax < smin) std::swap(smin, smax);

  std::mt19937 rng(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const char* kinds[3] = {"gaussian", "bump", "mollified-indicator"};

  EmpiricalRatioReport rep;
  double hn = std::pow(h, spec.n);
  for (int k = 0; k < cfg.count; ++k) {
    int kind = k % 3;
    double cx = lo[0] - pad + (hi[0] + pad - (lo[0] - pad)) * u01(rng);
    double cy = spec.n == 2
                    ? lo[1] - pad + (hi[1] + pad - (lo[1] - pad)) * u01(rng)
                    : 0.0;
    double sigma = std::exp(std::log(smin) +
                            (std::log(smax) - std::log(smin)) * u01(rng));
    GridFunction f = make_grid_function(spec, [&](const double* x) {
      double r = spec.n == 1 ? std::abs(x[0] - cx)
                             : std::hypot(x[0] - cx, x[1] - cy);
      if (kind == 0) return std::exp(-0.5 * r * r / (sigma * sigma));
      if (kind == 1) {
        double s = r / sigma;
        return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
      }
      double u = (sigma - r) / (0.25 * sigma);
      u = std::min(1.0, std::max(0.0, u));
      return u * u * (3.0 - 2.0 * u);
    });
    double den = space == TestSpace::lebesgue ? lp_norm(f, p)
                                              : sobolev_norm(f, sp);
    if (!(den > 0) || !std::isfinite(den)) {
      ++rep.skipped;
      continue;
    }
    double acc = 0.0;
    for (const Atom& a : mu.atoms) {
      double u = 0.0;
      for (std::size_t i = 0; i < spec.size(); ++i) {
        auto y = spec.point(i);
        double d[2] = {a.x[0] - y[0], a.x[1] - y[1]};
        u += poisson_kernel(params, d, a.t) * f.v[i];
      }
      u *= hn;
      acc += a.w * std::pow(std::abs(u), q);
    }
    double num = std::pow(acc, 1.0 / q);
    ++rep.evaluated;
    double ratio = num / den;
    if (ratio > rep.sup_ratio) {
      rep.sup_ratio = ratio;
      rep.witness_kind = kinds[kind];
      rep.witness_center = {cx, cy};
      rep.witness_scale = sigma;
      rep.numerator = num;
      rep.denominator = den;
    }
  }
  return rep;
}

std::vector<DiscreteMeasure> seeded_measure_family(unsigned seed, int count) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> jx(-0.2, 0.2), jt(-0.04, 0.04),
      jw(-0.03, 0.03);
  std::vector<DiscreteMeasure> out;
  for (int k = 0; k < count; ++k) {
    DiscreteMeasure mu;
    mu.n = 1;
    double base_t = 0.15 * std::pow(2.0, k);
    double base_w = std::pow(1.8, -k);
    for (int i = 0; i < 3; ++i) {
      Atom a;
      a.x = {jx(rng), 0.0};
      a.t = base_t * (1.0 + jt(rng));
      a.w = base_w / 3.0 * (1.0 + jw(rng));
      mu.atoms.push_back(a);
    }
    out.push_back(std::move(mu));
  }
  return out;
}

namespace {

nlohmann::json value_json(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "infinity" : "-infinity";
}

nlohmann::json report_json(const CriterionReport& rep) {
  nlohmann::json w;
  w["kind"] = rep.witness.kind;
  w["data"] = rep.witness.data;
  w["label"] = rep.witness.label;
  nlohmann::json j;
  j["id"] = rep.id;
  j["value"] = value_json(rep.value);
  j["witness"] = w;
  j["family"] = rep.family;
  j["verdict"] = to_string(rep.verdict);
  nlohmann::json rv = nlohmann::json::array();
  for (double v : rep.refinement_values) rv.push_back(value_json(v));
  j["refinement_values"] = rv;
  return j;
}

}  // namespace

std::string to_json(const CriterionReport& rep) {
  return report_json(rep).dump();
}

std::string to_json(const std::vector<CriterionReport>& reps) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reps) arr.push_back(report_json(r));
  return arr.dump();
}

}  // namespace capax
