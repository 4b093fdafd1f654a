#include "capax/sets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace capax {

CompactSetGrid box_set(const GridSpec& spec, const TLadder& ladder, double r,
                       const std::array<double, 2>& x0, double t0) {
  validate(spec);
  validate(ladder);
  if (!(r > 0.0)) throw std::invalid_argument("box_set: r <= 0");
  CompactSetGrid e{spec, ladder, {}, ""};
  std::vector<int> slices;
  auto ts = ladder.slices();
  for (int j = 0; j < ladder.k; ++j)
    if (ts[j] - t0 > r && ts[j] - t0 < 2.0 * r) slices.push_back(j);
  for (std::size_t idx = 0; idx < spec.size(); ++idx) {
    auto p = spec.point(idx);
    double d2 = (p[0] - x0[0]) * (p[0] - x0[0]);
    if (spec.n == 2) d2 += (p[1] - x0[1]) * (p[1] - x0[1]);
    if (std::sqrt(d2) < r / 2.0)
      for (int j : slices) e.nodes.push_back({idx, j});
  }
  std::sort(e.nodes.begin(), e.nodes.end());
  std::ostringstream g;
  g << "box r=" << r << " x0=" << x0[0];
  if (spec.n == 2) g << "," << x0[1];
  g << " t0=" << t0;
  e.generator = g.str();
  return e;
}

CompactSetGrid union_sets(const CompactSetGrid& a, const CompactSetGrid& b) {
  if (!(a.spec == b.spec))
    throw std::invalid_argument("union_sets: spec mismatch");
  CompactSetGrid e = a;
  e.nodes.insert(e.nodes.end(), b.nodes.begin(), b.nodes.end());
  std::sort(e.nodes.begin(), e.nodes.end());
  e.nodes.erase(std::unique(e.nodes.begin(), e.nodes.end()), e.nodes.end());
  e.generator = "union(" + a.generator + "; " + b.generator + ")";
  return e;
}

CompactSetGrid translate_set(const CompactSetGrid& e, int cells_axis0) {
  CompactSetGrid out = e;
  out.nodes.clear();
  for (const HalfSpaceNode& hn : e.nodes) {
    auto ij = e.spec.unflat(hn.node);
    int i0 = ij[0] + cells_axis0;
    if (i0 < 0 || i0 >= e.spec.m)
      throw std::invalid_argument("translate_set: leaves the grid");
    out.nodes.push_back({e.spec.flat(i0, ij[1]), hn.slice});
  }
  std::sort(out.nodes.begin(), out.nodes.end());
  out.generator = e.generator + " translated";
  return out;
}

std::size_t IndicatorSet::count() const {
  std::size_t c = 0;
  for (auto b : member) c += b != 0;
  return c;
}

double IndicatorSet::volume() const {
  return static_cast<double>(count()) * std::pow(spec.h(), spec.n);
}

void validate(const IndicatorSet& e) {
  validate(e.spec);
  if (e.member.size() != e.spec.size())
    throw std::invalid_argument("IndicatorSet: size mismatch");
  if (e.count() == e.member.size())
    throw std::invalid_argument("IndicatorSet: complement is empty");
}

IndicatorSet interval_set(const GridSpec& spec, double a, double b) {
  validate(spec);
  if (spec.n != 1) throw std::invalid_argument("interval_set: n must be 1");
  IndicatorSet e{spec, std::vector<std::uint8_t>(spec.size(), 0), ""};
  for (int i = 0; i < spec.m; ++i) {
    double x = spec.coord(i);
    if (x >= a && x < b) e.member[i] = 1;
  }
  std::ostringstream g;
  g << "interval " << a << " " << b;
  e.generator = g.str();
  validate(e);
  return e;
}

IndicatorSet rect_set(const GridSpec& spec, double x0, double y0, double x1,
                      double y1) {
  validate(spec);
  if (spec.n != 2) throw std::invalid_argument("rect_set: n must be 2");
  IndicatorSet e{spec, std::vector<std::uint8_t>(spec.size(), 0), ""};
  for (std::size_t idx = 0; idx < spec.size(); ++idx) {
    auto p = spec.point(idx);
    if (p[0] >= x0 && p[0] < x1 && p[1] >= y0 && p[1] < y1) e.member[idx] = 1;
  }
  std::ostringstream g;
  g << "rect " << x0 << " " << y0 << " " << x1 << " " << y1;
  e.generator = g.str();
  validate(e);
  return e;
}

IndicatorSet ball_set(const GridSpec& spec, const std::array<double, 2>& c,
                      double r) {
  validate(spec);
  IndicatorSet e{spec, std::vector<std::uint8_t>(spec.size(), 0), ""};
  for (std::size_t idx = 0; idx < spec.size(); ++idx) {
    auto p = spec.point(idx);
    double d2 = (p[0] - c[0]) * (p[0] - c[0]);
    if (spec.n == 2) d2 += (p[1] - c[1]) * (p[1] - c[1]);
    if (std::sqrt(d2) < r) e.member[idx] = 1;
  }
  std::ostringstream g;
  g << "ball " << c[0];
  if (spec.n == 2) g << "," << c[1];
  g << " r=" << r;
  e.generator = g.str();
  validate(e);
  return e;
}

IndicatorSet union_sets(const IndicatorSet& a, const IndicatorSet& b) {
  if (!(a.spec == b.spec))
    throw std::invalid_argument("union_sets: spec mismatch");
  IndicatorSet e = a;
  for (std::size_t i = 0; i < e.member.size(); ++i)
    e.member[i] = e.member[i] || b.member[i];
  e.generator = "union(" + a.generator + "; " + b.generator + ")";
  validate(e);
  return e;
}

IndicatorSet complement_within_box(const IndicatorSet& e) {
  IndicatorSet out = e;
  for (auto& b : out.member) b = !b;
  out.generator = "complement(" + e.generator + ")";
  return out;
}

IndicatorSet dilate(const IndicatorSet& e, int cells) {
  IndicatorSet out = e;
  const GridSpec& s = e.spec;
  for (std::size_t idx = 0; idx < e.member.size(); ++idx) {
    if (!e.member[idx]) continue;
    auto ij = s.unflat(idx);
    for (int d0 = -cells; d0 <= cells; ++d0) {
      int i0 = ij[0] + d0;
      if (i0 < 0 || i0 >= s.m) continue;
      if (s.n == 1) {
        out.member[i0] = 1;
        continue;
      }
      for (int d1 = -cells; d1 <= cells; ++d1) {
        int i1 = ij[1] + d1;
        if (i1 < 0 || i1 >= s.m) continue;
        out.member[s.flat(i0, i1)] = 1;
      }
    }
  }
  out.generator = "dilate(" + e.generator + ")";
  validate(out);
  return out;
}

IndicatorSet read_indicator(const std::string& path, const GridSpec& spec) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_indicator: cannot open " + path);
  IndicatorSet e{spec, std::vector<std::uint8_t>(spec.size(), 0), "union"};
  std::string line;
  bool any = false;
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::string kind;
    ss >> kind;
    if (kind.empty() || kind == "union" || kind[0] == '#') continue;
    if (kind == "interval") {
      double a, b;
      if (!(ss >> a >> b)) throw std::runtime_error("bad interval line");
      e = any ? union_sets(e, interval_set(spec, a, b))
              : interval_set(spec, a, b);
    } else if (kind == "rect") {
      double x0, y0, x1, y1;
      if (!(ss >> x0 >> y0 >> x1 >> y1))
        throw std::runtime_error("bad rect line");
      e = any ? union_sets(e, rect_set(spec, x0, y0, x1, y1))
              : rect_set(spec, x0, y0, x1, y1);
    } else {
      throw std::runtime_error("read_indicator: unknown primitive " + kind);
    }
    any = true;
  }
  if (!any) throw std::runtime_error("read_indicator: no primitives");
  return e;
}

void write_indicator(const std::string& path, const IndicatorSet& e) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_indicator: cannot open " + path);
  os << "# generator: " << e.generator << "\n";
  os << "union\n";
  // Emit maximal runs as primitives (1D) or per-cell unit rects (2D).
  const GridSpec& s = e.spec;
  if (s.n == 1) {
    int i = 0;
    while (i < s.m) {
      if (!e.member[i]) {
        ++i;
        continue;
      }
      int j = i;
      while (j < s.m && e.member[j]) ++j;
      os.precision(17);
      os << "interval " << s.coord(i) - s.h() / 2 << " "
         << s.coord(j - 1) + s.h() / 2 << "\n";
      i = j;
    }
  } else {
    os.precision(17);
    for (std::size_t idx = 0; idx < e.member.size(); ++idx)
      if (e.member[idx]) {
        auto p = s.point(idx);
        os << "rect " << p[0] - s.h() / 2 << " " << p[1] - s.h() / 2 << " "
           << p[0] + s.h() / 2 << " " << p[1] + s.h() / 2 << "\n";
      }
  }
}

}  // namespace capax
