#pragma once
// Finite set representations: half-space node sets (compact E in the upper
// half-space) and boundary cell unions (measurable E in R^n).
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "capax/grid.hpp"

namespace capax {

struct HalfSpaceNode {
  std::size_t node = 0;  // flat boundary-grid index
  int slice = 0;         // ladder slice index
  bool operator==(const HalfSpaceNode& o) const {
    return node == o.node && slice == o.slice;
  }
  bool operator<(const HalfSpaceNode& o) const {
    return slice != o.slice ? slice < o.slice : node < o.node;
  }
};

// Compact set in the half-space as a finite list of (node, slice) pairs.
struct CompactSetGrid {
  GridSpec spec;
  TLadder ladder;
  std::vector<HalfSpaceNode> nodes;  // sorted, unique
  std::string generator = "explicit";

  bool empty() const { return nodes.empty(); }
};

// Box B_r(x0,t0) = {|x-x0| < r/2} x {r < t-t0 < 2r}, open conditions, with
// nodes drawn from the grid and slices from the ladder.
CompactSetGrid box_set(const GridSpec& spec, const TLadder& ladder, double r,
                       const std::array<double, 2>& x0, double t0);
CompactSetGrid union_sets(const CompactSetGrid& a, const CompactSetGrid& b);
CompactSetGrid translate_set(const CompactSetGrid& e, int cells_axis0);

// Boundary set as a union of grid cells; cell i belongs iff its center is a
// member. Complement must stay nonempty.
struct IndicatorSet {
  GridSpec spec;
  std::vector<std::uint8_t> member;
  std::string generator = "explicit";

  std::size_t count() const;
  double volume() const;  // count * h^n
  bool empty() const { return count() == 0; }
};

void validate(const IndicatorSet& e);

// 1D cells with center in [a,b).
IndicatorSet interval_set(const GridSpec& spec, double a, double b);
// 2D cells with center in [x0,x1) x [y0,y1).
IndicatorSet rect_set(const GridSpec& spec, double x0, double y0, double x1,
                      double y1);
// Cells with center in the open ball B(c, r).
IndicatorSet ball_set(const GridSpec& spec, const std::array<double, 2>& c,
                      double r);
IndicatorSet union_sets(const IndicatorSet& a, const IndicatorSet& b);
IndicatorSet complement_within_box(const IndicatorSet& e);
// Grow by `cells` cells in every axis direction (Chebyshev dilation).
IndicatorSet dilate(const IndicatorSet& e, int cells);

// Generator text format: optional "union" line, then one primitive per line:
// "interval a b" (1D) or "rect x0 y0 x1 y1" (2D). Members are the union.
IndicatorSet read_indicator(const std::string& path, const GridSpec& spec);
void write_indicator(const std::string& path, const IndicatorSet& e);

}  // namespace capax
