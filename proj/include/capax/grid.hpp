#pragma once
// Discretization substrate: uniform node-centered grids on [-L,L]^n, grid
// functions, geometric t-ladders, half-space fields, L^p / Lorentz norms,
// and FFT convolution.
//
// Grid convention: node i sits at x_i = -L + i h with h = 2L/m, and doubles
// as the center of cell [x_i - h/2, x_i + h/2). m is even so the origin is a
// node. All integrals are midpoint quadrature h^n * sum.
#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace capax {

struct GridSpec {
  int n = 1;     // 1 or 2
  double L = 1;  // domain [-L,L]^n
  int m = 8;     // nodes per axis (even; power of two recommended)

  double h() const { return 2.0 * L / m; }
  double coord(int i) const { return -L + i * h(); }
  std::size_t size() const {
    return n == 1 ? static_cast<std::size_t>(m)
                  : static_cast<std::size_t>(m) * m;
  }
  // Row-major: flat = i0 * m + i1 for n=2.
  std::size_t flat(int i0, int i1 = 0) const {
    return n == 1 ? static_cast<std::size_t>(i0)
                  : static_cast<std::size_t>(i0) * m + i1;
  }
  std::array<int, 2> unflat(std::size_t idx) const {
    if (n == 1) return {static_cast<int>(idx), 0};
    return {static_cast<int>(idx / m), static_cast<int>(idx % m)};
  }
  std::array<double, 2> point(std::size_t idx) const {
    auto ij = unflat(idx);
    return {coord(ij[0]), n == 2 ? coord(ij[1]) : 0.0};
  }
  bool operator==(const GridSpec& o) const {
    return n == o.n && L == o.L && m == o.m;
  }
};

void validate(const GridSpec& spec, std::size_t node_budget = 1u << 20);

struct GridFunction {
  GridSpec spec;
  std::vector<double> v;
};

GridFunction make_grid_function(
    const GridSpec& spec, const std::function<double(const double*)>& fn);

struct TLadder {
  double t_min = 0;
  double t_max = 0;
  int k = 0;  // slice count, >= 2

  double rho() const;
  double slice(int j) const;  // t_min * rho^j
  std::vector<double> slices() const;
};

void validate(const TLadder& ladder);
// Geometric ladder spanning [h/2, 4L] with k slices.
TLadder default_ladder(const GridSpec& spec, int k = 64);

struct HalfSpaceField {
  GridSpec spec;
  TLadder ladder;
  std::vector<double> v;  // v[j * spec.size() + node]

  double at(int j, std::size_t node) const { return v[j * spec.size() + node]; }
  double& at(int j, std::size_t node) { return v[j * spec.size() + node]; }
};

// Midpoint-quadrature L^p norm; p = infinity gives the max of |f|.
double lp_norm(const GridFunction& f, double p);

// Exact Lorentz quasi-norms of a finitely supported function given as
// (value, weight) samples against a discrete measure. variant = p in (0,inf)
// for L^{q,p}, infinity for L^{q,inf}. Normalized so that a function equal
// to v on a set of mass W has norm v W^{1/q} in every variant.
double lorentz_norm(const std::vector<double>& values,
                    const std::vector<double>& weights, double q,
                    double variant);

// Linear convolution h^n sum_j f_j k(x_i - x_j) where the kernel samples are
// read as offsets from the origin node (k supported on [-L,L)^n, zero
// outside). FFT with zero-padding to 2m per axis, exact on the window.
GridFunction convolve(const GridFunction& f, const GridFunction& kernel);
// Brute-force reference.
GridFunction convolve_direct(const GridFunction& f, const GridFunction& kernel);

// Wide variant: kernel sampled on the full offset lattice d in [-m, m-1]^n
// (index d + m per axis in a (2m)^n row-major array), so no offset ever
// falls outside the data. Used when kernel tails matter.
std::vector<double> convolve_offsets(const GridFunction& f,
                                     const std::vector<double>& kernel_wide);

// Serialization. Binary layout: magic "CAPXGRD1", int32 n, int32 m,
// float64 L, then m^n float64 values row-major; all fields little-endian
// (native x86 byte order).
void write_grid_binary(const std::string& path, const GridFunction& f);
GridFunction read_grid_binary(const std::string& path);
// CSV: header line "n=<n>,L=<L>,m=<m>", one value per line, row-major.
void write_grid_csv(const std::string& path, const GridFunction& f);
GridFunction read_grid_csv(const std::string& path);

}  // namespace capax
