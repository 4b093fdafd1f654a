#include "capax/grid.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "capax/numerics.hpp"

namespace capax {

void validate(const GridSpec& spec, std::size_t node_budget) {
  if (spec.n != 1 && spec.n != 2)
    throw std::invalid_argument("GridSpec: n must be 1 or 2");
  if (!(spec.L > 0.0)) throw std::invalid_argument("GridSpec: L <= 0");
  if (spec.m < 8 || spec.m % 2 != 0)
    throw std::invalid_argument("GridSpec: m must be even and >= 8");
  if (spec.size() > node_budget)
    throw std::invalid_argument("GridSpec: node budget exceeded");
}

GridFunction make_grid_function(
    const GridSpec& spec, const std::function<double(const double*)>& fn) {
  validate(spec);
  GridFunction f{spec, std::vector<double>(spec.size())};
  for (std::size_t idx = 0; idx < f.v.size(); ++idx) {
    auto p = spec.point(idx);
    f.v[idx] = fn(p.data());
  }
  return f;
}

double TLadder::rho() const {
  return std::pow(t_max / t_min, 1.0 / (k - 1));
}

double TLadder::slice(int j) const { return t_min * std::pow(rho(), j); }

std::vector<double> TLadder::slices() const {
  std::vector<double> s(k);
  for (int j = 0; j < k; ++j) s[j] = slice(j);
  s[k - 1] = t_max;  // pin the endpoint against rounding
  return s;
}

void validate(const TLadder& ladder) {
  if (!(ladder.t_min > 0.0) || !(ladder.t_max > ladder.t_min) || ladder.k < 2)
    throw std::invalid_argument("TLadder: need 0 < t_min < t_max, k >= 2");
}

TLadder default_ladder(const GridSpec& spec, int k) {
  return TLadder{spec.h() / 2.0, 4.0 * spec.L, k};
}

double lp_norm(const GridFunction& f, double p) {
  if (p == std::numeric_limits<double>::infinity()) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
  }
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p < 1");
  double hn = std::pow(f.spec.h(), f.spec.n);
  std::vector<double> terms(f.v.size());
  for (std::size_t i = 0; i < f.v.size(); ++i)
    terms[i] = std::pow(std::abs(f.v[i]), p) * hn;
  return std::pow(num::pairwise_sum(terms), 1.0 / p);
}

double lorentz_norm(const std::vector<double>& values,
                    const std::vector<double>& weights, double q,
                    double variant) {
  if (values.size() != weights.size())
    throw std::invalid_argument("lorentz_norm: size mismatch");
  if (!(q > 0.0)) throw std::invalid_argument("lorentz_norm: q <= 0");
  for (double w : weights)
    if (w < 0.0) throw std::invalid_argument("lorentz_norm: negative weight");
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(values[a]) > std::abs(values[b]);
  });
  bool sup = variant == std::numeric_limits<double>::infinity();
  double W = 0.0, acc = 0.0, Wprev_pow = 0.0, best = 0.0;
  for (std::size_t r : idx) {
    double v = std::abs(values[r]);
    W += weights[r];
    if (v == 0.0) break;
    if (sup) {
      best = std::max(best, v * std::pow(W, 1.0 / q));
    } else {
      double Wpow = std::pow(W, variant / q);
      acc += std::pow(v, variant) * (Wpow - Wprev_pow);
      Wprev_pow = Wpow;
    }
  }
  return sup ? best : std::pow(acc, 1.0 / variant);
}

namespace {
using cvec = std::vector<std::complex<double>>;

// Kernel samples at node k give the offset d = k - m/2 per axis; scatter
// into a (2m)^n circular array at index d mod 2m.
cvec circular_kernel(const GridFunction& kernel) {
  const GridSpec& s = kernel.spec;
  int m = s.m, M = 2 * m;
  if (s.n == 1) {
    cvec C(M);
    for (int k = 0; k < m; ++k) {
      int d = k - m / 2;
      C[(d + M) % M] = kernel.v[k];
    }
    return C;
  }
  cvec C(static_cast<std::size_t>(M) * M);
  for (int k0 = 0; k0 < m; ++k0)
    for (int k1 = 0; k1 < m; ++k1) {
      int d0 = (k0 - m / 2 + M) % M;
      int d1 = (k1 - m / 2 + M) % M;
      C[static_cast<std::size_t>(d0) * M + d1] = kernel.v[s.flat(k0, k1)];
    }
  return C;
}

GridFunction convolve_spectra(const GridFunction& f, cvec C,
                              const std::vector<int>& dims) {
  const GridSpec& s = f.spec;
  int m = s.m, M = dims[0];
  cvec F(C.size());
  if (s.n == 1) {
    for (int j = 0; j < m; ++j) F[j] = f.v[j];
  } else {
    for (int j0 = 0; j0 < m; ++j0)
      for (int j1 = 0; j1 < m; ++j1)
        F[static_cast<std::size_t>(j0) * M + j1] = f.v[s.flat(j0, j1)];
  }
  num::fft(F, dims, false);
  num::fft(C, dims, false);
  for (std::size_t i = 0; i < F.size(); ++i) F[i] *= C[i];
  num::fft(F, dims, true);
  double hn = std::pow(s.h(), s.n);
  GridFunction out{s, std::vector<double>(s.size())};
  if (s.n == 1) {
    for (int i = 0; i < m; ++i) out.v[i] = F[i].real() * hn;
  } else {
    for (int i0 = 0; i0 < m; ++i0)
      for (int i1 = 0; i1 < m; ++i1)
        out.v[s.flat(i0, i1)] =
            F[static_cast<std::size_t>(i0) * M + i1].real() * hn;
  }
  return out;
}
}  // namespace

GridFunction convolve(const GridFunction& f, const GridFunction& kernel) {
  if (!(f.spec == kernel.spec))
    throw std::invalid_argument("convolve: spec mismatch");
  const GridSpec& s = f.spec;
  std::vector<int> dims = s.n == 1 ? std::vector<int>{2 * s.m}
                                   : std::vector<int>{2 * s.m, 2 * s.m};
  return convolve_spectra(f, circular_kernel(kernel), dims);
}

GridFunction convolve_direct(const GridFunction& f,
                             const GridFunction& kernel) {
  if (!(f.spec == kernel.spec))
    throw std::invalid_argument("convolve_direct: spec mismatch");
  const GridSpec& s = f.spec;
  int m = s.m;
  double hn = std::pow(s.h(), s.n);
  GridFunction out{s, std::vector<double>(s.size(), 0.0)};
  if (s.n == 1) {
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j) {
        int d = i - j + m / 2;
        if (d >= 0 && d < m) acc += f.v[j] * kernel.v[d];
      }
      out.v[i] = acc * hn;
    }
    return out;
  }
  for (int i0 = 0; i0 < m; ++i0)
    for (int i1 = 0; i1 < m; ++i1) {
      double acc = 0.0;
      for (int j0 = 0; j0 < m; ++j0)
        for (int j1 = 0; j1 < m; ++j1) {
          int d0 = i0 - j0 + m / 2, d1 = i1 - j1 + m / 2;
          if (d0 >= 0 && d0 < m && d1 >= 0 && d1 < m)
            acc += f.v[s.flat(j0, j1)] * kernel.v[s.flat(d0, d1)];
        }
      out.v[s.flat(i0, i1)] = acc * hn;
    }
  return out;
}

std::vector<double> convolve_offsets(const GridFunction& f,
                                     const std::vector<double>& kernel_wide) {
  const GridSpec& s = f.spec;
  int m = s.m, M = 2 * m;
  std::size_t wide = s.n == 1 ? static_cast<std::size_t>(M)
                              : static_cast<std::size_t>(M) * M;
  if (kernel_wide.size() != wide)
    throw std::invalid_argument("convolve_offsets: kernel size mismatch");
  // Offset index d (in [-m, m-1]) is stored at d + m; circularly that is the
  // array rotated by m, i.e. C[(d mod 2m)] = wide[d + m].
  cvec C(wide);
  if (s.n == 1) {
    for (int d = -m; d < m; ++d) C[(d + M) % M] = kernel_wide[d + m];
  } else {
    for (int d0 = -m; d0 < m; ++d0)
      for (int d1 = -m; d1 < m; ++d1)
        C[static_cast<std::size_t>((d0 + M) % M) * M + ((d1 + M) % M)] =
            kernel_wide[static_cast<std::size_t>(d0 + m) * M + (d1 + m)];
  }
  std::vector<int> dims =
      s.n == 1 ? std::vector<int>{M} : std::vector<int>{M, M};
  GridFunction out = convolve_spectra(f, std::move(C), dims);
  return out.v;
}

namespace {
constexpr char kMagic[8] = {'C', 'A', 'P', 'X', 'G', 'R', 'D', '1'};
}

void write_grid_binary(const std::string& path, const GridFunction& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_grid_binary: cannot open " + path);
  os.write(kMagic, 8);
  std::int32_t n = f.spec.n, m = f.spec.m;
  double L = f.spec.L;
  os.write(reinterpret_cast<const char*>(&n), 4);
  os.write(reinterpret_cast<const char*>(&m), 4);
  os.write(reinterpret_cast<const char*>(&L), 8);
  os.write(reinterpret_cast<const char*>(f.v.data()),
           static_cast<std::streamsize>(f.v.size() * 8));
}

GridFunction read_grid_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_grid_binary: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("read_grid_binary: bad magic");
  std::int32_t n = 0, m = 0;
  double L = 0;
  is.read(reinterpret_cast<char*>(&n), 4);
  is.read(reinterpret_cast<char*>(&m), 4);
  is.read(reinterpret_cast<char*>(&L), 8);
  GridSpec spec{n, L, m};
  validate(spec);
  GridFunction f{spec, std::vector<double>(spec.size())};
  is.read(reinterpret_cast<char*>(f.v.data()),
          static_cast<std::streamsize>(f.v.size() * 8));
  if (!is) throw std::runtime_error("read_grid_binary: truncated file");
  return f;
}

void write_grid_csv(const std::string& path, const GridFunction& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_grid_csv: cannot open " + path);
  os.precision(17);
  os << "n=" << f.spec.n << ",L=" << f.spec.L << ",m=" << f.spec.m << "\n";
  for (double x : f.v) os << x << "\n";
}

GridFunction read_grid_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_grid_csv: cannot open " + path);
  std::string header;
  std::getline(is, header);
  GridSpec spec;
  if (std::sscanf(header.c_str(), "n=%d,L=%lf,m=%d", &spec.n, &spec.L,
                  &spec.m) != 3)
    throw std::runtime_error("read_grid_csv: bad header");
  validate(spec);
  GridFunction f{spec, {}};
  f.v.reserve(spec.size());
  double x;
  while (is >> x) f.v.push_back(x);
  if (f.v.size() != spec.size())
    throw std::runtime_error("read_grid_csv: value count mismatch");
  return f;
}

}  // namespace capax
