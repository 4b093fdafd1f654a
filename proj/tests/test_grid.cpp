#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "capax/grid.hpp"
#include "capax/kernel.hpp"
#include "capax/sets.hpp"

using namespace capax;
constexpr double kInf = std::numeric_limits<double>::infinity();

TEST_CASE("grid spec validation") {
  CHECK_NOTHROW(validate(GridSpec{1, 4.0, 64}));
  CHECK_THROWS(validate(GridSpec{3, 4.0, 64}));
  CHECK_THROWS(validate(GridSpec{1, 4.0, 6}));
  CHECK_THROWS(validate(GridSpec{1, 4.0, 63}));
  CHECK_THROWS(validate(GridSpec{2, 4.0, 2048}));  // over the node budget
  CHECK_THROWS(validate(GridSpec{1, -1.0, 64}));
}

TEST_CASE("lp norm exact values") {
  // indicator of [-1,1) by node membership: nodes -1,-0.875,...,0.875 are
  // exactly 16 cells of width 0.125, so the midpoint mass is exactly 2
  GridSpec s{1, 4.0, 64};
  auto f = make_grid_function(s, [](const double* x) {
    return (x[0] >= -1.0 && x[0] < 1.0) ? 1.0 : 0.0;
  });
  CHECK(lp_norm(f, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  GridFunction zero{s, std::vector<double>(s.size(), 0.0)};
  CHECK(lp_norm(zero, 2.0) == 0.0);
  // indicator of half the nodes, p=2 -> sqrt(0.5 * 2L)
  GridFunction half{s, std::vector<double>(s.size(), 0.0)};
  for (int i = 0; i < s.m / 2; ++i) half.v[i] = 1.0;
  CHECK(lp_norm(half, 2.0) == doctest::Approx(std::sqrt(4.0)).epsilon(1e-12));
  CHECK(lp_norm(half, kInf) == 1.0);
  CHECK_THROWS(lp_norm(half, 0.5));
}

TEST_CASE("lp norm converges at order >= 2") {
  // exp(-|x|) has a kink at the origin, so the quadrature error is visible
  // (a Gaussian would converge spectrally and the order would be 0/0).
  auto f = [](const double* x) { return std::exp(-std::abs(x[0])); };
  double exact = 1.0;  // L2 norm: integral of exp(-2|x|) is 1
  double e1 =
      std::abs(lp_norm(make_grid_function({1, 16.0, 64}, f), 2.0) - exact);
  double e2 =
      std::abs(lp_norm(make_grid_function({1, 16.0, 128}, f), 2.0) - exact);
  double order = std::log2(e1 / e2);
  CHECK(order >= 1.8);
}

TEST_CASE("lorentz norms: exact level-set evaluation") {
  // single atom
  CHECK(lorentz_norm({3.0}, {2.0}, 2.0, kInf) ==
        doctest::Approx(3.0 * std::sqrt(2.0)));
  // all values equal: v * W^{1/q} in every variant
  CHECK(lorentz_norm({2, 2, 2}, {1, 1, 2}, 3.0, kInf) ==
        doctest::Approx(2.0 * std::pow(4.0, 1.0 / 3)));
  CHECK(lorentz_norm({2, 2, 2}, {1, 1, 2}, 3.0, 1.5) ==
        doctest::Approx(2.0 * std::pow(4.0, 1.0 / 3)));
  // two atoms, L^{q,inf}: max(v1 w1^{1/q}, v2 (w1+w2)^{1/q})
  double got = lorentz_norm({5.0, 1.0}, {0.1, 10.0}, 2.0, kInf);
  double want = std::max(5.0 * std::sqrt(0.1), 1.0 * std::sqrt(10.1));
  CHECK(got == doctest::Approx(want));
  // L^{q,q} is the plain L^q(mu) norm
  double lqq = lorentz_norm({1.0, 2.0, 0.5}, {1.0, 0.5, 2.0}, 2.0, 2.0);
  double l2 = std::sqrt(1.0 + 4.0 * 0.5 + 0.25 * 2.0);
  CHECK(lqq == doctest::Approx(l2).epsilon(1e-12));
  CHECK_THROWS(lorentz_norm({1.0}, {-1.0}, 2.0, kInf));
}

TEST_CASE("lorentz matches brute-force sort-and-scan on random atoms") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uv(0.0, 5.0), uw(0.0, 2.0);
  std::vector<double> v(500), w(500);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = uv(rng);
    w[i] = uw(rng);
  }
  // brute force L^{q,inf}: enumerate all level sets
  double q = 1.7, best = 0.0;
  for (double s : v) {
    double mass = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] >= s) mass += w[i];
    best = std::max(best, s * std::pow(mass, 1.0 / q));
  }
  CHECK(lorentz_norm(v, w, q, kInf) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("convolution identity on an impulse") {
  GridSpec s{1, 4.0, 64};
  KernelParams prm{1, 1.0};
  auto kern = make_grid_function(
      s, [&](const double* x) { return poisson_kernel(prm, x, 0.8); });
  GridFunction f{s, std::vector<double>(s.size(), 0.0)};
  double hn = s.h();
  f.v[s.m / 2] = 1.0 / hn;  // unit-mass impulse at the origin
  auto out = convolve(f, kern);
  for (int i = 0; i < s.m; ++i)
    CHECK(out.v[i] == doctest::Approx(kern.v[i]).epsilon(1e-10));
}

TEST_CASE("gaussian convolved with gaussian is gaussian") {
  GridSpec s{1, 12.0, 256};
  double s1 = 0.5, s2 = 0.8;  // variances
  auto g1 = make_grid_function(s, [&](const double* x) {
    return std::exp(-x[0] * x[0] / (2 * s1)) / std::sqrt(2 * M_PI * s1);
  });
  auto g2 = make_grid_function(s, [&](const double* x) {
    return std::exp(-x[0] * x[0] / (2 * s2)) / std::sqrt(2 * M_PI * s2);
  });
  auto out = convolve(g1, g2);
  double sv = s1 + s2;
  for (int i = 0; i < s.m; ++i) {
    double x = s.coord(i);
    double want = std::exp(-x * x / (2 * sv)) / std::sqrt(2 * M_PI * sv);
    CHECK(out.v[i] == doctest::Approx(want).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("fft convolution agrees with direct summation") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GridSpec s{1, 2.0, 16};
  GridFunction f{s, std::vector<double>(s.size())};
  GridFunction k{s, std::vector<double>(s.size())};
  for (auto& x : f.v) x = u(rng);
  for (auto& x : k.v) x = u(rng);
  auto fast = convolve(f, k);
  auto slow = convolve_direct(f, k);
  for (std::size_t i = 0; i < fast.v.size(); ++i)
    CHECK(fast.v[i] == doctest::Approx(slow.v[i]).epsilon(1e-10).scale(1.0));

  GridSpec s2{2, 2.0, 12};
  CHECK_THROWS(convolve(f, GridFunction{s2, {}}));
}

TEST_CASE("fft convolution agrees with direct summation in 2d") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GridSpec s{2, 2.0, 12};
  GridFunction f{s, std::vector<double>(s.size())};
  GridFunction k{s, std::vector<double>(s.size())};
  for (auto& x : f.v) x = u(rng);
  for (auto& x : k.v) x = u(rng);
  auto fast = convolve(f, k);
  auto slow = convolve_direct(f, k);
  for (std::size_t i = 0; i < fast.v.size(); ++i)
    CHECK(fast.v[i] == doctest::Approx(slow.v[i]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("convolution translation equivariance") {
  GridSpec s{1, 4.0, 64};
  KernelParams prm{1, 1.5};
  auto kern = make_grid_function(
      s, [&](const double* x) { return poisson_kernel(prm, x, 0.5); });
  // bump well inside the core so shifting by one cell stays periodic-safe
  auto f = make_grid_function(s, [&](const double* x) {
    return std::exp(-8.0 * x[0] * x[0]);
  });
  GridFunction fs{s, std::vector<double>(s.size(), 0.0)};
  for (int i = 1; i < s.m; ++i) fs.v[i] = f.v[i - 1];
  auto a = convolve(f, kern);
  auto b = convolve(fs, kern);
  for (int i = 8; i < s.m; ++i)
    CHECK(std::abs(b.v[i] - a.v[i - 1]) <= 1e-10);
}

TEST_CASE("wide offset convolution matches direct full-kernel sum") {
  GridSpec s{1, 2.0, 16};
  KernelParams prm{1, 0.5};
  double t = 0.7;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridFunction f{s, std::vector<double>(s.size())};
  for (auto& x : f.v) x = u(rng);
  int m = s.m;
  std::vector<double> wide(2 * m);
  for (int d = -m; d < m; ++d) {
    double xd = d * s.h();
    wide[d + m] = poisson_kernel(prm, &xd, t);
  }
  auto got = convolve_offsets(f, wide);
  for (int i = 0; i < m; ++i) {
    double want = 0.0;
    for (int j = 0; j < m; ++j) {
      double xd = (i - j) * s.h();
      want += f.v[j] * poisson_kernel(prm, &xd, t) * s.h();
    }
    CHECK(got[i] == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("ladder is geometric and spans the default window") {
  GridSpec s{1, 4.0, 64};
  auto lad = default_ladder(s);
  CHECK(lad.k == 64);
  CHECK(lad.t_min == doctest::Approx(s.h() / 2));
  CHECK(lad.t_max == doctest::Approx(16.0));
  auto ts = lad.slices();
  double rho = lad.rho();
  for (int j = 1; j < lad.k; ++j)
    CHECK(ts[j] / ts[j - 1] == doctest::Approx(rho).epsilon(1e-9));
  CHECK_THROWS(validate(TLadder{1.0, 0.5, 8}));
}

TEST_CASE("grid serialization roundtrips") {
  GridSpec s{1, 4.0, 64};
  auto f = make_grid_function(s, [](const double* x) {
    return std::sin(x[0]) + 0.25 * x[0];
  });
  write_grid_binary("roundtrip.bin", f);
  auto g = read_grid_binary("roundtrip.bin");
  CHECK(g.spec == s);
  for (std::size_t i = 0; i < f.v.size(); ++i) CHECK(g.v[i] == f.v[i]);
  write_grid_csv("roundtrip.csv", f);
  auto h = read_grid_csv("roundtrip.csv");
  CHECK(h.spec == s);
  for (std::size_t i = 0; i < f.v.size(); ++i)
    CHECK(h.v[i] == doctest::Approx(f.v[i]).epsilon(1e-15));
  std::remove("roundtrip.bin");
  std::remove("roundtrip.csv");
}
