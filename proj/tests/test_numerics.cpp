#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "capax/numerics.hpp"

using namespace capax;

TEST_CASE("pairwise sum matches long-double reference") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(10007);
  long double ref = 0.0L;
  for (auto& x : a) {
    x = u(rng);
    ref += x;
  }
  CHECK(num::pairwise_sum(a) ==
        doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));
}

TEST_CASE("pairwise sum is deterministic and order-fixed") {
  std::vector<double> a(1000);
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = std::sin(0.1 * static_cast<double>(i)) * 1e-3;
  double s1 = num::pairwise_sum(a);
  double s2 = num::pairwise_sum(a);
  CHECK(s1 == s2);
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  auto rule = num::gauss_legendre(12);
  // degree up to 2*12-1
  for (int k = 0; k <= 23; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i)
      acc += rule.w[i] * std::pow(rule.x[i], k);
    double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
    CHECK(acc == doctest::Approx(exact).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("generalized gauss-laguerre moments match gamma values") {
  for (double a : {-0.5, -0.25, 0.0, 0.25}) {
    auto rule = num::gauss_laguerre(40, a);
    for (int k = 0; k <= 6; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < rule.x.size(); ++i)
        acc += rule.w[i] * std::pow(rule.x[i], k);
      double exact = std::exp(std::lgamma(a + 1.0 + k));
      CHECK(acc == doctest::Approx(exact).epsilon(1e-11));
    }
  }
}

TEST_CASE("tridiagonal eigensolver on a known 2x2") {
  std::vector<double> d{2.0, 2.0}, e{1.0}, z{1.0, 0.0};
  num::tridiag_eig_first(d, e, z);
  CHECK(d[0] == doctest::Approx(1.0));
  CHECK(d[1] == doctest::Approx(3.0));
  CHECK(z[0] * z[0] == doctest::Approx(0.5));
  CHECK(z[1] * z[1] == doctest::Approx(0.5));
}

TEST_CASE("fft roundtrip and impulse spectrum") {
  std::vector<std::complex<double>> a(64);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& c : a) c = {u(rng), u(rng)};
  auto b = a;
  num::fft(b, {64}, false);
  num::fft(b, {64}, true);
  for (int i = 0; i < 64; ++i) {
    CHECK(b[i].real() == doctest::Approx(a[i].real()).epsilon(1e-12));
    CHECK(b[i].imag() == doctest::Approx(a[i].imag()).epsilon(1e-12));
  }
  std::vector<std::complex<double>> d(32, 0.0);
  d[0] = 1.0;
  num::fft(d, {32}, false);
  for (auto& c : d) CHECK(c.real() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("fft 2d matches separable transform on a product input") {
  int m = 8;
  std::vector<std::complex<double>> a(m * m);
  std::vector<std::complex<double>> row(m), col(m);
  for (int i = 0; i < m; ++i) {
    row[i] = std::complex<double>(std::cos(0.3 * i), 0.1 * i);
    col[i] = std::complex<double>(std::sin(0.2 * i) + 0.5, 0.0);
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a[i * m + j] = col[i] * row[j];
  auto a2 = a;
  num::fft(a2, {m, m}, false);
  num::fft(row, {m}, false);
  num::fft(col, {m}, false);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      auto want = col[i] * row[j];
      CHECK(std::abs(a2[i * m + j] - want) < 1e-11);
    }
}

TEST_CASE("parallel_chunks covers the range once") {
  std::vector<int> hits(1000, 0);
  num::parallel_chunks(hits.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) hits[i]++;
  });
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("softplus limits") {
  CHECK(num::softplus(0.0) == doctest::Approx(std::log(2.0)));
  CHECK(num::softplus(50.0) == doctest::Approx(50.0));
  CHECK(num::softplus(-50.0) == doctest::Approx(0.0).scale(1.0));
}
