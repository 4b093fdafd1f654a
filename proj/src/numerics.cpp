#include "capax/numerics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace capax::num {

double pairwise_sum(const double* a, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

double pairwise_sum(const std::vector<double>& a) {
  return pairwise_sum(a.data(), a.size());
}

int thread_budget() {
  static int budget = [] {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    int t = std::min(hw > 0 ? hw : 1, 8);
    if (const char* env = std::getenv("CAPAX_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) t = v;
    }
    return t;
  }();
  return budget;
}

void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  int nt = thread_budget();
  // Chunk grid is fixed (64 chunks) so results never depend on thread count.
  std::size_t chunks = std::min<std::size_t>(64, n);
  std::size_t per = (n + chunks - 1) / chunks;
  if (nt <= 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c)
      fn(c * per, std::min(n, (c + 1) * per));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= chunks) break;
      fn(c * per, std::min(n, (c + 1) * per));
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < nt - 1; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  return r;
}

void tridiag_eig_first(std::vector<double>& d, std::vector<double> e,
                       std::vector<double>& z) {
  int n = static_cast<int>(d.size());
  if (n == 0) return;
  e.resize(n, 0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-15 * dd) break;
      }
      if (m != l) {
        if (iter++ == 60)
          throw std::runtime_error("tridiag_eig_first: no convergence");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double rr = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(rr, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          double b = c * e[i];
          rr = std::hypot(f, g);
          e[i + 1] = rr;
          if (rr == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / rr;
          c = g / rr;
          g = d[i + 1] - p;
          rr = (d[i] - g) * s + 2.0 * c * b;
          p = s * rr;
          d[i + 1] = g + p;
          g = c * rr - b;
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (rr == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
  std::vector<double> d2(n), z2(n);
  for (int i = 0; i < n; ++i) {
    d2[i] = d[idx[i]];
    z2[i] = z[idx[i]];
  }
  d.swap(d2);
  z.swap(z2);
}

GaussRule gauss_laguerre(int n, double a) {
  if (n < 1 || a <= -1.0)
    throw std::invalid_argument("gauss_laguerre: bad arguments");
  std::vector<double> d(n), e(n > 1 ? n - 1 : 0), z(n, 0.0);
  for (int k = 0; k < n; ++k) d[k] = 2.0 * k + a + 1.0;
  for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(k * (k + a));
  z[0] = 1.0;
  tridiag_eig_first(d, e, z);
  GaussRule r;
  r.x = d;
  r.w.resize(n);
  double mu0 = std::exp(std::lgamma(a + 1.0));
  for (int i = 0; i < n; ++i) r.w[i] = mu0 * z[i] * z[i];
  return r;
}

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

namespace {
std::map<std::pair<std::vector<int>, bool>, fftw_plan> plan_cache;
std::mutex plan_mutex;

fftw_plan get_plan(const std::vector<int>& dims, bool inverse) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_pair(dims, inverse);
  auto it = plan_cache.find(key);
  if (it != plan_cache.end()) return it->second;
  std::size_t total = 1;
  for (int m : dims) total *= static_cast<std::size_t>(m);
  fftw_complex* dummy =
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
  int sign = inverse ? FFTW_BACKWARD : FFTW_FORWARD;
  fftw_plan p;
  if (dims.size() == 1)
    p = fftw_plan_dft_1d(dims[0], dummy, dummy, sign, FFTW_ESTIMATE);
  else
    p = fftw_plan_dft_2d(dims[0], dims[1], dummy, dummy, sign, FFTW_ESTIMATE);
  fftw_free(dummy);
  plan_cache.emplace(key, p);
  return p;
}

// fftw_malloc-backed scratch so new-array execution sees the same alignment
// the plan was created with.
struct AlignedBuf {
  fftw_complex* p = nullptr;
  std::size_t cap = 0;
  ~AlignedBuf() {
    if (p) fftw_free(p);
  }
  fftw_complex* ensure(std::size_t n) {
    if (cap < n) {
      if (p) fftw_free(p);
      p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
      cap = n;
    }
    return p;
  }
};
}  // namespace

void fft(std::vector<std::complex<double>>& data, const std::vector<int>& dims,
         bool inverse) {
  if (dims.empty() || dims.size() > 2)
    throw std::invalid_argument("fft: dims must have 1 or 2 axes");
  std::size_t total = 1;
  for (int m : dims) total *= static_cast<std::size_t>(m);
  if (data.size() != total) throw std::invalid_argument("fft: size mismatch");
  fftw_plan plan = get_plan(dims, inverse);
  static thread_local AlignedBuf scratch;
  fftw_complex* buf = scratch.ensure(total);
  std::memcpy(buf, data.data(), sizeof(fftw_complex) * total);
  fftw_execute_dft(plan, buf, buf);
  std::memcpy(data.data(), buf, sizeof(fftw_complex) * total);
  if (inverse) {
    double scale = 1.0 / static_cast<double>(total);
    for (auto& c : data) c *= scale;
  }
}

}  // namespace capax::num
