#pragma once
// Low-level numerics: deterministic reductions, Gauss quadrature rules,
// a symmetric tridiagonal eigensolver (Golub-Welsch), and FFT wrappers.
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace capax::num {

// Fixed-shape pairwise (tree) summation; result is independent of thread
// count and reproducible across runs.
double pairwise_sum(const double* a, std::size_t n);
double pairwise_sum(const std::vector<double>& a);

// Thread budget from CAPAX_THREADS (default: min(hardware, 8), at least 1).
int thread_budget();

// Runs fn(chunk_begin, chunk_end) over [0,n) split into fixed-size chunks
// whose boundaries do not depend on the thread count. Chunk results must be
// written to per-chunk slots by the caller to stay deterministic.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t)>& fn);

struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Gauss-Legendre on [-1,1].
GaussRule gauss_legendre(int n);
// Generalized Gauss-Laguerre: integrates g against x^a e^{-x} on (0,inf).
GaussRule gauss_laguerre(int n, double a);

// Eigenvalues (ascending, into d) and first eigenvector components (into z,
// which must start as the unit vector e_0) of the symmetric tridiagonal
// matrix with diagonal d and off-diagonal e. QL with implicit shifts.
void tridiag_eig_first(std::vector<double>& d, std::vector<double> e,
                       std::vector<double>& z);

// log(1+e^x) without overflow.
double softplus(double x);

// In-place complex DFT over a 1- or 2-axis row-major array (dims = {m} or
// {m0,m1}). Forward has no normalization; inverse divides by the total size.
// Backed by FFTW with cached FFTW_ESTIMATE plans (deterministic).
void fft(std::vector<std::complex<double>>& data, const std::vector<int>& dims,
         bool inverse);

}  // namespace capax::num
