#include "capax/kernel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace capax {

void validate(const KernelParams& params) {
  if (params.n < 1) throw std::invalid_argument("KernelParams: n < 1");
  if (!(params.alpha > 0.0 && params.alpha < 2.0))
    throw std::invalid_argument("KernelParams: alpha outside (0,2)");
}

double normalization_constant(const KernelParams& params) {
  validate(params);
  double n = params.n, a = params.alpha;
  double lg = std::lgamma((n + a) / 2.0) - 0.5 * n * std::log(M_PI) -
              std::lgamma(a / 2.0);
  return std::exp(lg);
}

double poisson_kernel_radial(const KernelParams& params, double absx,
                             double t) {
  validate(params);
  if (!(t > 0.0)) throw std::invalid_argument("poisson_kernel: t <= 0");
  double c = normalization_constant(params);
  double q = absx * absx + t * t;
  double expo = -(params.n + params.alpha) / 2.0;
  return c * std::pow(t, params.alpha) * std::pow(q, expo);
}

double poisson_kernel(const KernelParams& params, const double* x, double t) {
  double r2 = 0.0;
  for (int i = 0; i < params.n; ++i) r2 += x[i] * x[i];
  return poisson_kernel_radial(params, std::sqrt(r2), t);
}

double trace_constant(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::invalid_argument("trace_constant: alpha outside (0,2)");
  double lg = std::lgamma(alpha / 2.0) - (1.0 - alpha) * std::log(2.0) -
              std::lgamma(1.0 - alpha / 2.0);
  return std::exp(lg);
}

double pv_constant(int n, double s) {
  if (!(s > 0.0 && s < 2.0))
    throw std::invalid_argument("pv_constant: s outside (0,2)");
  double lg = std::log(s) + s * std::log(2.0) + std::lgamma((n + s) / 2.0) -
              std::log(2.0) - std::lgamma(1.0 - s / 2.0) -
              0.5 * n * std::log(M_PI);
  return std::exp(lg);
}

double riesz_kernel(int n, double beta, const double* x, const double* y) {
  if (!(beta > 0.0 && beta < n))
    throw std::invalid_argument("riesz_kernel: beta outside (0,n)");
  double r2 = 0.0;
  for (int i = 0; i < n; ++i) r2 += (x[i] - y[i]) * (x[i] - y[i]);
  if (r2 == 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(r2, 0.5 * (beta - n));
}

double kernel_tail_mass(const KernelParams& params, double t, double L) {
  validate(params);
  if (!(t > 0.0 && L > 0.0))
    throw std::invalid_argument("kernel_tail_mass: t,L must be positive");
  double c = normalization_constant(params);
  double a = params.alpha;
  if (params.n == 2) {
    // Exact mass outside the disk of radius L: the radial integrand
    // r (r^2+t^2)^{-(2+a)/2} has the primitive -(r^2+t^2)^{-a/2}/a.
    return 2.0 * M_PI * c * std::pow(t, a) * std::pow(L * L + t * t, -0.5 * a) / a;
  }
  // n == 1: two-term asymptotic of the exact tail
  // 2 c t^a int_L (x^2+t^2)^{-(1+a)/2} dx; good to O(L^{-4-a}).
  double lead = std::pow(L, -a) / a;
  double corr = 0.5 * (1.0 + a) * t * t * std::pow(L, -2.0 - a) / (2.0 + a);
  return 2.0 * c * std::pow(t, a) * (lead - corr);
}

}  // namespace capax
