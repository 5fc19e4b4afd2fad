#include "kernels_impl.hpp"

namespace fluxreg::kernels::scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpby(const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + b * y[i];
}

void stencil9(const Stencil9& s, const double* x, double* y, std::size_t begin, std::size_t end) {
  const std::ptrdiff_t st = s.stride;
  const std::ptrdiff_t off[9] = {-st - 1, -st, -st + 1, -1, 0, 1, st - 1, st, st + 1};
  for (std::size_t i = begin; i < end; ++i) {
    double acc = 0.0;
    for (int k = 0; k < 9; ++k) acc += s.coeff[k][i] * x[static_cast<std::ptrdiff_t>(i) + off[k]];
    y[i] = acc;
  }
}

void psi_reduced_batch(double theta, std::size_t n, std::size_t m, const double* lambda,
                       const double* eta, double* out) {
  for (std::size_t s = 0; s < m; ++s) {
    double first = 0.0, second = 0.0, norm2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double l = lambda[k * m + s];
      const double e = eta[k * m + s];
      first += l * e;
      second += l * l * e;
      norm2 += l * l;
    }
    out[s] = (theta * theta * first * first + 2.0 * theta * second) / norm2 + 1.0;
  }
}

}  // namespace fluxreg::kernels::scalar
