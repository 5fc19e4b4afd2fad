// Compiled with -mavx2 -mfma; only reached when the CPU reports both.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace fluxreg::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += x[i] * y[i];
  return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void xpby(const double* x, double b, double* y, std::size_t n) {
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = x[i] + b * y[i];
}

void stencil9(const Stencil9& s, const double* x, double* y, std::size_t begin, std::size_t end) {
  const std::ptrdiff_t st = s.stride;
  const std::ptrdiff_t off[9] = {-st - 1, -st, -st + 1, -1, 0, 1, st - 1, st, st + 1};
  std::size_t i = begin;
  for (; i + 4 <= end; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (int k = 0; k < 9; ++k) {
      const __m256d c = _mm256_loadu_pd(s.coeff[k] + i);
      const __m256d v = _mm256_loadu_pd(x + static_cast<std::ptrdiff_t>(i) + off[k]);
      acc = _mm256_fmadd_pd(c, v, acc);
    }
    _mm256_storeu_pd(y + i, acc);
  }
  for (; i < end; ++i) {
    double acc = 0.0;
    for (int k = 0; k < 9; ++k) acc += s.coeff[k][i] * x[static_cast<std::ptrdiff_t>(i) + off[k]];
    y[i] = acc;
  }
}

void psi_reduced_batch(double theta, std::size_t n, std::size_t m, const double* lambda,
                       const double* eta, double* out) {
  const __m256d vt2 = _mm256_set1_pd(theta * theta);
  const __m256d v2t = _mm256_set1_pd(2.0 * theta);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t s = 0;
  for (; s + 4 <= m; s += 4) {
    __m256d first = _mm256_setzero_pd();
    __m256d second = _mm256_setzero_pd();
    __m256d norm2 = _mm256_setzero_pd();
    for (std::size_t k = 0; k < n; ++k) {
      const __m256d l = _mm256_loadu_pd(lambda + k * m + s);
      const __m256d e = _mm256_loadu_pd(eta + k * m + s);
      const __m256d ll = _mm256_mul_pd(l, l);
      first = _mm256_fmadd_pd(l, e, first);
      second = _mm256_fmadd_pd(ll, e, second);
      norm2 = _mm256_add_pd(norm2, ll);
    }
    const __m256d num =
        _mm256_fmadd_pd(_mm256_mul_pd(vt2, first), first, _mm256_mul_pd(v2t, second));
    _mm256_storeu_pd(out + s, _mm256_add_pd(_mm256_div_pd(num, norm2), one));
  }
  if (s < m) {
    // Tail: scalar on the remaining columns, same component-major layout.
    for (; s < m; ++s) {
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
}

}  // namespace fluxreg::kernels::avx2
