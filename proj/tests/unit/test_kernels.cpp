#include <doctest.h>

#include <cmath>
#include <vector>

#include "fluxreg/kernels.hpp"
#include "fluxreg/rng.hpp"

using namespace fluxreg;
using namespace fluxreg::kernels;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("ISA selection") {
  CHECK(cpu_supports(Isa::Scalar));
  CHECK(to_string(Isa::Scalar) == "scalar");
  const Isa before = active_isa();
  force_isa(Isa::Scalar);
  CHECK(active_isa() == Isa::Scalar);
  force_isa(before);
}

TEST_CASE("SIMD kernels match the scalar reference") {
  if (!cpu_supports(Isa::Avx2)) {
    MESSAGE("AVX2 not available, equivalence skipped");
    return;
  }
  const auto& s = table(Isa::Scalar);
  const auto& v = table(Isa::Avx2);
  Rng rng(1);
  for (std::size_t n : {0, 1, 3, 4, 5, 7, 8, 15, 16, 17, 63, 1000, 4099}) {
    const auto x = random_vector(rng, n), y = random_vector(rng, n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) scale += std::abs(x[i] * y[i]);
    CHECK(std::abs(s.dot(x.data(), y.data(), n) - v.dot(x.data(), y.data(), n)) <= 1e-14 * (1 + scale));

    auto ys = y, yv = y;
    s.axpy(0.37, x.data(), ys.data(), n);
    v.axpy(0.37, x.data(), yv.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(ys[i] == doctest::Approx(yv[i]).epsilon(1e-15));

    ys = y;
    yv = y;
    s.xpby(x.data(), -1.3, ys.data(), n);
    v.xpby(x.data(), -1.3, yv.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(ys[i] == doctest::Approx(yv[i]).epsilon(1e-15));
  }
}

TEST_CASE("SIMD stencil matches the scalar reference") {
  if (!cpu_supports(Isa::Avx2)) return;
  Rng rng(2);
  for (std::ptrdiff_t nx : {5, 8, 13, 37}) {
    const std::size_t size = static_cast<std::size_t>(nx) * 11;
    std::array<std::vector<double>, 9> coeff;
    Stencil9 st;
    st.stride = nx;
    for (int k = 0; k < 9; ++k) {
      coeff[k] = random_vector(rng, size);
      st.coeff[k] = coeff[k].data();
    }
    const auto x = random_vector(rng, size);
    std::vector<double> ys(size, 0.0), yv(size, 0.0);
    const std::size_t begin = nx + 1, end = size - nx - 1;
    table(Isa::Scalar).stencil9(st, x.data(), ys.data(), begin, end);
    table(Isa::Avx2).stencil9(st, x.data(), yv.data(), begin, end);
    for (std::size_t i = 0; i < size; ++i) CHECK(ys[i] == doctest::Approx(yv[i]).epsilon(1e-14));
  }
}

TEST_CASE("SIMD reduced psi batch matches the scalar reference") {
  if (!cpu_supports(Isa::Avx2)) return;
  Rng rng(3);
  for (std::size_t n : {2, 3, 6})
    for (std::size_t m : {1, 4, 9, 257}) {
      std::vector<double> lambda(n * m), eta(n * m);
      for (std::size_t s = 0; s < m; ++s) {
        std::vector<double> col(n);
        rng.simplex_point(col);
        for (std::size_t k = 0; k < n; ++k) {
          lambda[k * m + s] = rng.normal();
          eta[k * m + s] = col[k];
        }
      }
      std::vector<double> os(m), ov(m);
      for (double theta : {-1.0, -0.3, 2.0}) {
        table(Isa::Scalar).psi_reduced_batch(theta, n, m, lambda.data(), eta.data(), os.data());
        table(Isa::Avx2).psi_reduced_batch(theta, n, m, lambda.data(), eta.data(), ov.data());
        for (std::size_t s = 0; s < m; ++s) CHECK(std::abs(os[s] - ov[s]) <= 1e-13 * (1 + std::abs(os[s])));
      }
    }
}
