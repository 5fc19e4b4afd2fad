#include <doctest.h>

#include <cmath>
#include <vector>

#include "fluxreg/error.hpp"
#include "fluxreg/rng.hpp"
#include "fluxreg/simplex_forms.hpp"

using namespace fluxreg;

namespace {

// S_k by summing over all k-subsets.
double subset_oracle(const std::vector<double>& eta, int k) {
  const int n = static_cast<int>(eta.size());
  double sum = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    double prod = 1.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) prod *= eta[i];
    sum += prod;
  }
  return sum;
}

// Determinant by Gaussian elimination on a copy, no pivoting beyond row swaps.
double det_oracle(std::vector<std::vector<double>> m) {
  const std::size_t n = m.size();
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    if (m[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return det;
}

std::vector<double> random_simplex(Rng& rng, int n) {
  std::vector<double> eta(n + 1);
  rng.simplex_point(eta);
  eta.pop_back();
  return eta;
}

}  // namespace

TEST_CASE("form matrix") {
  const auto I = form_matrix(std::vector<double>{0.0, 0.0});
  CHECK(I.isIdentity());
  const auto D = form_matrix(std::vector<double>{1.0, 0.0});
  CHECK(D(0, 0) == 0.0);
  CHECK(D(1, 1) == 1.0);
  CHECK(D(0, 1) == 0.0);
  const auto Q = form_matrix(std::vector<double>{0.5, 0.5});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(Q(i, j) == 0.25);
}

TEST_CASE("elementary symmetric functions") {
  CHECK(elementary_symmetric(std::vector<double>{1, 1, 1}, 2) == 3.0);
  CHECK(elementary_symmetric(std::vector<double>{1, 2, 3}, 3) == 6.0);
  CHECK(elementary_symmetric(std::vector<double>{1, 2, 3}, 0) == 1.0);
  Rng rng(1);
  for (int n = 2; n <= 8; ++n)
    for (int rep = 0; rep < 20; ++rep) {
      const auto eta = random_simplex(rng, n);
      const auto all = elementary_symmetric_all(eta);
      for (int k = 0; k <= n; ++k) {
        CHECK(all[k] == doctest::Approx(subset_oracle(eta, k)).epsilon(1e-12));
        CHECK(elementary_symmetric(eta, k) == doctest::Approx(all[k]).epsilon(1e-14));
      }
    }
}

TEST_CASE("phi special points") {
  for (int n = 2; n <= 6; ++n) {
    std::vector<double> zero(n, 0.0), e1(n, 0.0);
    e1[0] = 1.0;
    CHECK(phi_product(zero) == 1.0);
    CHECK(phi_determinant(zero) == doctest::Approx(1.0));
    CHECK(phi_symmetric(zero) == 1.0);
    CHECK(phi_product(e1) == doctest::Approx(0.0));
    CHECK(std::abs(phi_determinant(e1)) <= 1e-14);
    CHECK(phi_symmetric(e1) == doctest::Approx(0.0));
  }
  CHECK(phi_product(std::vector<double>{0.5, 0.5}) == 0.0);
}

TEST_CASE("three phi routes agree with a determinant oracle") {
  Rng rng(3);
  for (int n = 2; n <= 8; ++n)
    for (int rep = 0; rep < 500; ++rep) {
      const auto eta = random_simplex(rng, n);
      std::vector<std::vector<double>> m(n, std::vector<double>(n));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m[i][j] = i == j ? (eta[i] - 1) * (eta[i] - 1) : eta[i] * eta[j];
      const double oracle = det_oracle(m);
      const double scale = 1.0 + std::abs(oracle);
      CHECK(std::abs(phi_product(eta) - oracle) <= 1e-10 * scale);
      CHECK(std::abs(phi_determinant(eta) - oracle) <= 1e-10 * scale);
      CHECK(std::abs(phi_symmetric(eta) - oracle) <= 1e-10 * scale);
    }
}

TEST_CASE("Newton chain") {
  for (int n = 2; n <= 8; ++n) {
    const SimplexPoint bary(std::vector<double>(n, 1.0 / n));
    for (int k = 1; k < n; ++k) {
      const auto c = newton_chain_check(bary, k);
      CHECK(std::abs(c.lhs - c.rhs1) <= 1e-12);
      CHECK(c.rhs1 == doctest::Approx(c.rhs2));
    }
  }
  std::vector<double> e1(4, 0.0);
  e1[0] = 1.0;
  const auto c = newton_chain_check(SimplexPoint(e1), 1);
  CHECK(c.lhs == 0.0);
  CHECK(c.lhs <= c.rhs1);

  Rng rng(5);
  double slack = INFINITY;
  for (int rep = 0; rep < 20000; ++rep) {
    const int n = 2 + rep % 7;
    const SimplexPoint eta(random_simplex(rng, n));
    for (int k = 1; k < n; ++k) {
      const auto r = newton_chain_check(eta, k);
      slack = std::min({slack, r.rhs1 - r.lhs, r.rhs2 - r.rhs1});
    }
  }
  CHECK(slack >= -1e-12);
}

TEST_CASE("simplex point validation") {
  CHECK_THROWS_AS(SimplexPoint({0.7, 0.7}), Error);
  CHECK_THROWS_AS(SimplexPoint({-0.1, 0.5}), Error);
  CHECK_THROWS_AS(SimplexPoint({1.0}), Error);
}

TEST_CASE("sign pairing differences are nonnegative") {
  Rng rng(7);
  double worst = INFINITY;
  for (int rep = 0; rep < 5000; ++rep) worst = std::min(worst, sign_pairing_min(random_simplex(rng, 2 + rep % 7)));
  CHECK(worst >= -1e-12);
}

TEST_CASE("nonnegativity sweep") {
  const auto r2 = nonnegativity_sweep(2, 1000, 1);
  CHECK(r2.min_phi == doctest::Approx(0.0));
  CHECK(r2.min_phi >= -1e-12);
  const auto r3 = nonnegativity_sweep(3, 100000, 2);
  CHECK(r3.min_phi >= -1e-12);
  CHECK(r3.min_phi <= 1e-12);
  CHECK(r3.max_identity_gap <= 1e-10);
  int ones = 0;
  for (double v : r3.argmin) ones += v == 1.0;
  CHECK(ones == 1);
  const auto again = nonnegativity_sweep(3, 100000, 2);
  CHECK(again.min_phi == r3.min_phi);
  CHECK(again.argmin == r3.argmin);
}

TEST_CASE("exhaustive grid for n = 2") {
  // On the face eta_1 + eta_2 = 1 the form matrix is rank one, so phi vanishes there and only there.
  double worst = INFINITY;
  long zeros = 0, off_face_zeros = 0;
  for (int i = 0; i <= 1000; ++i)
    for (int j = 0; i + j <= 1000; ++j) {
      const double v = phi_product(std::vector<double>{i * 1e-3, j * 1e-3});
      worst = std::min(worst, v);
      if (std::abs(v) <= 1e-12) (i + j == 1000 ? zeros : off_face_zeros)++;
    }
  CHECK(worst >= -1e-12);
  CHECK(zeros == 1001);
  CHECK(off_face_zeros == 0);
  for (const auto& eta : {std::vector<double>{1, 0}, std::vector<double>{0, 1}, std::vector<double>{0.5, 0.5}})
    CHECK(phi_product(eta) == 0.0);
}

TEST_CASE("perturbed phi is caught") {
  const auto r = nonnegativity_sweep(3, 1000, 7, [](std::span<const double> eta) { return phi_product(eta) - 1e-3; });
  CHECK(r.min_phi < -1e-12);
}

TEST_CASE("Sylvester minors") {
  CHECK(sylvester_minors_check(std::vector<double>(5, 0.0)));
  Rng rng(9);
  for (int rep = 0; rep < 3000; ++rep) CHECK(sylvester_minors_check(random_simplex(rng, 2 + rep % 9)));
}

TEST_CASE("landmarks lie in the simplex") {
  for (int n = 2; n <= 6; ++n)
    for (const auto& p : simplex_landmarks(n)) CHECK_NOTHROW(SimplexPoint{p});
}
