#pragma once

// Nonnegativity of the quadratic form
//   sum_i (eta_i - 1)^2 l_i^2 + 2 sum_{i<j} eta_i eta_j l_i l_j
// on the simplex A = {eta >= 0, sum eta <= 1}: the form matrix, three
// algebraically equal routes to its determinant phi(eta), elementary
// symmetric functions and the Newton-inequality chain used to sign phi.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fluxreg {

/// eta with eta_i >= 0 and sum eta_i <= 1 + 1e-12.
class SimplexPoint {
 public:
  /// Throws InvalidArgument outside A or for n < 2.
  explicit SimplexPoint(std::vector<double> eta);
  std::span<const double> eta() const { return eta_; }
  int size() const { return static_cast<int>(eta_.size()); }

 private:
  std::vector<double> eta_;
};

/// M_ii = (eta_i - 1)^2, M_ij = eta_i eta_j.
Eigen::MatrixXd form_matrix(std::span<const double> eta);

/// S_k by the product expansion of prod (1 + eta_i x); S_0 = 1.
double elementary_symmetric(std::span<const double> eta, int k);
/// S_0..S_n in one pass.
std::vector<double> elementary_symmetric_all(std::span<const double> eta);

/// sum_i eta_i^2 prod_{j != i} (1 - 2 eta_j) + prod_j (1 - 2 eta_j).
double phi_product(std::span<const double> eta);
/// det(form_matrix(eta)) by partially pivoted LU; n <= 12.
double phi_determinant(std::span<const double> eta);
/// (1 - S_1)[1 + sum_k (-1)^k 2^{k-1} S_k] + sum_{k>=3} (-1)^{k-1} (k-2) 2^{k-2} S_k.
double phi_symmetric(std::span<const double> eta);

struct NewtonChain {
  double lhs;   // S_{k+1}
  double rhs1;  // (n-k)/(n(k+1)) S_k S_1
  double rhs2;  // (n-k)/(n(k+1)) S_k
};
/// 1 <= k <= n-1.
NewtonChain newton_chain_check(const SimplexPoint& eta, int k);

/// The two sign-pairing differences, evaluated for every admissible h:
///   2^{2h-1} S_{2h} - 2^{2h} S_{2h+1}               (1 <= h <= (n-1)/2)
///   (2h-1) 2^{2h-1} S_{2h+1} - 2h 2^{2h} S_{2h+2}   (1 <= h <= (n-2)/2)
/// and the two bracketed sums they sign. Returns the smallest of all.
double sign_pairing_min(std::span<const double> eta);

/// Vertices e_i, edge midpoints (e_i + e_j)/2, the origin and the barycenters
/// of the full and the face simplex.
std::vector<std::vector<double>> simplex_landmarks(int n);

struct SweepResult {
  double min_phi = 0.0;
  std::vector<double> argmin;
  double max_identity_gap = 0.0;  // max relative gap among the three phi routes
  long points = 0;
};

using PhiFunction = std::function<double(std::span<const double>)>;

/// min of phi over `samples` flat-Dirichlet draws from A plus the landmarks.
/// `phi` defaults to phi_product; the identity gap compares it with the
/// determinant and symmetric-function routes.
SweepResult nonnegativity_sweep(int n, long samples, std::uint64_t seed,
                                const PhiFunction& phi = {});

/// All leading principal minors of form_matrix(eta) >= -1e-12. n <= 10.
bool sylvester_minors_check(std::span<const double> eta);

}  // namespace fluxreg
