#pragma once

// The pointwise lower bound for (div(a(|grad u|) grad u))^2: the functional
//   psi(theta, omega, H) = theta^2 (H w.w)^2 / tr H^2 + 2 theta |H w|^2 / tr H^2 + 1,
// its reduced form in the eigenbasis of H, the constant C(n, theta) as a
// constrained minimum, and field-level checks on closed-form samplers.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fluxreg/structure.hpp"

namespace fluxreg {

/// Symmetric n x n matrix stored as its packed upper triangle.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(int n) : n_(n), packed_(static_cast<std::size_t>(n) * (n + 1) / 2, 0.0) {}
  static SymmetricMatrix diagonal(std::span<const double> d);
  static SymmetricMatrix outer(std::span<const double> v);

  int size() const { return n_; }
  double operator()(int i, int j) const { return packed_[index(i, j)]; }
  double& operator()(int i, int j) { return packed_[index(i, j)]; }
  /// tr(H^2) = squared Frobenius norm.
  double frobenius2() const;
  std::vector<double> apply(std::span<const double> v) const;
  SymmetricMatrix scaled(double s) const;

 private:
  std::size_t index(int i, int j) const {
    if (i > j) std::swap(i, j);
    return static_cast<std::size_t>(i) * n_ - static_cast<std::size_t>(i) * (i - 1) / 2 + (j - i);
  }
  int n_ = 0;
  std::vector<double> packed_;
};

struct MatrixProbe {
  double theta = 0.0;
  std::vector<double> omega;
  SymmetricMatrix H;

  /// Validates |omega| = 1 (to 1e-12), matching sizes and H != 0.
  static MatrixProbe make(double theta, std::vector<double> omega, SymmetricMatrix H);
};

struct ReducedProbe {
  std::vector<double> lambda;
  std::vector<double> eta;

  /// Validates eta >= 0, sum eta = 1 (to 1e-12), sum lambda^2 > 0.
  static ReducedProbe make(std::vector<double> lambda, std::vector<double> eta);
};

/// Throws ZeroMatrix when tr(H^2) = 0.
double psi(double theta, std::span<const double> omega, const SymmetricMatrix& H);
inline double psi(const MatrixProbe& p) { return psi(p.theta, p.omega, p.H); }

double psi_reduced(const ReducedProbe& rp, double theta);

/// Eigen-decomposes H; eta_i = (v_i . omega)^2.
ReducedProbe reduce(const MatrixProbe& probe);

/// min(1, (1 + theta)^2): attained by H w = 0 (value 1) and by a rank-one
/// aligned probe (value (1+theta)^2).
double envelope_bound(double theta);

struct MinConstantBudget {
  int starts = 200;
  int iterations = 10000;
  long samples = 1000000;
  double step = 1e-2;
  std::uint64_t seed = 1;

  long evaluations() const { return static_cast<long>(starts) * iterations + samples; }
};

struct MinConstantResult {
  double theta = 0.0;
  int n = 0;
  double estimate = 0.0;
  double upper_bound = 0.0;
  long evaluations = 0;
  /// false for theta = -1: the value is a limit, not a valid lemma constant.
  bool valid_constant = true;
  std::vector<double> witness_lambda;
  std::vector<double> witness_eta;
};

/// Multistart projected gradient over (lambda on the unit sphere) x (eta on
/// the probability simplex), plus random sampling. Throws BudgetTooSmall when
/// fewer than 1000 evaluations are requested and InvalidArgument for theta < -1.
MinConstantResult min_constant(double theta, int n, const MinConstantBudget& budget = {});

/// Euclidean projection onto {x >= 0, sum x = 1} (sort-based).
void project_to_simplex(std::span<double> x);

/// Closed-form derivatives of a C^3 planar field up to third order.
struct FieldJet {
  double value = 0.0;
  std::array<double, 2> grad{};
  std::array<std::array<double, 2>, 2> hess{};
  std::array<std::array<std::array<double, 2>, 2>, 2> third{};
};
using SmoothField = std::function<FieldJet(double x, double y)>;

/// u = a x^2 + b x y + c y^2 + d x + e y.
SmoothField quadratic_field(double a, double b, double c, double d, double e);
/// u = sin(x) cosh(y).
SmoothField sin_cosh_field();
/// u = d x + e y.
SmoothField linear_field(double d, double e);

struct Point2 {
  double x = 0.0, y = 0.0;
};

/// Tube around critical points excluded from field checks.
inline constexpr double kCriticalTube = 1e-6;

/// Max |lhs - rhs| of the expanded identity for (div(a grad u))^2 over the
/// probes, the two outer divergence terms by central differences with step h.
/// Throws VanishingGradient at a probe with |grad u| < kCriticalTube.
double check_pointwise_identity(const SmoothField& u, const StructureFunction& sf, double h,
                                std::span<const Point2> probes);

/// min over probes of (div V)^2 - sum_j (a^2 u_j lap u)_j + sum_i (a^2 (H grad u)_i)_i
/// - C a^2 |H|^2 using exact derivatives.
double check_lower_bound(const SmoothField& u, const StructureFunction& sf,
                         std::span<const Point2> probes, double C);
/// Same with C = min_constant(i_a, 2, budget).estimate.
double check_lower_bound(const SmoothField& u, const StructureFunction& sf,
                         std::span<const Point2> probes, const MinConstantBudget& budget);

}  // namespace fluxreg
