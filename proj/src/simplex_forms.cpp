#include "fluxreg/simplex_forms.hpp"

#include <cmath>
#include <limits>

#include "fluxreg/error.hpp"
#include "fluxreg/parallel.hpp"
#include "fluxreg/rng.hpp"

namespace fluxreg {

SimplexPoint::SimplexPoint(std::vector<double> eta) : eta_(std::move(eta)) {
  if (eta_.size() < 2) throw Error(ErrorCode::InvalidArgument, "simplex point needs n >= 2");
  double sum = 0.0;
  for (double v : eta_) {
    if (!(v >= 0.0)) throw Error(ErrorCode::InvalidArgument, "simplex point has a negative entry");
    sum += v;
  }
  if (sum > 1.0 + 1e-12) throw Error(ErrorCode::InvalidArgument, "simplex point sums above one");
}

Eigen::MatrixXd form_matrix(std::span<const double> eta) {
  const auto n = static_cast<Eigen::Index>(eta.size());
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      M(i, j) = i == j ? (eta[i] - 1.0) * (eta[i] - 1.0) : eta[i] * eta[j];
  return M;
}

std::vector<double> elementary_symmetric_all(std::span<const double> eta) {
  // Coefficients of prod_i (1 + eta_i x), highest index updated first.
  std::vector<double> S(eta.size() + 1, 0.0);
  S[0] = 1.0;
  for (std::size_t i = 0; i < eta.size(); ++i)
    for (std::size_t k = i + 1; k >= 1; --k) S[k] += eta[i] * S[k - 1];
  return S;
}

double elementary_symmetric(std::span<const double> eta, int k) {
  const int n = static_cast<int>(eta.size());
  if (k < 0 || k > n) throw Error(ErrorCode::InvalidArgument, "elementary_symmetric needs 0 <= k <= n");
  // O(n k): only the first k+1 coefficients are carried.
  std::vector<double> S(k + 1, 0.0);
  S[0] = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::min(i + 1, k); j >= 1; --j) S[j] += eta[i] * S[j - 1];
  return S[k];
}

double phi_product(std::span<const double> eta) {
  const std::size_t n = eta.size();
  double total = 1.0;
  for (double v : eta) total *= 1.0 - 2.0 * v;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double prod = eta[i] * eta[i];
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) prod *= 1.0 - 2.0 * eta[j];
    sum += prod;
  }
  return sum + total;
}

double phi_determinant(std::span<const double> eta) {
  if (eta.size() > 12) throw Error(ErrorCode::InvalidArgument, "phi_determinant supports n <= 12");
  return form_matrix(eta).partialPivLu().determinant();
}

double phi_symmetric(std::span<const double> eta) {
  const int n = static_cast<int>(eta.size());
  const std::vector<double> S = elementary_symmetric_all(eta);
  double bracket = 1.0;
  for (int k = 1; k <= n; ++k) bracket += (k % 2 ? -1.0 : 1.0) * std::ldexp(S[k], k - 1);
  double tail = 0.0;
  for (int k = 3; k <= n; ++k) tail += (k % 2 ? 1.0 : -1.0) * (k - 2) * std::ldexp(S[k], k - 2);
  return (1.0 - S[1]) * bracket + tail;
}

NewtonChain newton_chain_check(const SimplexPoint& point, int k) {
  const int n = point.size();
  if (k < 1 || k > n - 1) throw Error(ErrorCode::InvalidArgument, "newton_chain_check needs 1 <= k <= n-1");
  const std::vector<double> S = elementary_symmetric_all(point.eta());
  const double factor = static_cast<double>(n - k) / (static_cast<double>(n) * (k + 1));
  return {S[k + 1], factor * S[k] * S[1], factor * S[k]};
}

double sign_pairing_min(std::span<const double> eta) {
  const int n = static_cast<int>(eta.size());
  const std::vector<double> S = elementary_symmetric_all(eta);
  double worst = std::numeric_limits<double>::infinity();
  for (int h = 1; 2 * h + 1 <= n; ++h)
    worst = std::min(worst, std::ldexp(S[2 * h], 2 * h - 1) - std::ldexp(S[2 * h + 1], 2 * h));
  for (int h = 1; 2 * h + 2 <= n; ++h)
    worst = std::min(worst, (2 * h - 1) * std::ldexp(S[2 * h + 1], 2 * h - 1) -
                                2 * h * std::ldexp(S[2 * h + 2], 2 * h));
  double bracket = 1.0, tail = 0.0;
  for (int k = 1; k <= n; ++k) bracket += (k % 2 ? -1.0 : 1.0) * std::ldexp(S[k], k - 1);
  for (int k = 3; k <= n; ++k) tail += (k % 2 ? 1.0 : -1.0) * (k - 2) * std::ldexp(S[k], k - 2);
  return std::min({worst, bracket, tail});
}

std::vector<std::vector<double>> simplex_landmarks(int n) {
  std::vector<std::vector<double>> out;
  out.emplace_back(n, 0.0);
  for (int i = 0; i < n; ++i) {
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    out.push_back(e);
    for (int j = i + 1; j < n; ++j) {
      std::vector<double> m(n, 0.0);
      m[i] = m[j] = 0.5;
      out.push_back(m);
    }
    // Midpoint of the edge from the origin to e_i.
    std::vector<double> half(n, 0.0);
    half[i] = 0.5;
    out.push_back(half);
  }
  out.emplace_back(n, 1.0 / n);
  out.emplace_back(n, 1.0 / (n + 1));
  return out;
}

namespace {

constexpr long kSweepChunk = 4096;

double relative_gap(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

struct ChunkResult {
  double min_phi = std::numeric_limits<double>::infinity();
  std::vector<double> argmin;
  double gap = 0.0;
};

ChunkResult evaluate(std::span<const double> eta, const PhiFunction& phi, ChunkResult acc) {
  const double reference = phi_product(eta);
  const double value = phi ? phi(eta) : reference;
  acc.gap = std::max({acc.gap, relative_gap(value, reference),
                      relative_gap(phi_determinant(eta), reference),
                      relative_gap(phi_symmetric(eta), reference)});
  if (value < acc.min_phi) {
    acc.min_phi = value;
    acc.argmin.assign(eta.begin(), eta.end());
  }
  return acc;
}

}  // namespace

SweepResult nonnegativity_sweep(int n, long samples, std::uint64_t seed, const PhiFunction& phi) {
  if (n < 2 || n > 12) throw Error(ErrorCode::InvalidArgument, "nonnegativity_sweep needs n in [2,12]");
  if (samples < 0) throw Error(ErrorCode::InvalidArgument, "negative sample count");

  ChunkResult total;
  const auto landmarks = simplex_landmarks(n);
  for (const auto& eta : landmarks) total = evaluate(eta, phi, std::move(total));

  const std::size_t chunks = static_cast<std::size_t>((samples + kSweepChunk - 1) / kSweepChunk);
  const auto partial = parallel_map(chunks, [&](std::size_t c) {
    Rng rng = Rng::for_task(seed, c);
    const long count = std::min(kSweepChunk, samples - static_cast<long>(c) * kSweepChunk);
    std::vector<double> draw(n + 1);
    ChunkResult acc;
    for (long s = 0; s < count; ++s) {
      // Uniform on A: flat Dirichlet in n+1 coordinates, slack dropped.
      rng.simplex_point(draw);
      acc = evaluate(std::span<const double>(draw.data(), n), phi, std::move(acc));
    }
    return acc;
  });
  for (const auto& p : partial) {
    total.gap = std::max(total.gap, p.gap);
    if (p.min_phi < total.min_phi) {
      total.min_phi = p.min_phi;
      total.argmin = p.argmin;
    }
  }
  return {total.min_phi, total.argmin, total.gap, samples + static_cast<long>(landmarks.size())};
}

bool sylvester_minors_check(std::span<const double> eta) {
  if (eta.size() > 10) throw Error(ErrorCode::InvalidArgument, "sylvester_minors_check supports n <= 10");
  const Eigen::MatrixXd M = form_matrix(eta);
  for (Eigen::Index k = 1; k <= M.rows(); ++k)
    if (M.topLeftCorner(k, k).partialPivLu().determinant() < -1e-12) return false;
  return true;
}

}  // namespace fluxreg
