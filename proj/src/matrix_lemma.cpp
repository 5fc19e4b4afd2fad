#include "fluxreg/matrix_lemma.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "fluxreg/error.hpp"
#include "fluxreg/kernels.hpp"
#include "fluxreg/parallel.hpp"
#include "fluxreg/rng.hpp"

namespace fluxreg {

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> d) {
  SymmetricMatrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.size(); ++i) m(i, i) = d[i];
  return m;
}

SymmetricMatrix SymmetricMatrix::outer(std::span<const double> v) {
  SymmetricMatrix m(static_cast<int>(v.size()));
  for (int i = 0; i < m.size(); ++i)
    for (int j = i; j < m.size(); ++j) m(i, j) = v[i] * v[j];
  return m;
}

double SymmetricMatrix::frobenius2() const {
  double sum = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = i; j < n_; ++j) {
      const double v = (*this)(i, j);
      sum += (i == j ? 1.0 : 2.0) * v * v;
    }
  return sum;
}

std::vector<double> SymmetricMatrix::apply(std::span<const double> v) const {
  std::vector<double> out(n_, 0.0);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) out[i] += (*this)(i, j) * v[j];
  return out;
}

SymmetricMatrix SymmetricMatrix::scaled(double s) const {
  SymmetricMatrix m = *this;
  for (double& v : m.packed_) v *= s;
  return m;
}

MatrixProbe MatrixProbe::make(double theta, std::vector<double> omega, SymmetricMatrix H) {
  if (static_cast<int>(omega.size()) != H.size() || omega.empty())
    throw Error(ErrorCode::InvalidArgument, "probe: omega and H sizes differ");
  const double norm2 = std::inner_product(omega.begin(), omega.end(), omega.begin(), 0.0);
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "probe: omega is not a unit vector");
  if (!(H.frobenius2() > 0.0)) throw Error(ErrorCode::ZeroMatrix, "probe: H = 0");
  return MatrixProbe{theta, std::move(omega), std::move(H)};
}

ReducedProbe ReducedProbe::make(std::vector<double> lambda, std::vector<double> eta) {
  if (lambda.size() != eta.size() || lambda.empty())
    throw Error(ErrorCode::InvalidArgument, "reduced probe: lambda and eta sizes differ");
  double sum = 0.0, norm2 = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (eta[i] < 0.0) throw Error(ErrorCode::InvalidArgument, "reduced probe: eta has a negative entry");
    sum += eta[i];
    norm2 += lambda[i] * lambda[i];
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "reduced probe: eta does not sum to one");
  if (!(norm2 > 0.0)) throw Error(ErrorCode::ZeroMatrix, "reduced probe: lambda = 0");
  return ReducedProbe{std::move(lambda), std::move(eta)};
}

double psi(double theta, std::span<const double> omega, const SymmetricMatrix& H) {
  const double trace2 = H.frobenius2();
  if (!(trace2 > 0.0)) throw Error(ErrorCode::ZeroMatrix, "psi: tr(H^2) = 0");
  const std::vector<double> Hw = H.apply(omega);
  double quad = 0.0, norm2 = 0.0;
  for (std::size_t i = 0; i < Hw.size(); ++i) {
    quad += Hw[i] * omega[i];
    norm2 += Hw[i] * Hw[i];
  }
  return theta * theta * quad * quad / trace2 + 2.0 * theta * norm2 / trace2 + 1.0;
}

double psi_reduced(const ReducedProbe& rp, double theta) {
  double first = 0.0, second = 0.0, norm2 = 0.0;
  for (std::size_t i = 0; i < rp.lambda.size(); ++i) {
    const double l = rp.lambda[i];
    first += l * rp.eta[i];
    second += l * l * rp.eta[i];
    norm2 += l * l;
  }
  return (theta * theta * first * first + 2.0 * theta * second) / norm2 + 1.0;
}

ReducedProbe reduce(const MatrixProbe& probe) {
  const int n = probe.H.size();
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = probe.H(i, j);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
  const Eigen::Map<const Eigen::VectorXd> omega(probe.omega.data(), n);
  std::vector<double> lambda(n), eta(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    lambda[i] = eig.eigenvalues()[i];
    const double c = eig.eigenvectors().col(i).dot(omega);
    eta[i] = c * c;
    sum += eta[i];
  }
  for (double& e : eta) e /= sum;
  return ReducedProbe::make(std::move(lambda), std::move(eta));
}

double envelope_bound(double theta) { return std::min(1.0, (1.0 + theta) * (1.0 + theta)); }

void project_to_simplex(std::span<double> x) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0, shift = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) shift = candidate;
  }
  for (double& v : x) v = std::max(v - shift, 0.0);
}

namespace {

struct Candidate {
  double value = 0.0;
  std::vector<double> lambda, eta;
};

double reduced_value(double theta, std::span<const double> lambda, std::span<const double> eta) {
  double first = 0.0, second = 0.0, norm2 = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    first += lambda[i] * eta[i];
    second += lambda[i] * lambda[i] * eta[i];
    norm2 += lambda[i] * lambda[i];
  }
  return (theta * theta * first * first + 2.0 * theta * second) / norm2 + 1.0;
}

Candidate descend(double theta, int n, const MinConstantBudget& budget, std::size_t start) {
  Rng rng = Rng::for_task(budget.seed, start);
  std::vector<double> lambda(n), eta(n), g_lambda(n), g_eta(n);
  rng.unit_vector(lambda);
  rng.simplex_point(eta);
  Candidate best{reduced_value(theta, lambda, eta), lambda, eta};
  for (int it = 0; it < budget.iterations; ++it) {
    // On the sphere sum lambda^2 = 1, so psi = theta^2 (l.e)^2 + 2 theta (l^2.e) + 1.
    double first = 0.0;
    for (int i = 0; i < n; ++i) first += lambda[i] * eta[i];
    for (int i = 0; i < n; ++i) {
      g_lambda[i] = 2.0 * theta * theta * first * eta[i] + 4.0 * theta * lambda[i] * eta[i];
      g_eta[i] = 2.0 * theta * theta * first * lambda[i] + 2.0 * theta * lambda[i] * lambda[i];
    }
    double norm2 = 0.0;
    for (int i = 0; i < n; ++i) {
      lambda[i] -= budget.step * g_lambda[i];
      eta[i] -= budget.step * g_eta[i];
      norm2 += lambda[i] * lambda[i];
    }
    if (norm2 < 1e-24) {
      rng.unit_vector(lambda);
    } else {
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& l : lambda) l *= inv;
    }
    project_to_simplex(eta);
    const double value = reduced_value(theta, lambda, eta);
    if (value < best.value) {
      best.value = value;
      best.lambda = lambda;
      best.eta = eta;
    }
  }
  return best;
}

constexpr std::size_t kSampleChunk = 8192;

Candidate sample_chunk(double theta, int n, const MinConstantBudget& budget, std::size_t chunk,
                       std::size_t count) {
  // Streams for sampling chunks sit after the descent streams.
  Rng rng = Rng::for_task(budget.seed, static_cast<std::uint64_t>(budget.starts) + chunk);
  std::vector<double> lambda(n * count), eta(n * count), values(count);
  std::vector<double> l(n), e(n);
  for (std::size_t s = 0; s < count; ++s) {
    rng.unit_vector(l);
    rng.simplex_point(e);
    for (int k = 0; k < n; ++k) {
      lambda[k * count + s] = l[k];
      eta[k * count + s] = e[k];
    }
  }
  kernels::active().psi_reduced_batch(theta, n, count, lambda.data(), eta.data(), values.data());
  const auto it = std::min_element(values.begin(), values.end());
  const std::size_t s = static_cast<std::size_t>(it - values.begin());
  Candidate best{*it, std::vector<double>(n), std::vector<double>(n)};
  for (int k = 0; k < n; ++k) {
    best.lambda[k] = lambda[k * count + s];
    best.eta[k] = eta[k * count + s];
  }
  return best;
}

}  // namespace

MinConstantResult min_constant(double theta, int n, const MinConstantBudget& budget) {
  if (!(theta >= -1.0) || !std::isfinite(theta))
    throw Error(ErrorCode::InvalidArgument, "min_constant needs theta >= -1");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "min_constant needs n >= 2");
  if (budget.starts < 0 || budget.iterations < 0 || budget.samples < 0 || budget.evaluations() < 1000)
    throw Error(ErrorCode::BudgetTooSmall, "min_constant needs at least 1000 evaluations");

  // Explicit witnesses: H w = 0 gives 1, rank-one aligned gives (1+theta)^2.
  std::vector<double> e1(n, 0.0), e2(n, 0.0);
  e1[0] = 1.0;
  e2[1] = 1.0;
  Candidate best{reduced_value(theta, e1, e1), e1, e1};
  if (const double v = reduced_value(theta, e2, e1); v < best.value) best = {v, e2, e1};

  const auto descents = parallel_map(static_cast<std::size_t>(budget.starts),
                                     [&](std::size_t s) { return descend(theta, n, budget, s); });
  const std::size_t chunks = (static_cast<std::size_t>(budget.samples) + kSampleChunk - 1) / kSampleChunk;
  const auto sampled = parallel_map(chunks, [&](std::size_t c) {
    const std::size_t count =
        std::min(kSampleChunk, static_cast<std::size_t>(budget.samples) - c * kSampleChunk);
    return sample_chunk(theta, n, budget, c, count);
  });
  for (const auto* group : {&descents, &sampled})
    for (const Candidate& c : *group)
      if (c.value < best.value) best = c;

  MinConstantResult result;
  result.theta = theta;
  result.n = n;
  result.estimate = best.value;
  result.upper_bound = envelope_bound(theta);
  result.evaluations = budget.evaluations() + 2;
  result.valid_constant = theta > -1.0;
  if (result.valid_constant) {
    result.witness_lambda = std::move(best.lambda);
    result.witness_eta = std::move(best.eta);
  } else {
    result.witness_lambda = e1;
    result.witness_eta = e1;
  }
  return result;
}

SmoothField quadratic_field(double a, double b, double c, double d, double e) {
  return [=](double x, double y) {
    FieldJet j;
    j.value = a * x * x + b * x * y + c * y * y + d * x + e * y;
    j.grad = {2 * a * x + b * y + d, b * x + 2 * c * y + e};
    j.hess = {{{2 * a, b}, {b, 2 * c}}};
    return j;
  };
}

SmoothField sin_cosh_field() {
  return [](double x, double y) {
    const double s = std::sin(x), c = std::cos(x), ch = std::cosh(y), sh = std::sinh(y);
    FieldJet j;
    j.value = s * ch;
    j.grad = {c * ch, s * sh};
    j.hess = {{{-s * ch, c * sh}, {c * sh, s * ch}}};
    // third[i][j][k] = d^3 u / dx_i dx_j dx_k
    const double xxx = -c * ch, xxy = -s * sh, xyy = c * ch, yyy = s * sh;
    j.third[0][0][0] = xxx;
    j.third[0][0][1] = j.third[0][1][0] = j.third[1][0][0] = xxy;
    j.third[0][1][1] = j.third[1][0][1] = j.third[1][1][0] = xyy;
    j.third[1][1][1] = yyy;
    return j;
  };
}

SmoothField linear_field(double d, double e) { return quadratic_field(0, 0, 0, d, e); }

namespace {

struct PointTerms {
  double a = 0.0, da = 0.0, t = 0.0, lap = 0.0, hess2 = 0.0;
  std::array<double, 2> grad_norm{};  // grad |grad u|
  std::array<double, 2> Hg{};         // H grad u
};

PointTerms point_terms(const FieldJet& j, const StructureFunction& sf) {
  PointTerms p;
  p.t = std::hypot(j.grad[0], j.grad[1]);
  if (p.t < kCriticalTube) throw Error(ErrorCode::VanishingGradient, "|grad u| below the critical tube");
  p.a = sf.a(p.t);
  p.da = sf.derivative(p.t);
  p.lap = j.hess[0][0] + j.hess[1][1];
  for (int i = 0; i < 2; ++i) {
    p.Hg[i] = j.hess[i][0] * j.grad[0] + j.hess[i][1] * j.grad[1];
    p.grad_norm[i] = p.Hg[i] / p.t;
    for (int k = 0; k < 2; ++k) p.hess2 += j.hess[i][k] * j.hess[i][k];
  }
  return p;
}

double lhs_square(const FieldJet& j, const PointTerms& p) {
  const double dir = p.grad_norm[0] * j.grad[0] + p.grad_norm[1] * j.grad[1];
  const double div = p.a * p.lap + p.da * dir;
  return div * div;
}

}  // namespace

double check_pointwise_identity(const SmoothField& u, const StructureFunction& sf, double h,
                                std::span<const Point2> probes) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  // W1 = a^2 grad u lap u, W2 = a^2 H grad u, both from exact second-order data.
  auto fields = [&](double x, double y) {
    const FieldJet j = u(x, y);
    const PointTerms p = point_terms(j, sf);
    const double a2 = p.a * p.a;
    return std::array<double, 4>{a2 * j.grad[0] * p.lap, a2 * j.grad[1] * p.lap, a2 * p.Hg[0],
                                 a2 * p.Hg[1]};
  };
  double worst = 0.0;
  for (const Point2& q : probes) {
    const FieldJet j = u(q.x, q.y);
    const PointTerms p = point_terms(j, sf);
    const auto xp = fields(q.x + h, q.y), xm = fields(q.x - h, q.y);
    const auto yp = fields(q.x, q.y + h), ym = fields(q.x, q.y - h);
    const double div_w1 = (xp[0] - xm[0] + yp[1] - ym[1]) / (2.0 * h);
    const double div_w2 = (xp[2] - xm[2] + yp[3] - ym[3]) / (2.0 * h);
    const double dir = p.grad_norm[0] * j.grad[0] + p.grad_norm[1] * j.grad[1];
    const double cross = p.grad_norm[0] * p.Hg[0] + p.grad_norm[1] * p.Hg[1];
    const double rhs = div_w1 - div_w2 + 2.0 * p.a * p.da * cross + p.a * p.a * p.hess2 +
                       p.da * p.da * dir * dir;
    worst = std::max(worst, std::abs(lhs_square(j, p) - rhs));
  }
  return worst;
}

double check_lower_bound(const SmoothField& u, const StructureFunction& sf,
                         std::span<const Point2> probes, double C) {
  double margin = std::numeric_limits<double>::infinity();
  for (const Point2& q : probes) {
    const FieldJet j = u(q.x, q.y);
    const PointTerms p = point_terms(j, sf);
    const double a2 = p.a * p.a;
    std::array<double, 2> grad_lap{};
    for (int k = 0; k < 2; ++k) grad_lap[k] = j.third[0][0][k] + j.third[1][1][k];
    const double dir = p.grad_norm[0] * j.grad[0] + p.grad_norm[1] * j.grad[1];
    const double cross = p.grad_norm[0] * p.Hg[0] + p.grad_norm[1] * p.Hg[1];
    const double g_dot_grad_lap = j.grad[0] * grad_lap[0] + j.grad[1] * grad_lap[1];
    const double div_w1 = 2.0 * p.a * p.da * dir * p.lap + a2 * (p.lap * p.lap + g_dot_grad_lap);
    const double div_w2 = 2.0 * p.a * p.da * cross + a2 * (p.hess2 + g_dot_grad_lap);
    const double value = lhs_square(j, p) - div_w1 + div_w2 - C * a2 * p.hess2;
    margin = std::min(margin, value);
  }
  return margin;
}

double check_lower_bound(const SmoothField& u, const StructureFunction& sf,
                         std::span<const Point2> probes, const MinConstantBudget& budget) {
  return check_lower_bound(u, sf, probes, min_constant(sf.lower_index(), 2, budget).estimate);
}

}  // namespace fluxreg
