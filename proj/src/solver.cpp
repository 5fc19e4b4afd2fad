#include "fluxreg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include "fluxreg/error.hpp"
#include "fluxreg/estimates.hpp"
#include "fluxreg/kernels.hpp"
#include "fluxreg/quadrature.hpp"

namespace fluxreg {

std::string to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::Dirichlet ? "dirichlet" : "neumann";
}

BoundaryCondition parse_boundary_condition(const std::string& text) {
  if (text == "dirichlet") return BoundaryCondition::Dirichlet;
  if (text == "neumann") return BoundaryCondition::Neumann;
  throw Error(ErrorCode::ConfigError, "bc must be dirichlet or neumann, got '" + text + "'");
}

void SolveOptions::validate() const {
  for (std::size_t i = 0; i < epsilon_schedule.size(); ++i) {
    const double e = epsilon_schedule[i];
    if (!(e > 0.0 && e < 1.0)) throw Error(ErrorCode::InvalidArgument, "epsilon values must lie in (0, 1)");
    if (i > 0 && !(e < epsilon_schedule[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "epsilon schedule must be strictly decreasing");
  }
  if (newton.max_iterations < 1 || !(newton.gradient_tolerance > 0.0) || !(newton.backtrack > 0.0) ||
      !(newton.backtrack < 1.0) || !(newton.min_step > 0.0))
    throw Error(ErrorCode::InvalidArgument, "bad Newton options");
  if (linear.max_iterations < 1 || !(linear.relative_tolerance > 0.0))
    throw Error(ErrorCode::InvalidArgument, "bad linear solver options");
}

int SolveReport::total_newton_iterations() const {
  int total = 0;
  for (const auto& s : stages) total += s.newton_iterations;
  return total;
}

namespace {

/// B(t) for one structure: closed form when available, otherwise a cumulative
/// Gauss-Legendre table on a geometric grid.
class EnergyEvaluator {
 public:
  explicit EnergyEvaluator(const StructureFunction& sf) : sf_(sf), closed_(sf) {
    if (sf.kind() == StructureKind::PowerLaw || sf.kind() == StructureKind::Constant) return;
    a0_ = sf.a(0.0);
    t_lo_ = sf.kind() == StructureKind::Regularized ? 1e-6 * sf.epsilon() : 1e-12;
    const double t_hi = 1e8;
    const int cells = static_cast<int>(std::ceil(std::log(t_hi / t_lo_) / std::log(kRatio)));
    nodes_.resize(static_cast<std::size_t>(cells) + 1);
    cumulative_.resize(nodes_.size());
    nodes_[0] = t_lo_;
    cumulative_[0] = 0.5 * a0_ * t_lo_ * t_lo_;
    for (int k = 1; k <= cells; ++k) {
      nodes_[k] = nodes_[k - 1] * kRatio;
      cumulative_[k] = cumulative_[k - 1] + integrate(nodes_[k - 1], nodes_[k], 8);
    }
  }

  double b(double t) const { return sf_.b(t); }

  double B(double t) const {
    if (nodes_.empty()) return closed_(t);
    if (t <= t_lo_) return 0.5 * a0_ * t * t;
    if (t >= nodes_.back()) return cumulative_.back() + long_integral(nodes_.back(), t);
    auto k = static_cast<std::size_t>(std::log(t / t_lo_) / std::log(kRatio));
    k = std::min(k, nodes_.size() - 2);
    while (k > 0 && nodes_[k] > t) --k;
    while (nodes_[k + 1] <= t) ++k;
    return cumulative_[k] + integrate(nodes_[k], t, 6);
  }

  /// B(t1) - B(t0), integrated directly when the interval is short so the
  /// difference keeps full relative accuracy.
  double delta(double t0, double t1) const {
    if (t0 == t1) return 0.0;
    const double hi = std::max(t0, t1);
    if (std::abs(t1 - t0) <= 0.05 * hi) return integrate(t0, t1, 6);
    return B(t1) - B(t0);
  }

 private:
  static constexpr double kRatio = 1.02;

  double integrate(double lo, double hi, int points) const {
    return gauss_legendre([this](double s) { return sf_.b(s); }, lo, hi, points);
  }

  double long_integral(double lo, double hi) const {
    double sum = 0.0;
    for (double a = lo; a < hi;) {
      const double b = std::min(hi, a * kRatio);
      sum += integrate(a, b, 8);
      a = b;
    }
    return sum;
  }

  StructureFunction sf_;
  EnergyDensity closed_;
  double a0_ = 0.0, t_lo_ = 0.0;
  std::vector<double> nodes_, cumulative_;
};

/// Linear triangles: g = G u over three vertices, energy weight w. A vertex
/// index of -1 is a boundary point held at zero.
struct Elements {
  std::vector<std::array<std::int64_t, 3>> vertex;
  std::vector<std::array<double, 6>> G;  // d/dx coefficients, then d/dy
  std::vector<double> w;
  std::vector<std::uint8_t> fixed;       // per grid node: held at zero
  std::vector<std::size_t> ghosts;       // exterior nodes carrying unknowns
};

// Crossings closer than this fraction of h snap onto the grid node.
constexpr double kSnapFraction = 1e-2;

void add_triangle(Elements& el, const std::array<std::int64_t, 3>& v, const std::array<std::array<double, 2>, 3>& x,
                  double weight_scale, double h) {
  const double area2 = (x[1][0] - x[0][0]) * (x[2][1] - x[0][1]) - (x[2][0] - x[0][0]) * (x[1][1] - x[0][1]);
  if (std::abs(area2) < 1e-12 * h * h) return;
  bool any_free = false;
  for (auto idx : v)
    if (idx >= 0 && !el.fixed[static_cast<std::size_t>(idx)]) any_free = true;
  if (!any_free) return;
  std::array<double, 6> G{};
  for (int k = 0; k < 3; ++k) {
    const auto& a = x[static_cast<std::size_t>((k + 1) % 3)];
    const auto& b = x[static_cast<std::size_t>((k + 2) % 3)];
    G[static_cast<std::size_t>(k)] = (a[1] - b[1]) / area2;
    G[static_cast<std::size_t>(3 + k)] = (b[0] - a[0]) / area2;
  }
  el.vertex.push_back(v);
  el.G.push_back(G);
  el.w.push_back(weight_scale * 0.5 * std::abs(area2));
}

/// Corner triangles (P, P + sx e_x, P + sy e_y) at every node whose two
/// neighbours are in-domain, each with half its area: the average of the two
/// diagonal triangulations of every cell.
void corner_triangles(const GridDomain& d, Elements& el) {
  const double h = d.spacing();
  const auto nx = static_cast<std::ptrdiff_t>(d.nx());
  for (std::size_t idx : d.nodes()) {
    for (int sy : {-1, 1})
      for (int sx : {-1, 1}) {
        const auto e = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + sx);
        const auto n = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + sy * nx);
        if (!d.in_domain(e) || !d.in_domain(n)) continue;
        add_triangle(el, {static_cast<std::int64_t>(idx), static_cast<std::int64_t>(e), static_cast<std::int64_t>(n)},
                     {{{d.x_of(idx), d.y_of(idx)}, {d.x_of(e), d.y_of(e)}, {d.x_of(n), d.y_of(n)}}}, 0.5, h);
      }
  }
}

/// Full cells keep their corner triangles; cells cut by a curved boundary are
/// fan-triangulated with the boundary crossings as zero vertices.
void cut_cells(const GridDomain& d, Elements& el) {
  const double h = d.spacing();
  const int nx = d.nx(), ny = d.ny();
  // Snap nodes that sit almost on the boundary.
  for (std::size_t idx : d.nodes()) {
    for (std::ptrdiff_t off : {std::ptrdiff_t{1}, std::ptrdiff_t{-1}, std::ptrdiff_t{nx}, -std::ptrdiff_t{nx}}) {
      const auto nb = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + off);
      if (!d.in_domain(nb) && d.crossing(idx, nb) < kSnapFraction) el.fixed[idx] = 1;
    }
  }
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const std::array<std::size_t, 4> c = {d.index(i, j), d.index(i + 1, j), d.index(i + 1, j + 1),
                                            d.index(i, j + 1)};
      int inside = 0;
      for (auto idx : c) inside += d.in_domain(idx) ? 1 : 0;
      if (inside == 0) continue;
      if (inside == 4) {
        for (int k = 0; k < 4; ++k) {
          const std::size_t p = c[static_cast<std::size_t>(k)];
          const std::size_t a = c[static_cast<std::size_t>((k + 1) % 4)];
          const std::size_t b = c[static_cast<std::size_t>((k + 3) % 4)];
          add_triangle(el, {static_cast<std::int64_t>(p), static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)},
                       {{{d.x_of(p), d.y_of(p)}, {d.x_of(a), d.y_of(a)}, {d.x_of(b), d.y_of(b)}}}, 0.5, h);
        }
        continue;
      }
      std::vector<std::int64_t> poly;
      std::vector<std::array<double, 2>> pos;
      auto push = [&](std::int64_t v, std::array<double, 2> x) {
        if (!poly.empty() && v >= 0 && poly.back() == v) return;
        poly.push_back(v);
        pos.push_back(x);
      };
      for (int k = 0; k < 4; ++k) {
        const std::size_t a = c[static_cast<std::size_t>(k)], b = c[static_cast<std::size_t>((k + 1) % 4)];
        const bool ia = d.in_domain(a), ib = d.in_domain(b);
        if (ia) push(static_cast<std::int64_t>(a), {d.x_of(a), d.y_of(a)});
        if (ia == ib) continue;
        const std::size_t in = ia ? a : b, out = ia ? b : a;
        const double t = d.crossing(in, out);
        if (t < kSnapFraction) {
          push(static_cast<std::int64_t>(in), {d.x_of(in), d.y_of(in)});
        } else {
          push(-1, {d.x_of(in) + t * (d.x_of(out) - d.x_of(in)), d.y_of(in) + t * (d.y_of(out) - d.y_of(in))});
        }
      }
      if (poly.size() > 1 && poly.front() >= 0 && poly.front() == poly.back()) {
        poly.pop_back();
        pos.pop_back();
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k)
        add_triangle(el, {poly[0], poly[k], poly[k + 1]}, {{pos[0], pos[k], pos[k + 1]}}, 1.0, h);
    }
}

/// Signed area of the triangle (0, a, b) intersected with the disk of radius r about 0.
double sector_triangle_area(std::array<double, 2> a, std::array<double, 2> b, double r) {
  const std::array<double, 2> e{b[0] - a[0], b[1] - a[1]};
  const double A = e[0] * e[0] + e[1] * e[1];
  const double B = a[0] * e[0] + a[1] * e[1];
  const double C = a[0] * a[0] + a[1] * a[1] - r * r;
  std::array<double, 4> t{0.0, 0.0, 0.0, 1.0};
  std::size_t count = 1;
  if (const double disc = B * B - A * C; A > 0.0 && disc > 0.0) {
    const double sq = std::sqrt(disc);
    for (double root : {(-B - sq) / A, (-B + sq) / A})
      if (root > 0.0 && root < 1.0) t[count++] = root;
  }
  t[count++] = 1.0;
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < count; ++k) {
    const std::array<double, 2> p{a[0] + t[k] * e[0], a[1] + t[k] * e[1]};
    const std::array<double, 2> q{a[0] + t[k + 1] * e[0], a[1] + t[k + 1] * e[1]};
    const double cross = p[0] * q[1] - p[1] * q[0];
    const double mx = 0.5 * (p[0] + q[0]), my = 0.5 * (p[1] + q[1]);
    if (mx * mx + my * my <= r * r) area += 0.5 * cross;
    else area += 0.5 * r * r * std::atan2(cross, p[0] * q[0] + p[1] * q[1]);
  }
  return area;
}

double disk_triangle_area(const std::array<std::array<double, 2>, 3>& x, double cx, double cy, double r) {
  double area = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& a = x[k];
    const auto& b = x[(k + 1) % 3];
    area += sector_triangle_area({a[0] - cx, a[1] - cy}, {b[0] - cx, b[1] - cy}, r);
  }
  return std::abs(area);
}

/// Area of the triangle inside the analytic domain of a curved shape.
double clipped_area(const GridDomain& d, const std::array<std::array<double, 2>, 3>& x) {
  if (const auto* disk = std::get_if<DiskShape>(&d.shape())) return disk_triangle_area(x, disk->cx, disk->cy, disk->r);
  const auto& ring = std::get<AnnulusShape>(d.shape());
  return std::max(0.0, disk_triangle_area(x, ring.cx, ring.cy, ring.r1) - disk_triangle_area(x, ring.cx, ring.cy, ring.r0));
}

/// Corner triangles of every cell meeting a curved domain, each weighted by
/// half its area inside the domain; exterior corners become ghost unknowns.
void clipped_cells(const GridDomain& d, Elements& el) {
  const double h = d.spacing();
  const int nx = d.nx(), ny = d.ny();
  std::vector<std::uint8_t> ghost(d.size(), 0);
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const std::array<std::size_t, 4> c = {d.index(i, j), d.index(i + 1, j), d.index(i + 1, j + 1),
                                            d.index(i, j + 1)};
      int inside = 0;
      for (auto idx : c) inside += d.in_domain(idx) ? 1 : 0;
      for (int k = 0; k < 4; ++k) {
        const std::size_t p = c[static_cast<std::size_t>(k)];
        const std::size_t a = c[static_cast<std::size_t>((k + 1) % 4)];
        const std::size_t b = c[static_cast<std::size_t>((k + 3) % 4)];
        const std::array<std::array<double, 2>, 3> x{
            {{d.x_of(p), d.y_of(p)}, {d.x_of(a), d.y_of(a)}, {d.x_of(b), d.y_of(b)}}};
        const double area = inside == 4 ? 0.5 * h * h : clipped_area(d, x);
        if (area <= 1e-10 * h * h) continue;
        const std::size_t before = el.w.size();
        add_triangle(el, {static_cast<std::int64_t>(p), static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)}, x,
                     0.5, h);
        if (el.w.size() == before) continue;
        el.w.back() = 0.5 * area;
        for (auto v : {p, a, b})
          if (!d.in_domain(v) && !ghost[v]) {
            ghost[v] = 1;
            el.ghosts.push_back(v);
          }
      }
    }
}

Elements build_elements(const GridDomain& d, BoundaryCondition bc) {
  Elements el;
  el.fixed.assign(d.size(), 0);
  if (d.curved()) {
    if (bc == BoundaryCondition::Dirichlet) cut_cells(d, el);
    else clipped_cells(d, el);
  } else {
    if (bc == BoundaryCondition::Dirichlet)
      for (std::size_t idx : d.nodes())
        if (d.kind(idx) == NodeKind::Boundary) el.fixed[idx] = 1;
    corner_triangles(d, el);
  }
  return el;
}

/// A third of each element weight per vertex; shares of ghost vertices go
/// to the in-domain vertices of the same element.
std::vector<double> lumped_weights(const GridDomain& d, const Elements& el) {
  std::vector<double> w(d.size(), 0.0);
  for (std::size_t k = 0; k < el.w.size(); ++k) {
    int inside = 0, ghosts = 0;
    for (auto v : el.vertex[k]) {
      if (v < 0) continue;
      (d.in_domain(static_cast<std::size_t>(v)) ? inside : ghosts)++;
    }
    if (inside == 0) continue;
    const double share = el.w[k] / 3.0 * (1.0 + static_cast<double>(ghosts) / inside);
    for (auto v : el.vertex[k])
      if (v >= 0 && d.in_domain(static_cast<std::size_t>(v))) w[static_cast<std::size_t>(v)] += share;
  }
  return w;
}

/// The discrete problem for a fixed domain, load and boundary condition.
class Problem {
 public:
  Problem(const ScalarField& f, BoundaryCondition bc)
      : domain_(f.domain_ptr()), bc_(bc), el_(build_elements(*domain_, bc)) {
    const GridDomain& d = *domain_;
    const std::size_t size = d.size();
    weights_ = lumped_weights(d, el_);
    unknown_.assign(size, 0);
    for (std::size_t idx : d.nodes())
      if (!el_.fixed[idx]) {
        unknown_[idx] = 1;
        ++unknown_count_;
      }
    for (std::size_t idx : el_.ghosts) {
      unknown_[idx] = 1;
      ++unknown_count_;
    }
    load_.assign(size, 0.0);
    for (std::size_t idx : d.nodes()) load_[idx] = f[idx] * weights_[idx];
    for (auto& c : coeff_) c.assign(size, 0.0);
  }

  const GridDomain& domain() const { return *domain_; }
  std::size_t size() const { return domain_->size(); }
  std::span<const double> weights() const { return weights_; }
  std::span<const double> load() const { return load_; }
  bool unknown(std::size_t i) const { return unknown_[i] != 0; }
  std::size_t unknown_count() const { return unknown_count_; }

  std::array<double, 2> element_gradient(std::span<const double> u, std::size_t k) const {
    const auto& v = el_.vertex[k];
    const auto& G = el_.G[k];
    double gx = 0.0, gy = 0.0;
    for (std::size_t m = 0; m < 3; ++m) {
      if (v[m] < 0) continue;
      const double val = u[static_cast<std::size_t>(v[m])];
      gx += G[m] * val;
      gy += G[3 + m] * val;
    }
    return {gx, gy};
  }

  double energy(const EnergyEvaluator& B, std::span<const double> u) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < el_.w.size(); ++k) {
      const auto g = element_gradient(u, k);
      sum += el_.w[k] * B.B(std::hypot(g[0], g[1]));
    }
    double work = 0.0;
    for (std::size_t idx : domain_->nodes()) work += load_[idx] * u[idx];
    return sum - work;
  }

  /// J(u + alpha d) - J(u).
  double energy_change(const EnergyEvaluator& B, std::span<const double> u, std::span<const double> d,
                       double alpha, std::vector<double>& trial) const {
    for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + alpha * d[i];
    double sum = 0.0;
    for (std::size_t k = 0; k < el_.w.size(); ++k) {
      const auto g0 = element_gradient(u, k);
      const auto g1 = element_gradient(trial, k);
      sum += el_.w[k] * B.delta(std::hypot(g0[0], g0[1]), std::hypot(g1[0], g1[1]));
    }
    double work = 0.0;
    for (std::size_t idx : domain_->nodes()) work += load_[idx] * d[idx];
    return sum - alpha * work;
  }

  /// Masked energy gradient; the constant mode is removed for Neumann.
  void gradient(const StructureFunction& sf, std::span<const double> u, std::vector<double>& out) const {
    out.assign(size(), 0.0);
    for (std::size_t k = 0; k < el_.w.size(); ++k) {
      const auto g = element_gradient(u, k);
      const double t = std::hypot(g[0], g[1]);
      if (t == 0.0) continue;
      const double a = sf.a(t);
      if (!std::isfinite(a))
        throw Error(ErrorCode::InvalidArgument, "structure is singular at this gradient; use an epsilon schedule");
      const double fx = el_.w[k] * a * g[0], fy = el_.w[k] * a * g[1];
      const auto& v = el_.vertex[k];
      const auto& G = el_.G[k];
      for (std::size_t m = 0; m < 3; ++m)
        if (v[m] >= 0) out[static_cast<std::size_t>(v[m])] += G[m] * fx + G[3 + m] * fy;
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = unknown_[i] ? out[i] - load_[i] : 0.0;
    project(out);
  }

  /// Energy Hessian at u as a 9-point stencil. constant_a replaces the
  /// tensor a I + a'(t) t g^ g^T by a constant isotropic one.
  void assemble(const StructureFunction& sf, std::span<const double> u, std::optional<double> constant_a) {
    for (auto& c : coeff_) std::fill(c.begin(), c.end(), 0.0);
    const auto nx = static_cast<std::int64_t>(domain_->nx());
    for (std::size_t k = 0; k < el_.w.size(); ++k) {
      double a = 0.0, axx = 0.0, axy = 0.0, ayy = 0.0;
      if (constant_a) {
        a = *constant_a;
      } else {
        const auto g = element_gradient(u, k);
        const double t = std::hypot(g[0], g[1]);
        a = sf.a(t);
        if (!std::isfinite(a))
          throw Error(ErrorCode::InvalidArgument, "structure is singular at this gradient; use an epsilon schedule");
        if (t > 0.0) {
          // a'(t) t g^ g^T = (a'(t) / t) g g^T.
          const double c = sf.derivative(t) / t;
          axx = c * g[0] * g[0];
          axy = c * g[0] * g[1];
          ayy = c * g[1] * g[1];
        }
      }
      const auto& v = el_.vertex[k];
      const auto& G = el_.G[k];
      const double w = el_.w[k];
      for (std::size_t m = 0; m < 3; ++m) {
        if (v[m] < 0) continue;
        const double ax = (a + axx) * G[m] + axy * G[3 + m];
        const double ay = axy * G[m] + (a + ayy) * G[3 + m];
        for (std::size_t l = 0; l < 3; ++l) {
          if (v[l] < 0) continue;
          // Vertices share a cell, so the offset is within one step per axis.
          const std::int64_t dx = v[l] % nx - v[m] % nx, dy = v[l] / nx - v[m] / nx;
          coeff_[static_cast<std::size_t>((dy + 1) * 3 + (dx + 1))][static_cast<std::size_t>(v[m])] +=
              w * (G[l] * ax + G[3 + l] * ay);
        }
      }
    }
  }
  void apply(std::span<const double> x, std::vector<double>& y) const {
    kernels::Stencil9 s;
    s.stride = domain_->nx();
    for (int k = 0; k < 9; ++k) s.coeff[static_cast<std::size_t>(k)] = coeff_[static_cast<std::size_t>(k)].data();
    const std::size_t nx = static_cast<std::size_t>(domain_->nx());
    std::fill(y.begin(), y.end(), 0.0);
    kernels::active().stencil9(s, x.data(), y.data(), nx + 1, size() - nx - 1);
    for (std::size_t i = 0; i < y.size(); ++i)
      if (!unknown_[i]) y[i] = 0.0;
  }

  /// Preconditioned conjugate gradients for S x = b on the unknowns. Returns
  /// the iteration count.
  int solve_linear(std::span<const double> b, std::vector<double>& x, const LinearOptions& opt) const {
    const std::size_t n = size();
    x.assign(n, 0.0);
    std::vector<double> r(b.begin(), b.end()), z(n, 0.0), p(n, 0.0), q(n, 0.0), inv(n, 0.0);
    project(r);
    for (std::size_t i = 0; i < n; ++i)
      if (unknown_[i] && coeff_[4][i] > 0.0) inv[i] = 1.0 / coeff_[4][i];
    const double bnorm = std::sqrt(kernels::dot(r, r));
    if (bnorm == 0.0) return 0;
    for (std::size_t i = 0; i < n; ++i) z[i] = inv[i] * r[i];
    p = z;
    double rz = kernels::dot(r, z);
    for (int it = 1; it <= opt.max_iterations; ++it) {
      apply(p, q);
      const double pq = kernels::dot(p, q);
      if (!(pq > 0.0)) throw Error(ErrorCode::LinearSolveFailure, "Hessian is not positive definite");
      const double alpha = rz / pq;
      kernels::axpy(alpha, p, x);
      kernels::axpy(-alpha, q, r);
      if (std::sqrt(kernels::dot(r, r)) <= opt.relative_tolerance * bnorm) {
        project(x);
        return it;
      }
      for (std::size_t i = 0; i < n; ++i) z[i] = inv[i] * r[i];
      const double rz_next = kernels::dot(r, z);
      kernels::xpby(z, rz_next / rz, p);
      rz = rz_next;
    }
    throw Error(ErrorCode::LinearSolveFailure,
                "conjugate gradients did not converge in " + std::to_string(opt.max_iterations) + " iterations");
  }

  /// Removes the constant mode over the unknowns (Neumann only).
  void project(std::span<double> v) const {
    if (bc_ != BoundaryCondition::Neumann) return;
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (unknown_[i]) sum += v[i];
    const double mean = sum / static_cast<double>(unknown_count_);
    for (std::size_t i = 0; i < v.size(); ++i)
      if (unknown_[i]) v[i] -= mean;
  }

  /// Subtracts the weighted mean of u (Neumann gauge).
  void pin(std::span<double> u) const {
    if (bc_ != BoundaryCondition::Neumann) return;
    double sum = 0.0, total = 0.0;
    for (std::size_t idx : domain_->nodes()) {
      sum += weights_[idx] * u[idx];
      total += weights_[idx];
    }
    const double mean = sum / total;
    for (std::size_t idx : domain_->nodes()) u[idx] -= mean;
  }

 private:
  DomainPtr domain_;
  BoundaryCondition bc_;
  Elements el_;
  std::vector<double> weights_, load_;
  std::vector<std::uint8_t> unknown_;
  std::size_t unknown_count_ = 0;
  std::array<std::vector<double>, 9> coeff_;
};

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void newton_stage(Problem& problem, const StructureFunction& sf, std::vector<double>& u, double tolerance,
                  const SolveOptions& options, StageReport& stage) {
  const EnergyEvaluator B(sf);
  std::vector<double> grad, step, trial(u.size()), rhs(u.size());
  stage.energy_history.push_back(problem.energy(B, u));
  for (;;) {
    problem.gradient(sf, u, grad);
    stage.gradient_norm = max_abs(grad);
    if (stage.gradient_norm <= tolerance) break;
    if (stage.newton_iterations >= options.newton.max_iterations)
      throw Error(ErrorCode::NewtonStall, "Newton did not converge in " +
                                              std::to_string(options.newton.max_iterations) +
                                              " iterations (gradient " + std::to_string(stage.gradient_norm) + ")");
    problem.assemble(sf, u, std::nullopt);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -grad[i];
    stage.linear_iterations += problem.solve_linear(rhs, step, options.linear);
    double slope = kernels::dot(grad, step);
    if (!(slope < 0.0)) {
      step = rhs;
      slope = kernels::dot(grad, step);
    }
    double alpha = 1.0;
    for (;;) {
      const double change = problem.energy_change(B, u, step, alpha, trial);
      if (change <= 1e-4 * alpha * slope) break;
      alpha *= options.newton.backtrack;
      if (alpha < options.newton.min_step)
        throw Error(ErrorCode::NewtonStall,
                    "line search reached the minimum step with gradient " + std::to_string(stage.gradient_norm));
    }
    u.swap(trial);
    problem.pin(u);
    ++stage.newton_iterations;
    stage.energy_history.push_back(problem.energy(B, u));
  }
  stage.energy = problem.energy(B, u);
}

Solution run_solver(const StructureFunction& sf, const DomainPtr& domain, const ScalarField& f,
                    BoundaryCondition bc, const SolveOptions& options) {
  options.validate();
  if (!domain || f.domain_ptr() != domain)
    throw Error(ErrorCode::DomainMismatch, "right-hand side lives on a different domain");
  for (std::size_t idx : domain->nodes())
    if (!std::isfinite(f[idx])) throw Error(ErrorCode::InvalidArgument, "right-hand side is not finite");

  Problem problem(f, bc);
  if (bc == BoundaryCondition::Neumann) {
    double sum = 0.0, l1 = 0.0;
    for (std::size_t idx : domain->nodes()) {
      sum += problem.load()[idx];
      l1 += std::abs(problem.load()[idx]);
    }
    if (std::abs(sum) > 1e-8 * l1)
      throw Error(ErrorCode::IncompatibleData, "Neumann data must have zero mean (sum f w = " +
                                                   std::to_string(sum) + ")");
  }

  Solution out{ScalarField(domain), {}};
  out.report.bc = bc;
  out.report.gradient_tolerance = options.newton.gradient_tolerance;
  std::vector<double> u(problem.size(), 0.0);

  if (problem.unknown_count() > 0) {
    // Poisson start with a frozen at a(1).
    const StructureFunction first =
        options.epsilon_schedule.empty() ? sf : regularize(sf, options.epsilon_schedule.front());
    problem.assemble(first, u, first.a(1.0));
    std::vector<double> rhs(problem.load().begin(), problem.load().end());
    for (std::size_t i = 0; i < rhs.size(); ++i)
      if (!problem.unknown(i)) rhs[i] = 0.0;
    std::vector<double> start;
    problem.solve_linear(rhs, start, options.linear);
    u = start;
    problem.pin(u);

    std::vector<std::optional<double>> eps;
    for (double e : options.epsilon_schedule) eps.emplace_back(e);
    if (eps.empty()) eps.emplace_back(std::nullopt);
    for (std::size_t s = 0; s < eps.size(); ++s) {
      const StructureFunction stage_sf = eps[s] ? regularize(sf, *eps[s]) : sf;
      const bool last = s + 1 == eps.size();
      const double tol = last ? options.newton.gradient_tolerance
                              : std::max(options.newton.gradient_tolerance, options.newton.intermediate_tolerance);
      StageReport stage;
      stage.epsilon = eps[s].value_or(0.0);
      newton_stage(problem, stage_sf, u, tol, options, stage);
      out.report.stages.push_back(std::move(stage));
    }
  }

  for (std::size_t idx : domain->nodes()) out.u[idx] = u[idx];
  const FluxResult V = flux(sf, out.u);
  const ScalarField div = divergence(V.V);
  double res = 0.0;
  const double h2 = domain->spacing() * domain->spacing();
  for (std::size_t idx : domain->nodes())
    if (domain->kind(idx) == NodeKind::Interior) res += h2 * std::pow(div[idx] + f[idx], 2);
  out.report.residual_l2 = std::sqrt(res);
  return out;
}

}  // namespace

std::vector<double> load_weights(const GridDomain& domain, BoundaryCondition bc) {
  return lumped_weights(domain, build_elements(domain, bc));
}

double discrete_energy(const StructureFunction& sf, const ScalarField& f, const ScalarField& u,
                       BoundaryCondition bc) {
  if (f.domain_ptr() != u.domain_ptr()) throw Error(ErrorCode::DomainMismatch, "u and f on different domains");
  const Problem problem(f, bc);
  return problem.energy(EnergyEvaluator(sf), u.values());
}

std::vector<double> energy_gradient(const StructureFunction& sf, const ScalarField& f, const ScalarField& u,
                                    BoundaryCondition bc) {
  if (f.domain_ptr() != u.domain_ptr()) throw Error(ErrorCode::DomainMismatch, "u and f on different domains");
  const Problem problem(f, bc);
  std::vector<double> g;
  problem.gradient(sf, u.values(), g);
  return g;
}

Solution solve_dirichlet(const StructureFunction& sf, const DomainPtr& domain, const ScalarField& f,
                         const SolveOptions& options) {
  return run_solver(sf, domain, f, BoundaryCondition::Dirichlet, options);
}

Solution solve_neumann(const StructureFunction& sf, const DomainPtr& domain, const ScalarField& f,
                       const SolveOptions& options) {
  return run_solver(sf, domain, f, BoundaryCondition::Neumann, options);
}

Solution solve(const StructureFunction& sf, const DomainPtr& domain, const ScalarField& f, BoundaryCondition bc,
               const SolveOptions& options) {
  return run_solver(sf, domain, f, bc, options);
}

ScalarField center_load(const ScalarField& f) {
  const GridDomain& d = f.domain();
  const std::vector<double> w = load_weights(d, BoundaryCondition::Neumann);
  double sum = 0.0, total = 0.0;
  for (std::size_t idx : d.nodes()) {
    sum += w[idx] * f[idx];
    total += w[idx];
  }
  ScalarField out = f;
  if (total == 0.0) return out;
  for (std::size_t idx : d.nodes()) out[idx] -= sum / total;
  return out;
}

ScalarField gaussian_blur(const ScalarField& f, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "blur width must be positive");
  const GridDomain& d = f.domain();
  const int nx = d.nx(), ny = d.ny();
  const double h = d.spacing();
  const int radius = std::min(std::max(nx, ny), static_cast<int>(std::ceil(4.0 * sigma / h)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (int k = -radius; k <= radius; ++k)
    kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * std::pow(k * h / sigma, 2));

  // Blur f w and w separately; their ratio is the mask-normalised average.
  const std::size_t size = d.size();
  std::vector<double> num(size, 0.0), den(size, 0.0);
  for (std::size_t idx : d.nodes()) {
    num[idx] = f[idx] * d.weight(idx);
    den[idx] = d.weight(idx);
  }
  auto pass = [&](std::vector<double>& v, bool along_x) {
    std::vector<double> out(size, 0.0);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int ii = along_x ? i + k : i, jj = along_x ? j : j + k;
          if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
          acc += kernel[static_cast<std::size_t>(k + radius)] * v[d.index(ii, jj)];
        }
        out[d.index(i, j)] = acc;
      }
    v.swap(out);
  };
  for (auto* v : {&num, &den}) {
    pass(*v, true);
    pass(*v, false);
  }
  ScalarField out(f.domain_ptr());
  for (std::size_t idx : d.nodes()) out[idx] = den[idx] > 0.0 ? num[idx] / den[idx] : f[idx];
  return out;
}

std::vector<ApproximationStep> approximation_sequence(const StructureFunction& sf, const DomainPtr& domain,
                                                      const ScalarField& f, int k_max, BoundaryCondition bc,
                                                      const SolveOptions& options) {
  if (k_max < 0) throw Error(ErrorCode::InvalidArgument, "k_max must be >= 0");
  std::vector<ApproximationStep> steps;
  std::vector<VectorField> fluxes;
  for (int k = 0; k <= k_max; ++k) {
    ApproximationStep step;
    step.k = k;
    step.sigma = std::ldexp(domain->diameter(), -k);
    step.f = gaussian_blur(f, step.sigma);
    if (bc == BoundaryCondition::Neumann) step.f = center_load(step.f);
    Solution s = solve(sf, domain, step.f, bc, options);
    step.u = std::move(s.u);
    step.report = std::move(s.report);
    FluxResult V = flux(sf, step.u);
    step.flux_l1 = norm_l1(V.V);
    step.f_l1 = norm_l1(step.f);
    fluxes.push_back(std::move(V.V));
    steps.push_back(std::move(step));
  }
  const ApproximationStep& last = steps.back();
  const VectorField& last_flux = fluxes.back();
  for (std::size_t s = 0; s < steps.size(); ++s) {
    for (std::size_t idx : domain->nodes()) {
      steps[s].u_gap = std::max(steps[s].u_gap, std::abs(steps[s].u[idx] - last.u[idx]));
      const auto v = fluxes[s][idx], w = last_flux[idx];
      steps[s].flux_gap = std::max(steps[s].flux_gap, std::hypot(v[0] - w[0], v[1] - w[1]));
    }
  }
  return steps;
}

}  // namespace fluxreg
