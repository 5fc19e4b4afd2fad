#include "fluxreg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "fluxreg/descriptor.hpp"
#include "fluxreg/error.hpp"

namespace fluxreg {

namespace {

int checked_cells(double length, double h, const char* what) {
  const double cells = length / h;
  const double rounded = std::round(cells);
  if (rounded < 2 || std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells))
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " extent is not a whole number (>= 2) of grid cells");
  return static_cast<int>(rounded);
}

}  // namespace

std::shared_ptr<const GridDomain> GridDomain::create(const Shape& shape, double h,
                                                     std::optional<bool> convex) {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
  std::shared_ptr<GridDomain> d(new GridDomain());
  d->shape_ = shape;
  d->h_ = h;
  std::function<bool(int, int)> inside;

  if (const auto* r = std::get_if<RectangleShape>(&shape)) {
    if (!(r->xmax > r->xmin && r->ymax > r->ymin))
      throw Error(ErrorCode::InvalidArgument, "rectangle with empty extent");
    const int cx = checked_cells(r->xmax - r->xmin, h, "rectangle x");
    const int cy = checked_cells(r->ymax - r->ymin, h, "rectangle y");
    d->nx_ = cx + 3;
    d->ny_ = cy + 3;
    d->x0_ = r->xmin - h;
    d->y0_ = r->ymin - h;
    d->convex_ = true;
    d->diameter_ = std::hypot(r->xmax - r->xmin, r->ymax - r->ymin);
    inside = [cx, cy](int i, int j) { return i >= 1 && j >= 1 && i <= cx + 1 && j <= cy + 1; };
    d->description_ = "rect:xmin=" + format_number(r->xmin) + ",xmax=" + format_number(r->xmax) + ",ymin=" + format_number(r->ymin) +
                      ",ymax=" + format_number(r->ymax) + ",h=" + format_number(h);
  } else if (const auto* c = std::get_if<DiskShape>(&shape)) {
    if (!(c->r > 0.0)) throw Error(ErrorCode::InvalidArgument, "disk radius must be positive");
    const int k = static_cast<int>(std::ceil(c->r / h)) + 1;
    d->nx_ = d->ny_ = 2 * k + 1;
    d->x0_ = c->cx - k * h;
    d->y0_ = c->cy - k * h;
    d->convex_ = true;
    d->diameter_ = 2.0 * c->r;
    const GridDomain* self = d.get();
    const DiskShape disk = *c;
    inside = [self, disk](int i, int j) {
      const double dx = self->x(i) - disk.cx, dy = self->y(j) - disk.cy;
      return dx * dx + dy * dy < disk.r * disk.r;
    };
    d->description_ = "disk:r=" + format_number(c->r) + ",h=" + format_number(h);
  } else if (const auto* a = std::get_if<AnnulusShape>(&shape)) {
    if (!(a->r0 > 0.0 && a->r1 > a->r0)) throw Error(ErrorCode::InvalidArgument, "annulus needs 0 < r0 < r1");
    const int k = static_cast<int>(std::ceil(a->r1 / h)) + 1;
    d->nx_ = d->ny_ = 2 * k + 1;
    d->x0_ = a->cx - k * h;
    d->y0_ = a->cy - k * h;
    d->convex_ = convex.value_or(false);
    d->diameter_ = 2.0 * a->r1;
    const GridDomain* self = d.get();
    const AnnulusShape ring = *a;
    inside = [self, ring](int i, int j) {
      const double dx = self->x(i) - ring.cx, dy = self->y(j) - ring.cy;
      const double r2 = dx * dx + dy * dy;
      return r2 > ring.r0 * ring.r0 && r2 < ring.r1 * ring.r1;
    };
    d->description_ = "annulus:r0=" + format_number(a->r0) + ",r1=" + format_number(a->r1) + ",h=" + format_number(h);
  } else {
    const auto& m = std::get<MaskShape>(shape);
    if (m.rows.empty() || m.rows.front().empty()) throw Error(ErrorCode::InvalidArgument, "empty mask");
    const int w = static_cast<int>(m.rows.front().size());
    for (const auto& row : m.rows)
      if (static_cast<int>(row.size()) != w) throw Error(ErrorCode::InvalidArgument, "ragged mask rows");
    const int hgt = static_cast<int>(m.rows.size());
    d->nx_ = w + 2;
    d->ny_ = hgt + 2;
    d->x0_ = m.x0 - h;
    d->y0_ = m.y0 - h;
    d->convex_ = convex.value_or(false);
    d->diameter_ = std::hypot((w - 1) * h, (hgt - 1) * h);
    inside = [&m, w, hgt](int i, int j) {
      return i >= 1 && j >= 1 && i <= w && j <= hgt && m.rows[j - 1][i - 1] != 0;
    };
    d->description_ = "mask:" + std::to_string(w) + "x" + std::to_string(hgt) + ",h=" + format_number(h);
  }

  const std::size_t total = static_cast<std::size_t>(d->nx_) * d->ny_;
  std::vector<std::uint8_t> in(total, 0);
  for (int j = 0; j < d->ny_; ++j)
    for (int i = 0; i < d->nx_; ++i) in[d->index(i, j)] = inside(i, j) ? 1 : 0;
  // The padding ring is always exterior.
  for (int j = 0; j < d->ny_; ++j)
    for (int i = 0; i < d->nx_; ++i)
      if (i == 0 || j == 0 || i == d->nx_ - 1 || j == d->ny_ - 1) in[d->index(i, j)] = 0;

  d->kinds_.assign(total, NodeKind::Exterior);
  d->normals_.assign(total, {0.0, 0.0});
  auto is_in = [&](int i, int j) { return i >= 0 && j >= 0 && i < d->nx_ && j < d->ny_ && in[d->index(i, j)]; };
  for (int j = 0; j < d->ny_; ++j) {
    for (int i = 0; i < d->nx_; ++i) {
      const std::size_t idx = d->index(i, j);
      if (!in[idx]) continue;
      const bool interior = is_in(i + 1, j) && is_in(i - 1, j) && is_in(i, j + 1) && is_in(i, j - 1);
      d->kinds_[idx] = interior ? NodeKind::Interior : NodeKind::Boundary;
      d->nodes_.push_back(idx);
      if (interior) {
        ++d->interior_count_;
        continue;
      }
      std::array<double, 2> n{0.0, 0.0};
      const double px = d->x(i), py = d->y(j);
      if (const auto* c = std::get_if<DiskShape>(&shape)) {
        n = {px - c->cx, py - c->cy};
      } else if (const auto* a = std::get_if<AnnulusShape>(&shape)) {
        const double r = std::hypot(px - a->cx, py - a->cy);
        const double sign = std::abs(r - a->r1) <= std::abs(r - a->r0) ? 1.0 : -1.0;
        n = {sign * (px - a->cx), sign * (py - a->cy)};
      } else {
        // Rectangle and mask: the missing axis neighbours point outward.
        n = {static_cast<double>(!is_in(i + 1, j)) - static_cast<double>(!is_in(i - 1, j)),
             static_cast<double>(!is_in(i, j + 1)) - static_cast<double>(!is_in(i, j - 1))};
        if (n[0] == 0.0 && n[1] == 0.0) {
          // Thin feature: fall back to the 3x3 indicator gradient.
          for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di)
              if (!is_in(i + di, j + dj)) {
                n[0] += di;
                n[1] += dj;
              }
        }
      }
      const double len = std::hypot(n[0], n[1]);
      if (len > 0.0) d->normals_[idx] = {n[0] / len, n[1] / len};
    }
  }
  if (d->nodes_.empty()) throw Error(ErrorCode::InvalidArgument, "domain has no nodes at this spacing");
  return d;
}

std::shared_ptr<const GridDomain> GridDomain::parse(const std::string& text) {
  const Descriptor d = parse_descriptor(text);
  const double h = d.number("h");
  if (d.name == "rect" || d.name == "square" || d.name == "rectangle") {
    d.require_only({"xmin", "xmax", "ymin", "ymax", "h"});
    return create(RectangleShape{d.number_or("xmin", 0.0), d.number_or("xmax", 1.0),
                                 d.number_or("ymin", 0.0), d.number_or("ymax", 1.0)},
                  h);
  }
  if (d.name == "disk") {
    d.require_only({"r", "cx", "cy", "h"});
    return create(DiskShape{d.number_or("r", 1.0), d.number_or("cx", 0.0), d.number_or("cy", 0.0)}, h);
  }
  if (d.name == "annulus") {
    d.require_only({"r0", "r1", "cx", "cy", "h", "convex"});
    return create(AnnulusShape{d.number("r0"), d.number("r1"), d.number_or("cx", 0.0), d.number_or("cy", 0.0)},
                  h, d.number_or("convex", 0.0) != 0.0);
  }
  if (d.name == "mask") {
    d.require_only({"file", "x0", "y0", "h", "convex"});
    if (!d.has("file")) throw Error(ErrorCode::ConfigError, "mask needs file=");
    std::ifstream in(d.params.at("file"));
    if (!in) throw Error(ErrorCode::IoError, "cannot open mask file " + d.params.at("file"));
    MaskShape mask;
    mask.x0 = d.number_or("x0", 0.0);
    mask.y0 = d.number_or("y0", 0.0);
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::uint8_t> row;
      for (char ch : line) {
        if (ch != '0' && ch != '1') throw Error(ErrorCode::ConfigError, "mask rows use only 0 and 1");
        row.push_back(ch == '1');
      }
      mask.rows.push_back(std::move(row));
    }
    // File lists the top row first.
    std::reverse(mask.rows.begin(), mask.rows.end());
    return create(mask, h, d.number_or("convex", 0.0) != 0.0);
  }
  throw Error(ErrorCode::ConfigError, "unknown domain '" + d.name + "'");
}

std::optional<std::size_t> GridDomain::locate(double px, double py) const {
  const long i = std::lround((px - x0_) / h_);
  const long j = std::lround((py - y0_) / h_);
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return std::nullopt;
  return index(static_cast<int>(i), static_cast<int>(j));
}

bool GridDomain::curved() const {
  return std::holds_alternative<DiskShape>(shape_) || std::holds_alternative<AnnulusShape>(shape_);
}

namespace {

// Smallest root in (0, 1] of |p + t d - c| = r, or 2 if none.
double circle_root(double px, double py, double dx, double dy, double cx, double cy, double r) {
  const double ox = px - cx, oy = py - cy;
  const double a = dx * dx + dy * dy, b = 2.0 * (ox * dx + oy * dy), c = ox * ox + oy * oy - r * r;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return 2.0;
  const double sq = std::sqrt(disc);
  double best = 2.0;
  for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)})
    if (t > 0.0 && t <= 1.0) best = std::min(best, t);
  return best;
}

}  // namespace

double GridDomain::crossing(std::size_t inside, std::size_t outside) const {
  const double px = x_of(inside), py = y_of(inside);
  const double dx = x_of(outside) - px, dy = y_of(outside) - py;
  double t = 2.0;
  if (const auto* c = std::get_if<DiskShape>(&shape_)) {
    t = circle_root(px, py, dx, dy, c->cx, c->cy, c->r);
  } else if (const auto* a = std::get_if<AnnulusShape>(&shape_)) {
    t = std::min(circle_root(px, py, dx, dy, a->cx, a->cy, a->r0), circle_root(px, py, dx, dy, a->cx, a->cy, a->r1));
  }
  return t > 1.0 ? 1.0 : t;
}

double GridDomain::weight(std::size_t idx) const {
  switch (kinds_[idx]) {
    case NodeKind::Interior: return h_ * h_;
    case NodeKind::Boundary: return 0.5 * h_ * h_;
    case NodeKind::Exterior: break;
  }
  return 0.0;
}

ScalarField::ScalarField(DomainPtr domain, double fill)
    : domain_(std::move(domain)), values_(domain_->size(), 0.0) {
  for (std::size_t idx : domain_->nodes()) values_[idx] = fill;
}

ScalarField ScalarField::from_function(DomainPtr domain, const std::function<double(double, double)>& f) {
  ScalarField out(std::move(domain));
  const GridDomain& d = out.domain();
  for (std::size_t idx : d.nodes()) out.values_[idx] = f(d.x_of(idx), d.y_of(idx));
  return out;
}

double ScalarField::at(int i, int j) const {
  if (!domain_->in_domain(i, j))
    throw Error(ErrorCode::ExteriorAccess, "node (" + std::to_string(i) + "," + std::to_string(j) + ")");
  return values_[domain_->index(i, j)];
}

VectorField::VectorField(DomainPtr domain)
    : domain_(std::move(domain)), xs_(domain_->size(), 0.0), ys_(domain_->size(), 0.0) {}

VectorField VectorField::from_function(DomainPtr domain,
                                       const std::function<std::array<double, 2>(double, double)>& f) {
  VectorField out(std::move(domain));
  const GridDomain& d = out.domain();
  for (std::size_t idx : d.nodes()) out.set(idx, f(d.x_of(idx), d.y_of(idx)));
  return out;
}

std::array<double, 2> VectorField::at(int i, int j) const {
  if (!domain_->in_domain(i, j))
    throw Error(ErrorCode::ExteriorAccess, "node (" + std::to_string(i) + "," + std::to_string(j) + ")");
  return (*this)[domain_->index(i, j)];
}

double axis_derivative(const GridDomain& d, std::span<const double> v, std::size_t idx, int axis) {
  const int i = static_cast<int>(idx % d.nx()), j = static_cast<int>(idx / d.nx());
  const int di = axis == 0 ? 1 : 0, dj = axis == 0 ? 0 : 1;
  const double h = d.spacing();
  const bool fwd1 = d.in_domain(i + di, j + dj), bwd1 = d.in_domain(i - di, j - dj);
  auto at = [&](int k) { return v[d.index(i + k * di, j + k * dj)]; };
  if (fwd1 && bwd1) return (at(1) - at(-1)) / (2.0 * h);
  if (fwd1 && d.in_domain(i + 2 * di, j + 2 * dj)) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h);
  if (bwd1 && d.in_domain(i - 2 * di, j - 2 * dj)) return (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h);
  if (fwd1) return (at(1) - at(0)) / h;
  if (bwd1) return (at(0) - at(-1)) / h;
  return 0.0;
}

VectorField gradient(const ScalarField& u) {
  const GridDomain& d = u.domain();
  VectorField g(u.domain_ptr());
  for (std::size_t idx : d.nodes())
    g.set(idx, {axis_derivative(d, u.values(), idx, 0), axis_derivative(d, u.values(), idx, 1)});
  return g;
}

ScalarField divergence(const VectorField& V) {
  const GridDomain& d = V.domain();
  ScalarField out(V.domain_ptr());
  for (std::size_t idx : d.nodes())
    out[idx] = axis_derivative(d, V.component(0), idx, 0) + axis_derivative(d, V.component(1), idx, 1);
  return out;
}

ScalarField truncate(const ScalarField& u, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "truncation level must be positive");
  ScalarField out = u;
  for (std::size_t idx : u.domain().nodes()) out[idx] = std::clamp(u[idx], -t, t);
  return out;
}

namespace {

template <class Fn>
double weighted_sum(const GridDomain& d, const NodeFilter& region, Fn value) {
  double sum = 0.0;
  for (std::size_t idx : d.nodes()) {
    if (region && !region(d.x_of(idx), d.y_of(idx))) continue;
    sum += d.weight(idx) * value(idx);
  }
  return sum;
}

template <class Fn>
double interior_sum(const GridDomain& d, const NodeFilter& region, Fn value) {
  const double w = d.spacing() * d.spacing();
  double sum = 0.0;
  for (std::size_t idx : d.nodes()) {
    if (d.kind(idx) != NodeKind::Interior) continue;
    if (region && !region(d.x_of(idx), d.y_of(idx))) continue;
    sum += w * value(idx);
  }
  return sum;
}

}  // namespace

double integrate(const ScalarField& f, const NodeFilter& region) {
  return weighted_sum(f.domain(), region, [&](std::size_t i) { return f[i]; });
}

double norm_l1(const ScalarField& f, const NodeFilter& region) {
  return weighted_sum(f.domain(), region, [&](std::size_t i) { return std::abs(f[i]); });
}

double norm_l2(const ScalarField& f, const NodeFilter& region) {
  return std::sqrt(weighted_sum(f.domain(), region, [&](std::size_t i) { return f[i] * f[i]; }));
}

double norm_l1(const VectorField& V, const NodeFilter& region) {
  return weighted_sum(V.domain(), region, [&](std::size_t i) {
    const auto v = V[i];
    return std::hypot(v[0], v[1]);
  });
}

double norm_l2(const VectorField& V, const NodeFilter& region) {
  return std::sqrt(weighted_sum(V.domain(), region, [&](std::size_t i) {
    const auto v = V[i];
    return v[0] * v[0] + v[1] * v[1];
  }));
}

double norm_gradient_l2(const VectorField& V, const NodeFilter& region) {
  const GridDomain& d = V.domain();
  return std::sqrt(interior_sum(d, region, [&](std::size_t i) {
    double s = 0.0;
    for (int c = 0; c < 2; ++c)
      for (int axis = 0; axis < 2; ++axis) {
        const double g = axis_derivative(d, V.component(c), i, axis);
        s += g * g;
      }
    return s;
  }));
}

double norm_w12(const VectorField& V, const NodeFilter& region) {
  const double l2 = norm_l2(V, region), grad = norm_gradient_l2(V, region);
  return std::sqrt(l2 * l2 + grad * grad);
}

double norm_hessian_l2(const ScalarField& u, const NodeFilter& region) {
  const GridDomain& d = u.domain();
  const double h2 = d.spacing() * d.spacing();
  const std::ptrdiff_t nx = d.nx();
  return std::sqrt(interior_sum(d, region, [&](std::size_t i) {
    const double c = u[i];
    const double uxx = (u[i + 1] - 2.0 * c + u[i - 1]) / h2;
    const double uyy = (u[i + nx] - 2.0 * c + u[i - nx]) / h2;
    double uxy = 0.0;
    // The cross difference needs the diagonal neighbours; near a curved
    // boundary fall back to the differenced centred gradient.
    const bool diagonals = d.in_domain(i + nx + 1) && d.in_domain(i + nx - 1) && d.in_domain(i - nx + 1) &&
                           d.in_domain(i - nx - 1);
    if (diagonals) {
      uxy = (u[i + nx + 1] - u[i + nx - 1] - u[i - nx + 1] + u[i - nx - 1]) / (4.0 * h2);
    } else {
      uxy = (axis_derivative(d, u.values(), i + nx, 0) - axis_derivative(d, u.values(), i - nx, 0)) /
            (2.0 * d.spacing());
    }
    return uxx * uxx + uyy * uyy + 2.0 * uxy * uxy;
  }));
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_csv(const std::string& path, const ScalarField& f, const std::string& trailer) {
  std::ofstream out = open_out(path);
  const GridDomain& d = f.domain();
  out << "x,y,value\n";
  for (std::size_t idx : d.nodes()) out << d.x_of(idx) << ',' << d.y_of(idx) << ',' << f[idx] << '\n';
  if (!trailer.empty()) out << trailer << '\n';
}

void write_csv(const std::string& path, const VectorField& V, const std::string& trailer) {
  std::ofstream out = open_out(path);
  const GridDomain& d = V.domain();
  out << "x,y,value,value2\n";
  for (std::size_t idx : d.nodes()) {
    const auto v = V[idx];
    out << d.x_of(idx) << ',' << d.y_of(idx) << ',' << v[0] << ',' << v[1] << '\n';
  }
  if (!trailer.empty()) out << trailer << '\n';
}

ScalarField read_scalar_csv(DomainPtr domain, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  ScalarField f(domain);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("x,y", 0) == 0) continue;
    }
    const auto values = parse_number_list(line);
    if (values.size() < 3) throw Error(ErrorCode::IoError, "expected x,y,value in " + path);
    const auto idx = domain->locate(values[0], values[1]);
    if (idx && domain->in_domain(*idx)) f[*idx] = values[2];
  }
  return f;
}

}  // namespace fluxreg
