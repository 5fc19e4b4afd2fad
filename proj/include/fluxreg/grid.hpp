#pragma once

// Uniform Cartesian grids over planar domains, nodal scalar/vector fields,
// finite-difference calculus and the discrete norms used by the estimates.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace fluxreg {

enum class NodeKind : std::uint8_t { Exterior, Interior, Boundary };

struct RectangleShape {
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
};
struct DiskShape {
  double r = 1.0, cx = 0.0, cy = 0.0;
};
struct AnnulusShape {
  double r0 = 0.5, r1 = 1.0, cx = 0.0, cy = 0.0;
};
/// rows[j][i] != 0 marks node (x0 + i h, y0 + j h) as in-domain; row 0 is the bottom.
struct MaskShape {
  std::vector<std::vector<std::uint8_t>> rows;
  double x0 = 0.0, y0 = 0.0;
};
using Shape = std::variant<RectangleShape, DiskShape, AnnulusShape, MaskShape>;

class GridDomain {
 public:
  /// Node classification: in-domain nodes with all four axis neighbours
  /// in-domain are Interior, the others Boundary. One Exterior ring pads the
  /// array. `convex` overrides the flag for Annulus/Mask (default false);
  /// Rectangle and Disk are always convex.
  static std::shared_ptr<const GridDomain> create(const Shape& shape, double h,
                                                  std::optional<bool> convex = std::nullopt);
  /// `rect:xmin=0,xmax=1,ymin=0,ymax=1,h=...`, `disk:r=1,h=...[,cx,cy]`,
  /// `annulus:r0=..,r1=..,h=..`, `mask:file=path,h=..[,x0,y0,convex]`.
  static std::shared_ptr<const GridDomain> parse(const std::string& text);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return kinds_.size(); }
  double spacing() const { return h_; }
  double x(int i) const { return x0_ + i * h_; }
  double y(int j) const { return y0_ + j * h_; }
  double x_of(std::size_t idx) const { return x(static_cast<int>(idx % nx_)); }
  double y_of(std::size_t idx) const { return y(static_cast<int>(idx / nx_)); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
  /// Nearest node to (x, y), if it lies on the array.
  std::optional<std::size_t> locate(double x, double y) const;

  NodeKind kind(std::size_t idx) const { return kinds_[idx]; }
  bool in_domain(std::size_t idx) const { return kinds_[idx] != NodeKind::Exterior; }
  bool in_domain(int i, int j) const {
    return i >= 0 && j >= 0 && i < nx_ && j < ny_ && in_domain(index(i, j));
  }
  /// In-domain node indices in row-major order.
  std::span<const std::size_t> nodes() const { return nodes_; }
  std::size_t interior_count() const { return interior_count_; }

  /// Outward unit normal estimate at Boundary nodes, zero elsewhere.
  std::array<double, 2> normal(std::size_t idx) const { return normals_[idx]; }
  /// h^2 at Interior nodes, h^2/2 at Boundary nodes, 0 outside.
  double weight(std::size_t idx) const;

  /// True for shapes with an analytic curved boundary (Disk, Annulus).
  bool curved() const;
  /// Fraction t in (0, 1] such that inside + t (outside - inside) lies on the
  /// analytic boundary; `inside` in-domain, `outside` an exterior axis
  /// neighbour. Returns 1 for shapes without a curved boundary.
  double crossing(std::size_t inside, std::size_t outside) const;

  bool convex() const { return convex_; }
  const Shape& shape() const { return shape_; }
  /// Diameter of the analytic shape (bounding box diagonal for masks).
  double diameter() const { return diameter_; }
  std::string describe() const { return description_; }

 private:
  GridDomain() = default;
  Shape shape_;
  double h_ = 0.0, x0_ = 0.0, y0_ = 0.0, diameter_ = 0.0;
  int nx_ = 0, ny_ = 0;
  bool convex_ = false;
  std::vector<NodeKind> kinds_;
  std::vector<std::array<double, 2>> normals_;
  std::vector<std::size_t> nodes_;
  std::size_t interior_count_ = 0;
  std::string description_;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(DomainPtr domain, double fill = 0.0);
  /// Samples f at in-domain nodes; exterior nodes hold 0.
  static ScalarField from_function(DomainPtr domain, const std::function<double(double, double)>& f);

  const GridDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  double operator[](std::size_t idx) const { return values_[idx]; }
  double& operator[](std::size_t idx) { return values_[idx]; }
  /// Throws ExteriorAccess outside the domain.
  double at(int i, int j) const;
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

 private:
  DomainPtr domain_;
  std::vector<double> values_;
};

class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(DomainPtr domain);
  static VectorField from_function(DomainPtr domain,
                                   const std::function<std::array<double, 2>(double, double)>& f);

  const GridDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  std::span<const double> component(int c) const { return c == 0 ? xs_ : ys_; }
  std::span<double> component(int c) { return c == 0 ? std::span<double>(xs_) : std::span<double>(ys_); }
  std::array<double, 2> operator[](std::size_t idx) const { return {xs_[idx], ys_[idx]}; }
  void set(std::size_t idx, std::array<double, 2> v) {
    xs_[idx] = v[0];
    ys_[idx] = v[1];
  }
  std::array<double, 2> at(int i, int j) const;

 private:
  DomainPtr domain_;
  std::vector<double> xs_, ys_;
};

/// Restricts a norm to nodes where the predicate holds.
using NodeFilter = std::function<bool(double x, double y)>;

/// Derivative along axis (0 = x, 1 = y) at an in-domain node: centred when
/// both neighbours are in-domain, second-order one-sided otherwise.
double axis_derivative(const GridDomain& d, std::span<const double> values, std::size_t idx, int axis);

VectorField gradient(const ScalarField& u);
ScalarField divergence(const VectorField& V);
/// T_t(u): u where |u| <= t, sign(u) t otherwise. t > 0.
ScalarField truncate(const ScalarField& u, double t);

double norm_l1(const ScalarField& f, const NodeFilter& region = {});
double norm_l2(const ScalarField& f, const NodeFilter& region = {});
double norm_l1(const VectorField& V, const NodeFilter& region = {});
double norm_l2(const VectorField& V, const NodeFilter& region = {});
/// L2 norm of the component gradients over Interior nodes only.
double norm_gradient_l2(const VectorField& V, const NodeFilter& region = {});
/// sqrt(||V||_2^2 + sum_c ||grad V_c||^2), the gradient part on Interior nodes.
double norm_w12(const VectorField& V, const NodeFilter& region = {});
/// L2 norm over Interior nodes of the second-difference Hessian of u.
double norm_hessian_l2(const ScalarField& u, const NodeFilter& region = {});
/// Integral of f with the node weights.
double integrate(const ScalarField& f, const NodeFilter& region = {});

/// CSV with header `x,y,value` (scalar) or `x,y,value,value2` (vector); in-domain nodes only.
void write_csv(const std::string& path, const ScalarField& f, const std::string& trailer = {});
void write_csv(const std::string& path, const VectorField& V, const std::string& trailer = {});
/// Reads `x,y,value` rows onto the nearest nodes; missing nodes stay 0.
ScalarField read_scalar_csv(DomainPtr domain, const std::string& path);

}  // namespace fluxreg
