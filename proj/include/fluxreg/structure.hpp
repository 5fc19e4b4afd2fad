#pragma once

// The nonlinearity a(t) of -div(a(|grad u|) grad u) = f and its derived
// objects: b(t) = a(t) t, the energy density B = int_0^t b, the structure
// indices i_a = inf t a'/a and s_a = sup t a'/a, and the regularized family.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>

#include "fluxreg/quadrature.hpp"

namespace fluxreg {

enum class StructureKind { PowerLaw, Constant, Regularized, Custom };
enum class IndexCertainty { Exact, NumericOnGrid };

struct PowerLawSpec {
  double p;
};
struct ConstantSpec {
  double c;
};
struct CustomSpec {
  std::function<double(double)> a;
  std::function<double(double)> derivative;  // may be empty: 5-point stencil is used
  std::string name = "custom";
};
using StructureSpec = std::variant<PowerLawSpec, ConstantSpec, CustomSpec>;

/// Log-spaced surrogate for "all t > 0" used by numeric index scans.
struct IndexScanGrid {
  double t_min = 1e-6;
  double t_max = 1e6;
  int points = 4096;
};

class StructureFunction {
 public:
  double a(double t) const;
  double derivative(double t) const;
  /// b(t) = a(t) t, with b(0) = 0.
  double b(double t) const;
  /// t a'(t) / a(t), the pointwise index.
  double theta(double t) const;

  double lower_index() const { return state_->i_a; }
  double upper_index() const { return state_->s_a; }
  IndexCertainty certainty() const { return state_->certainty; }
  StructureKind kind() const { return state_->kind; }

  /// PowerLaw exponent p; NaN for other kinds.
  double exponent() const { return state_->p; }
  /// Regularization parameter; 0 unless kind() == Regularized.
  double epsilon() const { return state_->epsilon; }
  /// Base structure of a Regularized one; nullptr otherwise.
  const StructureFunction* base() const { return state_->base.get(); }

  std::string describe() const { return state_->name; }

 private:
  struct State {
    StructureKind kind;
    std::function<double(double)> a;
    std::function<double(double)> derivative;
    double i_a = 0.0, s_a = 0.0;
    IndexCertainty certainty = IndexCertainty::Exact;
    double p = 0.0;
    double c = 0.0;
    double epsilon = 0.0;
    std::shared_ptr<const StructureFunction> base;
    std::string name;
  };
  explicit StructureFunction(std::shared_ptr<const State> s) : state_(std::move(s)) {}
  std::shared_ptr<const State> state_;

  friend StructureFunction make_structure(const StructureSpec&);
  friend StructureFunction regularize(const StructureFunction&, double);
};

/// Throws InvalidArgument on bad parameters and IndexOutOfRange when a numeric
/// scan finds i_a <= -1 or |t a'/a| > 1e6.
StructureFunction make_structure(const StructureSpec& spec);

/// Parses `powerlaw:p=3.0` or `constant:c=1.0`.
StructureFunction parse_structure(const std::string& text);

inline double eval_b(const StructureFunction& sf, double t) { return sf.b(t); }

/// Numeric inf/sup of t a'(t)/a(t) on the scan grid; {i_a, s_a}.
std::pair<double, double> scan_indices(const std::function<double(double)>& a,
                                       const std::function<double(double)>& derivative,
                                       const IndexScanGrid& grid = {});

/// 5-point central difference for a'(t), step scaled to t.
double stencil_derivative(const std::function<double(double)>& a, double t);

class EnergyDensity {
 public:
  explicit EnergyDensity(StructureFunction sf, QuadratureRule rule = {});
  /// B(t) = int_0^t b; closed form for PowerLaw and Constant.
  double operator()(double t) const;
  const StructureFunction& owner() const { return sf_; }

 private:
  StructureFunction sf_;
  QuadratureRule rule_;
};

inline double eval_B(const EnergyDensity& ed, double t) { return ed(t); }

/// [a(|xi|) xi - a(|eta|) eta] . (xi - eta). Throws DegeneratePair if xi == eta.
double check_monotonicity(const StructureFunction& sf, std::span<const double> xi,
                          std::span<const double> eta);

/// Width of the soft-clamp blending band, relative to each clamp level.
inline constexpr double kClampBand = 1e-2;

/// a_eps(t) = soft_clamp(a(sqrt(t^2 + eps^2)); eps, 1/eps), eps in (0,1).
StructureFunction regularize(const StructureFunction& sf, double epsilon);

}  // namespace fluxreg
