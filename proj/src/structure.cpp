#include "fluxreg/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fluxreg/descriptor.hpp"
#include "fluxreg/error.hpp"

namespace fluxreg {

namespace {

// C1 soft max/min: quadratic blend over [level - w, level + w].
double soft_max(double x, double level, double w) {
  if (x <= level - w) return level;
  if (x >= level + w) return x;
  const double d = x - level + w;
  return level + d * d / (4.0 * w);
}
double soft_max_slope(double x, double level, double w) {
  if (x <= level - w) return 0.0;
  if (x >= level + w) return 1.0;
  return (x - level + w) / (2.0 * w);
}
double soft_min(double x, double level, double w) {
  if (x >= level + w) return level;
  if (x <= level - w) return x;
  const double d = level + w - x;
  return level - d * d / (4.0 * w);
}
double soft_min_slope(double x, double level, double w) {
  if (x >= level + w) return 0.0;
  if (x <= level - w) return 1.0;
  return (level + w - x) / (2.0 * w);
}

}  // namespace

double StructureFunction::a(double t) const { return state_->a(t); }

double StructureFunction::derivative(double t) const { return state_->derivative(t); }

double StructureFunction::b(double t) const {
  if (t <= 0.0) return 0.0;
  return state_->a(t) * t;
}

double StructureFunction::theta(double t) const {
  switch (state_->kind) {
    case StructureKind::PowerLaw: return state_->p - 2.0;
    case StructureKind::Constant: return 0.0;
    default: break;
  }
  if (t <= 0.0) return 0.0;
  return t * state_->derivative(t) / state_->a(t);
}

double stencil_derivative(const std::function<double(double)>& a, double t) {
  const double h = 1e-3 * std::max(t, 1e-300);
  return (-a(t + 2 * h) + 8 * a(t + h) - 8 * a(t - h) + a(t - 2 * h)) / (12 * h);
}

std::pair<double, double> scan_indices(const std::function<double(double)>& a,
                                       const std::function<double(double)>& derivative,
                                       const IndexScanGrid& grid) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  const double log_min = std::log(grid.t_min), log_max = std::log(grid.t_max);
  for (int k = 0; k < grid.points; ++k) {
    const double t = std::exp(log_min + (log_max - log_min) * k / (grid.points - 1));
    const double at = a(t);
    if (!(at > 0.0) || !std::isfinite(at))
      throw Error(ErrorCode::IndexOutOfRange, "a(t) not positive and finite at t=" + format_number(t));
    const double d = derivative ? derivative(t) : stencil_derivative(a, t);
    const double ratio = t * d / at;
    if (!std::isfinite(ratio) || std::abs(ratio) > 1e6)
      throw Error(ErrorCode::IndexOutOfRange, "t a'/a unbounded near t=" + format_number(t));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  if (lo <= -1.0)
    throw Error(ErrorCode::IndexOutOfRange, "lower index " + format_number(lo) + " <= -1");
  return {lo, hi};
}

StructureFunction make_structure(const StructureSpec& spec) {
  auto state = std::make_shared<StructureFunction::State>();
  state->p = std::numeric_limits<double>::quiet_NaN();
  if (const auto* pl = std::get_if<PowerLawSpec>(&spec)) {
    const double p = pl->p;
    if (!(p > 1.0) || !std::isfinite(p))
      throw Error(ErrorCode::InvalidArgument, "power law needs p > 1, got " + format_number(p));
    state->kind = StructureKind::PowerLaw;
    state->p = p;
    state->a = [p](double t) {
      if (t > 0.0) return std::pow(t, p - 2.0);
      if (p > 2.0) return 0.0;
      if (p == 2.0) return 1.0;
      return std::numeric_limits<double>::infinity();
    };
    state->derivative = [p](double t) {
      if (p == 2.0) return 0.0;
      if (t > 0.0) return (p - 2.0) * std::pow(t, p - 3.0);
      if (p >= 3.0) return p == 3.0 ? 1.0 : 0.0;
      return (p - 2.0) * std::numeric_limits<double>::infinity();
    };
    state->i_a = state->s_a = p - 2.0;
    state->name = "powerlaw:p=" + format_number(p);
  } else if (const auto* cs = std::get_if<ConstantSpec>(&spec)) {
    const double c = cs->c;
    if (!(c > 0.0) || !std::isfinite(c))
      throw Error(ErrorCode::InvalidArgument, "constant structure needs c > 0, got " + format_number(c));
    state->kind = StructureKind::Constant;
    state->c = c;
    state->a = [c](double) { return c; };
    state->derivative = [](double) { return 0.0; };
    state->name = "constant:c=" + format_number(c);
  } else {
    const auto& custom = std::get<CustomSpec>(spec);
    if (!custom.a) throw Error(ErrorCode::InvalidArgument, "custom structure without a(t)");
    state->kind = StructureKind::Custom;
    state->a = custom.a;
    state->derivative = custom.derivative
                            ? custom.derivative
                            : std::function<double(double)>([f = custom.a](double t) {
                                return stencil_derivative(f, t);
                              });
    std::tie(state->i_a, state->s_a) = scan_indices(state->a, custom.derivative);
    state->certainty = IndexCertainty::NumericOnGrid;
    state->name = custom.name;
  }
  return StructureFunction(std::move(state));
}

StructureFunction parse_structure(const std::string& text) {
  const Descriptor d = parse_descriptor(text);
  if (d.name == "powerlaw") {
    d.require_only({"p"});
    return make_structure(PowerLawSpec{d.number("p")});
  }
  if (d.name == "constant") {
    d.require_only({"c"});
    return make_structure(ConstantSpec{d.number("c")});
  }
  throw Error(ErrorCode::ConfigError, "unknown structure '" + d.name + "'");
}

EnergyDensity::EnergyDensity(StructureFunction sf, QuadratureRule rule)
    : sf_(std::move(sf)), rule_(rule) {}

double EnergyDensity::operator()(double t) const {
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "B(t) needs t >= 0");
  if (t == 0.0) return 0.0;
  switch (sf_.kind()) {
    case StructureKind::PowerLaw: {
      const double p = sf_.exponent();
      return std::pow(t, p) / p;
    }
    case StructureKind::Constant: return 0.5 * sf_.a(1.0) * t * t;
    default: break;
  }
  return adaptive_simpson([this](double s) { return sf_.b(s); }, 0.0, t, rule_);
}

double check_monotonicity(const StructureFunction& sf, std::span<const double> xi,
                          std::span<const double> eta) {
  if (xi.size() != eta.size())
    throw Error(ErrorCode::InvalidArgument, "monotonicity check on vectors of different length");
  if (std::equal(xi.begin(), xi.end(), eta.begin()))
    throw Error(ErrorCode::DegeneratePair, "xi == eta");
  double nx = 0.0, ne = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    nx += xi[i] * xi[i];
    ne += eta[i] * eta[i];
  }
  nx = std::sqrt(nx);
  ne = std::sqrt(ne);
  // a(0) may be infinite or zero; the flux a(t) t tends to 0 either way.
  const double ax = nx > 0.0 ? sf.a(nx) : 0.0;
  const double ae = ne > 0.0 ? sf.a(ne) : 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) sum += (ax * xi[i] - ae * eta[i]) * (xi[i] - eta[i]);
  return sum;
}

StructureFunction regularize(const StructureFunction& sf, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw Error(ErrorCode::InvalidArgument, "regularization needs eps in (0,1), got " +
                                                format_number(epsilon));
  auto state = std::make_shared<StructureFunction::State>();
  state->kind = StructureKind::Regularized;
  state->epsilon = epsilon;
  state->p = sf.exponent();
  state->base = std::make_shared<const StructureFunction>(sf);
  const double lo = epsilon, hi = 1.0 / epsilon;
  const double w_lo = kClampBand * lo, w_hi = kClampBand * hi;
  auto base = state->base;
  state->a = [base, epsilon, lo, hi, w_lo, w_hi](double t) {
    const double tau = std::hypot(t, epsilon);
    const double v = soft_min(soft_max(base->a(tau), lo, w_lo), hi, w_hi);
    return std::clamp(v, lo, hi);
  };
  state->derivative = [base, epsilon, lo, hi, w_lo, w_hi](double t) {
    const double tau = std::hypot(t, epsilon);
    const double x = base->a(tau);
    const double y = soft_max(x, lo, w_lo);
    const double slope = soft_min_slope(y, hi, w_hi) * soft_max_slope(x, lo, w_lo);
    if (slope == 0.0) return 0.0;
    return slope * base->derivative(tau) * t / tau;
  };
  std::tie(state->i_a, state->s_a) = scan_indices(state->a, state->derivative);
  state->certainty = IndexCertainty::NumericOnGrid;
  state->name = sf.describe() + ",eps=" + format_number(epsilon);
  return StructureFunction(std::move(state));
}

}  // namespace fluxreg
