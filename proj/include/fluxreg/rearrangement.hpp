#pragma once

// Decreasing rearrangements of finite weighted samples, the Marcinkiewicz,
// Lorentz and weak-log norms built on psi**, and a curvature report for
// closed plane curves.

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fluxreg {

/// Values |psi(x_i)| with positive weights m_i.
class WeightedSamples {
 public:
  WeightedSamples() = default;
  /// Throws InvalidArgument on size mismatch, non-finite values or weights <= 0.
  WeightedSamples(std::vector<double> values, std::vector<double> weights);
  /// Unit weights.
  static WeightedSamples uniform(std::vector<double> values, double weight = 1.0);

  std::span<const double> values() const { return values_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double total_measure() const { return total_; }

 private:
  std::vector<double> values_, weights_;
  double total_ = 0.0;
};

/// psi*(s) = values[k] on [ends[k-1], ends[k]) with ends[-1] = 0; values are
/// non-increasing. integrals[k] = int_0^{ends[k]} psi*.
struct StepFunction {
  std::vector<double> values, ends, integrals;

  double measure() const { return ends.empty() ? 0.0 : ends.back(); }
  /// psi*(s); 0 beyond the measure.
  double operator()(double s) const;
  /// int_0^s psi*.
  double integral(double s) const;
};

StepFunction rearrange(const WeightedSamples& ws);
/// psi**(s) = (1/s) int_0^s psi*; s > 0. psi**(s) for s beyond the measure
/// keeps averaging zeros.
double double_star(const StepFunction& f, double s);

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// sup_{0<s<m} s^{1/q} psi**(s); q in [1, inf]. Throws EmptySamples.
double marcinkiewicz_norm(const WeightedSamples& ws, double q);
/// sup_{0<s<m} s log(1 + C/s) psi**(s). C defaults to twice the measure;
/// throws BadConstant when C <= m.
double weak_log_norm(const WeightedSamples& ws, std::optional<double> C = std::nullopt);
/// || s^{1/q - 1/sigma} psi**(s) ||_{L^sigma(0, m)}; sigma = inf gives the
/// Marcinkiewicz norm.
double lorentz_norm(const WeightedSamples& ws, double q, double sigma);

/// Position, first and second derivative of a parametrised curve.
struct CurveJet {
  double x, y, dx, dy, ddx, ddy;
};

/// Closed regular curve sampled at sorted parameter nodes in [0, period).
class BoundaryCurve {
 public:
  BoundaryCurve(std::function<CurveJet(double)> eval, double period, std::vector<double> nodes,
                std::string name);

  static BoundaryCurve circle(double radius, int samples = 4096);
  /// Two straight sides of length `length` joined by semicircles of radius `radius`.
  static BoundaryCurve stadium(double length, double radius, int samples = 4096);
  /// r(phi) = 1 + delta h(phi) with a curvature spike |kappa| ~ delta/(|phi| log^2) at phi = 0.
  static BoundaryCurve spike(double delta = 0.05, int samples = 4096);
  /// `circle:R=1`, `stadium:L=2,R=0.5`, `spike:delta=0.05`, optional `n=` samples.
  static BoundaryCurve parse(const std::string& text);

  std::size_t size() const { return nodes_.size(); }
  const CurveJet& jet(std::size_t i) const { return jets_[i]; }
  /// Signed curvature at node i.
  double curvature(std::size_t i) const { return kappa_[i]; }
  /// Arclength from node 0 to node i.
  double arclength(std::size_t i) const { return arclength_[i]; }
  /// Arclength owned by node i (half of each adjacent chord).
  double weight(std::size_t i) const { return weights_[i]; }
  double length() const { return length_; }
  const std::string& name() const { return name_; }

 private:
  std::vector<double> nodes_;
  std::vector<CurveJet> jets_;
  std::vector<double> kappa_, arclength_, weights_;
  double length_ = 0.0;
  std::string name_;
};

struct CurvatureRow {
  double radius;
  double sup_point_arclength;
  double weak_log_norm;
};

/// For each radius r: sup over boundary points x of the weak-log norm of |kappa|
/// on the arc within Euclidean distance r of x, with arclength weights and
/// C = 2 x (arc measure). At most `max_centers` evenly spaced centres plus the
/// node of largest |kappa| are examined.
std::vector<CurvatureRow> curvature_admissibility(const BoundaryCurve& curve, std::span<const double> radii,
                                                  std::size_t max_centers = 1024);

}  // namespace fluxreg
