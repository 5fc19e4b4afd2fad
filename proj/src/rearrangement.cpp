#include "fluxreg/rearrangement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fluxreg/descriptor.hpp"
#include "fluxreg/error.hpp"
#include "fluxreg/parallel.hpp"
#include "fluxreg/quadrature.hpp"

namespace fluxreg {

WeightedSamples::WeightedSamples(std::vector<double> values, std::vector<double> weights)
    : values_(std::move(values)), weights_(std::move(weights)) {
  if (values_.size() != weights_.size())
    throw Error(ErrorCode::InvalidArgument, "values and weights differ in length");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw Error(ErrorCode::InvalidArgument, "non-finite sample value");
    if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
      throw Error(ErrorCode::InvalidArgument, "sample weights must be positive");
    values_[i] = std::abs(values_[i]);
    total_ += weights_[i];
  }
}

WeightedSamples WeightedSamples::uniform(std::vector<double> values, double weight) {
  std::vector<double> w(values.size(), weight);
  return WeightedSamples(std::move(values), std::move(w));
}

double StepFunction::operator()(double s) const {
  const auto it = std::upper_bound(ends.begin(), ends.end(), s);
  return it == ends.end() ? 0.0 : values[static_cast<std::size_t>(it - ends.begin())];
}

double StepFunction::integral(double s) const {
  if (s <= 0.0 || ends.empty()) return 0.0;
  const auto k = static_cast<std::size_t>(std::lower_bound(ends.begin(), ends.end(), s) - ends.begin());
  if (k == ends.size()) return integrals.back();
  const double start = k == 0 ? 0.0 : ends[k - 1];
  const double base = k == 0 ? 0.0 : integrals[k - 1];
  return base + values[k] * (s - start);
}

StepFunction rearrange(const WeightedSamples& ws) {
  std::vector<std::size_t> order(ws.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto v = ws.values();
  const auto w = ws.weights();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  StepFunction f;
  double end = 0.0, integral = 0.0;
  for (std::size_t idx : order) {
    end += w[idx];
    integral += v[idx] * w[idx];
    // Equal values merge into one step.
    if (!f.values.empty() && f.values.back() == v[idx]) {
      f.ends.back() = end;
      f.integrals.back() = integral;
      continue;
    }
    f.values.push_back(v[idx]);
    f.ends.push_back(end);
    f.integrals.push_back(integral);
  }
  return f;
}

double double_star(const StepFunction& f, double s) {
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "psi** needs s > 0");
  return f.integral(s) / s;
}

namespace {

StepFunction checked_rearrange(const WeightedSamples& ws) {
  if (ws.empty()) throw Error(ErrorCode::EmptySamples, "no samples");
  return rearrange(ws);
}

}  // namespace

double marcinkiewicz_norm(const WeightedSamples& ws, double q) {
  if (!(q >= 1.0)) throw Error(ErrorCode::InvalidArgument, "Marcinkiewicz exponent must be >= 1");
  const StepFunction f = checked_rearrange(ws);
  if (std::isinf(q)) return f.values.front();
  // On each step s^{1/q} psi** = v s^{1/q} + D s^{1/q - 1} with D >= 0 has no
  // interior maximum, so the right endpoints suffice.
  double best = 0.0;
  for (std::size_t k = 0; k < f.ends.size(); ++k)
    best = std::max(best, std::pow(f.ends[k], 1.0 / q) * f.integrals[k] / f.ends[k]);
  return best;
}

double weak_log_norm(const WeightedSamples& ws, std::optional<double> C) {
  const StepFunction f = checked_rearrange(ws);
  const double m = f.measure();
  const double c = C.value_or(2.0 * m);
  if (!(c > m)) throw Error(ErrorCode::BadConstant, "weak-log constant must exceed the total measure");
  double best = 0.0;
  for (std::size_t k = 0; k < f.ends.size(); ++k) {
    const double a = k == 0 ? 0.0 : f.ends[k - 1];
    const double b = f.ends[k];
    const double v = f.values[k];
    const double D = (k == 0 ? 0.0 : f.integrals[k - 1]) - v * a;
    auto g = [&](double s) { return std::log1p(c / s) * (v * s + D); };
    auto dg = [&](double s) { return v * std::log1p(c / s) - c * (v * s + D) / (s * (s + c)); };
    best = std::max(best, g(b));
    if (k == 0 || D <= 0.0) continue;
    // Interior maxima sit where g' changes sign from + to -.
    constexpr int kProbes = 8;
    double lo = a, dlo = dg(a);
    for (int p = 1; p <= kProbes; ++p) {
      const double hi = a + (b - a) * p / kProbes;
      const double dhi = dg(hi);
      if (dlo > 0.0 && dhi < 0.0) {
        double l = lo, h = hi;
        for (int it = 0; it < 80 && h - l > 1e-15 * h; ++it) {
          const double mid = 0.5 * (l + h);
          (dg(mid) > 0.0 ? l : h) = mid;
        }
        best = std::max(best, g(0.5 * (l + h)));
      }
      lo = hi;
      dlo = dhi;
    }
  }
  return best;
}

double lorentz_norm(const WeightedSamples& ws, double q, double sigma) {
  if (!(q >= 1.0) || !(sigma >= 1.0)) throw Error(ErrorCode::InvalidArgument, "Lorentz exponents must be >= 1");
  if (std::isinf(sigma)) return marcinkiewicz_norm(ws, q);
  const StepFunction f = checked_rearrange(ws);
  if (std::isinf(q)) return f.values.front() > 0.0 ? kInfinity : 0.0;
  const double alpha = sigma / q - 1.0;
  // First step: psi** = v, integral of s^alpha v^sigma in closed form.
  double total = std::pow(f.values.front(), sigma) * std::pow(f.ends.front(), sigma / q) * q / sigma;
  for (std::size_t k = 1; k < f.ends.size(); ++k) {
    const double a = f.ends[k - 1], b = f.ends[k];
    const double v = f.values[k];
    const double D = f.integrals[k - 1] - v * a;
    auto integrand = [&](double s) { return std::pow(s, alpha) * std::pow(v + D / s, sigma); };
    // Geometric panels keep b/a small where psi** still varies like 1/s.
    const int panels = std::max(1, static_cast<int>(std::ceil(std::log(b / a) / std::log(1.5))));
    const double ratio = std::pow(b / a, 1.0 / panels);
    double lo = a;
    for (int p = 0; p < panels; ++p) {
      const double hi = p + 1 == panels ? b : lo * ratio;
      total += gauss_legendre(integrand, lo, hi, 8);
      lo = hi;
    }
  }
  return std::pow(total, 1.0 / sigma);
}

BoundaryCurve::BoundaryCurve(std::function<CurveJet(double)> eval, double period, std::vector<double> nodes,
                             std::string name)
    : nodes_(std::move(nodes)), name_(std::move(name)) {
  if (nodes_.size() < 8) throw Error(ErrorCode::InvalidArgument, "curve needs at least 8 nodes");
  if (!std::is_sorted(nodes_.begin(), nodes_.end()) || nodes_.front() < 0.0 || nodes_.back() >= period)
    throw Error(ErrorCode::InvalidArgument, "curve nodes must be sorted in [0, period)");
  const std::size_t n = nodes_.size();
  jets_.reserve(n);
  kappa_.reserve(n);
  for (double t : nodes_) {
    const CurveJet j = eval(t);
    const double speed2 = j.dx * j.dx + j.dy * j.dy;
    if (!(speed2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "curve is not regular");
    jets_.push_back(j);
    kappa_.push_back((j.dx * j.ddy - j.dy * j.ddx) / std::pow(speed2, 1.5));
  }
  std::vector<double> chord(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CurveJet& p = jets_[i];
    const CurveJet& q = jets_[(i + 1) % n];
    chord[i] = std::hypot(q.x - p.x, q.y - p.y);
  }
  arclength_.assign(n, 0.0);
  weights_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) arclength_[i] = arclength_[i - 1] + chord[i - 1];
    weights_[i] = 0.5 * (chord[i] + chord[(i + n - 1) % n]);
  }
  length_ = arclength_.back() + chord.back();
}

BoundaryCurve BoundaryCurve::circle(double radius, int samples) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "circle radius must be positive");
  const double period = 2.0 * std::numbers::pi;
  std::vector<double> nodes(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) nodes[static_cast<std::size_t>(i)] = period * i / samples;
  auto eval = [radius](double t) {
    const double c = std::cos(t), s = std::sin(t);
    return CurveJet{radius * c, radius * s, -radius * s, radius * c, -radius * c, -radius * s};
  };
  return BoundaryCurve(eval, period, std::move(nodes), "circle:R=" + std::to_string(radius));
}

BoundaryCurve BoundaryCurve::stadium(double length, double radius, int samples) {
  if (!(length > 0.0) || !(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "stadium sizes must be positive");
  // Unit-speed parametrisation: bottom side, right cap, top side, left cap.
  const double pi = std::numbers::pi;
  const double arc = pi * radius;
  const double period = 2.0 * length + 2.0 * arc;
  const double half = 0.5 * length;
  auto eval = [=](double s) {
    if (s < length) return CurveJet{-half + s, -radius, 1.0, 0.0, 0.0, 0.0};
    s -= length;
    if (s < arc) {
      const double t = -pi / 2 + s / radius;
      return CurveJet{half + radius * std::cos(t), radius * std::sin(t), -std::sin(t), std::cos(t),
                      -std::cos(t) / radius, -std::sin(t) / radius};
    }
    s -= arc;
    if (s < length) return CurveJet{half - s, radius, -1.0, 0.0, 0.0, 0.0};
    s -= length;
    const double t = pi / 2 + s / radius;
    return CurveJet{-half + radius * std::cos(t), radius * std::sin(t), -std::sin(t), std::cos(t),
                    -std::cos(t) / radius, -std::sin(t) / radius};
  };
  std::vector<double> nodes(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) nodes[static_cast<std::size_t>(i)] = period * i / samples;
  return BoundaryCurve(eval, period, std::move(nodes),
                       "stadium:L=" + std::to_string(length) + ",R=" + std::to_string(radius));
}

BoundaryCurve BoundaryCurve::spike(double delta, int samples) {
  if (!(delta > 0.0) || delta > 0.2) throw Error(ErrorCode::InvalidArgument, "spike amplitude must be in (0, 0.2]");
  const double pi = std::numbers::pi;
  const double A = 4.0 * pi;
  const double Lpi = std::log(A / pi);
  // h' = sign(phi)/log(A/|phi|) - phi/(pi log(A/pi)), h(0) = 0; h is even and
  // 2 pi periodic, h'' = 1/(|phi| log^2(A/|phi|)) - 1/(pi log(A/pi)).
  auto h = [=](double phi) {
    const double a = std::abs(phi);
    const double e1 = a == 0.0 ? 0.0 : -std::expint(-std::log(A / a));
    return A * e1 - phi * phi / (2.0 * pi * Lpi);
  };
  auto dh = [=](double phi) {
    const double a = std::abs(phi);
    return std::copysign(1.0, phi) / std::log(A / a) - phi / (pi * Lpi);
  };
  auto ddh = [=](double phi) {
    const double a = std::abs(phi);
    const double L = std::log(A / a);
    return 1.0 / (a * L * L) - 1.0 / (pi * Lpi);
  };
  // Parameter t in [0, 2 pi) maps to phi = t - pi, so the spike sits at t = pi.
  auto eval = [=](double t) {
    const double phi = t - pi;
    const double r = 1.0 + delta * h(phi), dr = delta * dh(phi), ddr = delta * ddh(phi);
    const double c = std::cos(phi), s = std::sin(phi);
    return CurveJet{r * c,
                    r * s,
                    dr * c - r * s,
                    dr * s + r * c,
                    ddr * c - 2.0 * dr * s - r * c,
                    ddr * s + 2.0 * dr * c - r * s};
  };
  // Uniform nodes offset by half a step avoid phi = 0; geometric refinement
  // resolves the spike down to |phi| ~ 1e-15.
  const double step = 2.0 * pi / samples;
  std::vector<double> nodes;
  for (int i = 0; i < samples; ++i) nodes.push_back((i + 0.5) * step);
  for (double a = 0.5 * step / std::sqrt(2.0); a > 1e-15; a /= std::sqrt(2.0)) {
    nodes.push_back(pi - a);
    nodes.push_back(pi + a);
  }
  std::sort(nodes.begin(), nodes.end());
  return BoundaryCurve(eval, 2.0 * pi, std::move(nodes), "spike:delta=" + std::to_string(delta));
}

BoundaryCurve BoundaryCurve::parse(const std::string& text) {
  const Descriptor d = parse_descriptor(text);
  const int n = static_cast<int>(d.number_or("n", 4096));
  if (n < 8) throw Error(ErrorCode::ConfigError, "curve needs n >= 8");
  if (d.name == "circle") {
    d.require_only({"R", "n"});
    return circle(d.number_or("R", 1.0), n);
  }
  if (d.name == "stadium") {
    d.require_only({"L", "R", "n"});
    return stadium(d.number_or("L", 2.0), d.number_or("R", 0.5), n);
  }
  if (d.name == "spike") {
    d.require_only({"delta", "n"});
    return spike(d.number_or("delta", 0.05), n);
  }
  throw Error(ErrorCode::ConfigError, "unknown curve '" + d.name + "'");
}

std::vector<CurvatureRow> curvature_admissibility(const BoundaryCurve& curve, std::span<const double> radii,
                                                  std::size_t max_centers) {
  const std::size_t n = curve.size();
  std::vector<std::size_t> centers;
  const std::size_t stride = std::max<std::size_t>(1, (n + max_centers - 1) / std::max<std::size_t>(1, max_centers));
  for (std::size_t i = 0; i < n; i += stride) centers.push_back(i);
  std::size_t peak = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(curve.curvature(i)) > std::abs(curve.curvature(peak))) peak = i;
  if (std::find(centers.begin(), centers.end(), peak) == centers.end()) centers.push_back(peak);

  auto row = [&](std::size_t r_index) {
    const double r = radii[r_index];
    if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "radii must be positive");
    CurvatureRow out{r, 0.0, 0.0};
    std::vector<double> values, weights;
    for (std::size_t c : centers) {
      const CurveJet& x = curve.jet(c);
      values.clear();
      weights.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const CurveJet& p = curve.jet(i);
        if (std::hypot(p.x - x.x, p.y - x.y) < r) {
          values.push_back(std::abs(curve.curvature(i)));
          weights.push_back(curve.weight(i));
        }
      }
      if (values.empty()) continue;
      const double norm = weak_log_norm(WeightedSamples(values, weights));
      if (norm > out.weak_log_norm) {
        out.weak_log_norm = norm;
        out.sup_point_arclength = curve.arclength(c);
      }
    }
    return out;
  };
  return parallel_map(radii.size(), row);
}

}  // namespace fluxreg
