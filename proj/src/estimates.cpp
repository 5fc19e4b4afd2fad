#include "fluxreg/estimates.hpp"

#include <algorithm>
#include <cmath>

#include "fluxreg/descriptor.hpp"
#include "fluxreg/error.hpp"

namespace fluxreg {

FluxResult flux(const StructureFunction& sf, const ScalarField& u) {
  const VectorField g = gradient(u);
  FluxResult out{VectorField(u.domain_ptr()), 0};
  for (std::size_t idx : u.domain().nodes()) {
    const auto v = g[idx];
    const double t = std::hypot(v[0], v[1]);
    if (t == 0.0) {
      // Any finite limit of a at 0 gives V = 0; an infinite one is flagged.
      if (sf.lower_index() < 0.0) ++out.singular_nodes;
      continue;
    }
    const double a = sf.a(t);
    out.V.set(idx, {a * v[0], a * v[1]});
  }
  return out;
}

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : kUndefinedRatio; }

EstimateReport build_report(const StructureFunction& sf, const ScalarField& u, const ScalarField& f) {
  if (u.domain_ptr() != f.domain_ptr()) throw Error(ErrorCode::DomainMismatch, "u and f on different domains");
  const GridDomain& d = u.domain();
  const FluxResult V = flux(sf, u);
  EstimateReport r;
  r.singular_nodes = V.singular_nodes;
  r.norm_f_l2 = norm_l2(f);
  r.norm_V_l2 = norm_l2(V.V);
  r.norm_gradV_l2 = norm_gradient_l2(V.V);
  r.norm_V_w12 = std::sqrt(r.norm_V_l2 * r.norm_V_l2 + r.norm_gradV_l2 * r.norm_gradV_l2);
  r.ratio_lower = ratio(r.norm_f_l2, r.norm_V_w12);
  r.ratio_upper = ratio(r.norm_V_w12, r.norm_f_l2);

  const ScalarField div = divergence(V.V);
  const double h2 = d.spacing() * d.spacing();
  double res = 0.0, f_int = 0.0;
  for (std::size_t idx : d.nodes()) {
    if (d.kind(idx) != NodeKind::Interior) continue;
    res += h2 * std::pow(div[idx] + f[idx], 2);
    f_int += h2 * f[idx] * f[idx];
  }
  r.residual = std::sqrt(res);
  r.norm_f_interior_l2 = std::sqrt(f_int);
  r.structural_lower_bound = r.norm_f_interior_l2 <= std::sqrt(2.0) * r.norm_gradV_l2 + 10.0 * r.residual;
  r.h = d.spacing();
  r.structure = sf.describe();
  r.domain = d.describe();
  r.convex = d.convex();
  return r;
}

}  // namespace

EstimateReport global_estimate(const StructureFunction& sf, const ScalarField& u, const ScalarField& f,
                               const SolveReport& report) {
  if (report.final_gradient() > 10.0 * report.gradient_tolerance)
    throw Error(ErrorCode::ResidualTooLarge, "solution gradient " + std::to_string(report.final_gradient()) +
                                                 " exceeds 10 x tolerance");
  return build_report(sf, u, f);
}

EstimateReport global_estimate(const StructureFunction& sf, const ScalarField& u, const ScalarField& f) {
  return build_report(sf, u, f);
}

LocalEstimate local_estimate(const StructureFunction& sf, const ScalarField& u, const ScalarField& f,
                             std::array<double, 2> center, double R) {
  if (!(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "ball radius must be positive");
  if (u.domain_ptr() != f.domain_ptr()) throw Error(ErrorCode::DomainMismatch, "u and f on different domains");
  const GridDomain& d = u.domain();
  const double h = d.spacing();
  const double reach = 2.0 * R + h;
  const int i0 = static_cast<int>(std::floor((center[0] - reach - d.x(0)) / h));
  const int j0 = static_cast<int>(std::floor((center[1] - reach - d.y(0)) / h));
  const int i1 = static_cast<int>(std::ceil((center[0] + reach - d.x(0)) / h));
  const int j1 = static_cast<int>(std::ceil((center[1] + reach - d.y(0)) / h));
  for (int j = j0; j <= j1; ++j)
    for (int i = i0; i <= i1; ++i) {
      if (std::hypot(d.x(i) - center[0], d.y(j) - center[1]) >= reach) continue;
      if (i < 0 || j < 0 || i >= d.nx() || j >= d.ny() || d.kind(d.index(i, j)) != NodeKind::Interior)
        throw Error(ErrorCode::BallNotInterior, "B_2R is not inside the domain with a one-cell margin");
    }

  const FluxResult V = flux(sf, u);
  auto ball = [center](double radius) {
    return [center, radius](double x, double y) { return std::hypot(x - center[0], y - center[1]) < radius; };
  };
  LocalEstimate out;
  out.lhs = norm_w12(V.V, ball(R));
  out.rhs = norm_l2(f, ball(2.0 * R)) + norm_l1(V.V, ball(2.0 * R)) / R;
  out.ratio = ratio(out.lhs, out.rhs);
  return out;
}

double gallery_rhs(double beta, double p, double x1) {
  const double e = (beta - 1.0) * (p - 1.0);
  return -std::pow(beta, p - 1.0) * e * std::pow(std::abs(x1), e - 1.0);
}

GalleryReport gallery_counterexample(double beta, double p, const std::string& domain, double h0, int levels) {
  if (!(beta > 1.0)) throw Error(ErrorCode::ParameterOutOfRange, "beta must exceed 1");
  if (!(p > 1.0)) throw Error(ErrorCode::ParameterOutOfRange, "p must exceed 1");
  if ((beta - 1.0) * (p - 1.0) < 1.0)
    throw Error(ErrorCode::ParameterOutOfRange, "need (beta - 1)(p - 1) >= 1 for a continuous right-hand side");
  if (levels < 2) throw Error(ErrorCode::InvalidArgument, "gallery needs at least two levels");
  if (!(h0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "h0 must be positive");

  GalleryReport report;
  report.beta = beta;
  report.p = p;
  report.w22_expected = beta > 1.5;
  report.expected_slope = report.w22_expected ? 0.0 : beta - 1.5;
  const StructureFunction sf = make_structure(PowerLawSpec{p});
  for (int k = 0; k < levels; ++k) {
    const double h = std::ldexp(h0, -k);
    const DomainPtr d = GridDomain::parse(domain + ",h=" + format_number(h));
    const ScalarField u =
        ScalarField::from_function(d, [beta](double x, double) { return std::pow(std::abs(x), beta); });
    GalleryRow row;
    row.h = h;
    row.norm_V_w12 = norm_w12(flux(sf, u).V);
    row.norm_hess_u_l2 = norm_hessian_l2(u);
    report.rows.push_back(row);
  }
  double vmin = report.rows.front().norm_V_w12, vmax = vmin;
  for (const auto& r : report.rows) {
    vmin = std::min(vmin, r.norm_V_w12);
    vmax = std::max(vmax, r.norm_V_w12);
  }
  report.flux_variation = vmin > 0.0 ? vmax / vmin - 1.0 : 0.0;
  report.hessian_growth = report.rows.back().norm_hess_u_l2 / report.rows.front().norm_hess_u_l2 - 1.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(report.rows.size());
  for (const auto& r : report.rows) {
    const double lx = std::log(r.h), ly = std::log(r.norm_hess_u_l2);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  report.hessian_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return report;
}

}  // namespace fluxreg
