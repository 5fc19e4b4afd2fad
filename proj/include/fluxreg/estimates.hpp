#pragma once

// The flux V = a(|grad u|) grad u and the reports built on it: global
// two-sided L2 / W^{1,2} ratios, the local ball estimate and the |x_1|^beta
// gallery where the flux stays regular while u leaves W^{2,2}.

#include <array>
#include <string>
#include <vector>

#include "fluxreg/grid.hpp"
#include "fluxreg/solver.hpp"
#include "fluxreg/structure.hpp"

namespace fluxreg {

/// Ratios with a zero denominator.
inline constexpr double kUndefinedRatio = -1.0;

struct FluxResult {
  VectorField V;
  /// Nodes with grad u = 0 where i_a < 0, i.e. a(0+) is infinite. V = 0 there.
  std::size_t singular_nodes = 0;
};

/// Nodal V = a(|grad u|) grad u with the discrete gradient of u.
FluxResult flux(const StructureFunction& sf, const ScalarField& u);

struct EstimateReport {
  double norm_f_l2 = 0.0;
  /// ||f||_{L2} over Interior nodes only.
  double norm_f_interior_l2 = 0.0;
  double norm_V_l2 = 0.0;
  double norm_gradV_l2 = 0.0;
  double norm_V_w12 = 0.0;
  /// ||f|| / ||V||_{W12} and ||V||_{W12} / ||f||, or kUndefinedRatio.
  double ratio_lower = kUndefinedRatio;
  double ratio_upper = kUndefinedRatio;
  /// ||div V + f||_{L2} over Interior nodes.
  double residual = 0.0;
  /// ||f||_{L2(interior)} <= sqrt(2) ||grad V|| + 10 residual.
  bool structural_lower_bound = true;
  std::size_t singular_nodes = 0;
  double h = 0.0;
  std::string structure;
  std::string domain;
  bool convex = false;
};

/// Throws ResidualTooLarge when report.final_gradient() > 10 x its tolerance.
EstimateReport global_estimate(const StructureFunction& sf, const ScalarField& u, const ScalarField& f,
                               const SolveReport& report);
/// Same without a solver report: no residual precondition is enforced.
EstimateReport global_estimate(const StructureFunction& sf, const ScalarField& u, const ScalarField& f);

struct LocalEstimate {
  double lhs = 0.0;    // ||V||_{W12(B_R)}
  double rhs = 0.0;    // ||f||_{L2(B_2R)} + R^{-1} ||V||_{L1(B_2R)}
  double ratio = kUndefinedRatio;
};

/// Throws BallNotInterior unless every node within 2R + h of the centre is Interior.
LocalEstimate local_estimate(const StructureFunction& sf, const ScalarField& u, const ScalarField& f,
                             std::array<double, 2> center, double R);

struct GalleryRow {
  double h = 0.0;
  double norm_V_w12 = 0.0;
  double norm_hess_u_l2 = 0.0;
};

struct GalleryReport {
  double beta = 0.0, p = 0.0;
  std::vector<GalleryRow> rows;
  /// max/min - 1 of ||V||_{W12} across rows.
  double flux_variation = 0.0;
  /// finest / coarsest - 1 of the discrete Hessian norm.
  double hessian_growth = 0.0;
  /// Least-squares slope of log ||D^2 u|| against log h.
  double hessian_slope = 0.0;
  /// beta - 3/2 when u is not in W^{2,2}, 0 otherwise.
  double expected_slope = 0.0;
  bool w22_expected = false;
};

/// u = |x_1|^beta on `domain` at spacings h_0 2^-k, k < levels, for a
/// p-Laplacian with (beta - 1)(p - 1) >= 1. `domain` is a descriptor without
/// h, e.g. `rect:xmin=-1,xmax=1,ymin=-1,ymax=1`. Throws ParameterOutOfRange.
GalleryReport gallery_counterexample(double beta, double p, const std::string& domain, double h0 = 1.0 / 32,
                                     int levels = 4);

/// f = -div(|grad u|^{p-2} grad u) for u = |x_1|^beta.
double gallery_rhs(double beta, double p, double x1);

}  // namespace fluxreg
