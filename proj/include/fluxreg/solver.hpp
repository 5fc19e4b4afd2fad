#pragma once

// Dirichlet and Neumann problems -div(a(|grad u|) grad u) = f on a GridDomain,
// solved by minimising the discrete convex energy with damped Newton steps,
// preconditioned conjugate gradients and continuation in the regularization
// parameter.

#include <string>
#include <vector>

#include "fluxreg/grid.hpp"
#include "fluxreg/structure.hpp"

namespace fluxreg {

enum class BoundaryCondition { Dirichlet, Neumann };

std::string to_string(BoundaryCondition bc);
BoundaryCondition parse_boundary_condition(const std::string& text);

struct NewtonOptions {
  int max_iterations = 200;
  /// Infinity norm of the energy gradient at the final stage.
  double gradient_tolerance = 1e-9;
  /// Looser tolerance used on every stage but the last.
  double intermediate_tolerance = 1e-6;
  double backtrack = 0.5;
  double min_step = 1e-12;
};

struct LinearOptions {
  double relative_tolerance = 1e-10;
  int max_iterations = 10000;
};

struct SolveOptions {
  /// Strictly decreasing, each in (0, 1). Empty solves with the unregularized structure.
  std::vector<double> epsilon_schedule{1e-1, 1e-2, 1e-3, 1e-4};
  NewtonOptions newton;
  LinearOptions linear;

  /// Throws InvalidArgument.
  void validate() const;
};

struct StageReport {
  double epsilon = 0.0;
  int newton_iterations = 0;
  int linear_iterations = 0;
  double gradient_norm = 0.0;
  double energy = 0.0;
  /// Energy after the initial guess and after every accepted Newton step.
  std::vector<double> energy_history;
};

struct SolveReport {
  BoundaryCondition bc = BoundaryCondition::Dirichlet;
  std::vector<StageReport> stages;
  /// ||div V + f||_{L2} over Interior nodes with V the unregularized flux.
  double residual_l2 = 0.0;
  double gradient_tolerance = 0.0;

  double final_gradient() const { return stages.empty() ? 0.0 : stages.back().gradient_norm; }
  double final_energy() const { return stages.empty() ? 0.0 : stages.back().energy; }
  int total_newton_iterations() const;
};

struct Solution {
  ScalarField u;
  SolveReport report;
};

/// Lumped load weights: a third of each element weight per vertex, h^2 at
/// Interior nodes.
std::vector<double> load_weights(const GridDomain& domain, BoundaryCondition bc);

/// J(u) = sum over elements w B(|g|) - sum f w u. Elements are the corner
/// triangles (P, P + sx e_x, P + sy e_y) with weight h^2/4, and for Dirichlet
/// problems on curved domains the cut cells, fan-triangulated with the
/// boundary crossings as zero vertices. Neumann problems on curved domains
/// weight the corner triangles of cut cells by half their area inside the
/// domain; their exterior vertices are extra unknowns read from u.
double discrete_energy(const StructureFunction& sf, const ScalarField& f, const ScalarField& u,
                       BoundaryCondition bc = BoundaryCondition::Dirichlet);
/// dJ/du at the unknowns of `bc` (zero elsewhere); for Neumann the constant
/// mode is projected out.
std::vector<double> energy_gradient(const StructureFunction& sf, const ScalarField& f, const ScalarField& u,
                                    BoundaryCondition bc);

/// u = 0 on the boundary: at Boundary nodes of rectangles and masks, at the
/// analytic boundary of disks and annuli. Throws NewtonStall, LinearSolveFailure, DomainMismatch.
Solution solve_dirichlet(const StructureFunction& sf, const DomainPtr& domain, const ScalarField& f,
                         const SolveOptions& options = {});
/// Mean-zero u. Throws IncompatibleData when |sum f w| > 1e-8 sum |f| w.
Solution solve_neumann(const StructureFunction& sf, const DomainPtr& domain, const ScalarField& f,
                       const SolveOptions& options = {});
Solution solve(const StructureFunction& sf, const DomainPtr& domain, const ScalarField& f, BoundaryCondition bc,
               const SolveOptions& options = {});

/// Subtracts the load-weighted mean so f is Neumann compatible.
ScalarField center_load(const ScalarField& f);

/// Mask-normalised discrete Gaussian blur of f with standard deviation sigma.
ScalarField gaussian_blur(const ScalarField& f, double sigma);

struct ApproximationStep {
  int k = 0;
  double sigma = 0.0;
  ScalarField f;
  ScalarField u;
  SolveReport report;
  /// max |u_k - u_kmax| over in-domain nodes.
  double u_gap = 0.0;
  /// max |V_k - V_kmax| over in-domain nodes.
  double flux_gap = 0.0;
  double flux_l1 = 0.0;
  double f_l1 = 0.0;
};

/// f_k = gaussian_blur(f, 2^-k diameter) for k = 0..k_max, recentred for
/// Neumann, each solved.
std::vector<ApproximationStep> approximation_sequence(const StructureFunction& sf, const DomainPtr& domain,
                                                      const ScalarField& f, int k_max, BoundaryCondition bc,
                                                      const SolveOptions& options = {});

}  // namespace fluxreg
