#pragma once

#include <cstddef>
#include <functional>

namespace fluxreg {

struct QuadratureRule {
  double rel_tol = 1e-10;
  std::size_t max_subdivisions = 200000;
};

/// Adaptive Simpson on [lo, hi]. Throws QuadratureFailure once more than
/// rule.max_subdivisions intervals have been split.
double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        const QuadratureRule& rule = {});

/// n-point Gauss-Legendre on [lo, hi], n in {2..16} via precomputed nodes.
double gauss_legendre(const std::function<double(double)>& f, double lo, double hi, int points = 8);

}  // namespace fluxreg
