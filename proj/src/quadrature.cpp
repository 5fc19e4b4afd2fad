#include "fluxreg/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "fluxreg/error.hpp"

namespace fluxreg {

namespace {

struct Panel {
  double lo, hi, f_lo, f_mid, f_hi, whole, tol;
};

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        const QuadratureRule& rule) {
  if (hi == lo) return 0.0;
  const double mid = 0.5 * (lo + hi);
  const double f_lo = f(lo), f_mid = f(mid), f_hi = f(hi);
  const double whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);

  // A coarse composite pass sets the absolute target from the integral scale.
  double scale = 0.0;
  {
    constexpr int kCoarse = 64;
    const double step = (hi - lo) / kCoarse;
    for (int i = 0; i < kCoarse; ++i) scale += std::abs(f(lo + (i + 0.5) * step)) * step;
    scale = std::max(scale, std::abs(whole));
  }
  const double abs_tol = rule.rel_tol * std::max(scale, 1e-300);

  std::vector<Panel> stack{{lo, hi, f_lo, f_mid, f_hi, whole, abs_tol}};
  std::size_t splits = 0;
  double total = 0.0;
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const double m = 0.5 * (p.lo + p.hi);
    const double lm = 0.5 * (p.lo + m), rm = 0.5 * (m + p.hi);
    const double f_lm = f(lm), f_rm = f(rm);
    const double left = (m - p.lo) / 6.0 * (p.f_lo + 4.0 * f_lm + p.f_mid);
    const double right = (p.hi - m) / 6.0 * (p.f_mid + 4.0 * f_rm + p.f_hi);
    const double delta = left + right - p.whole;
    if (std::abs(delta) <= 15.0 * p.tol || (p.hi - p.lo) < 1e-14 * std::abs(hi - lo)) {
      total += left + right + delta / 15.0;
      continue;
    }
    if (++splits > rule.max_subdivisions)
      throw Error(ErrorCode::QuadratureFailure, "adaptive Simpson exceeded subdivision budget");
    stack.push_back({p.lo, m, p.f_lo, f_lm, p.f_mid, left, 0.5 * p.tol});
    stack.push_back({m, p.hi, p.f_mid, f_rm, p.f_hi, right, 0.5 * p.tol});
  }
  return total;
}

double gauss_legendre(const std::function<double(double)>& f, double lo, double hi, int points) {
  if (points < 2 || points > 16)
    throw Error(ErrorCode::InvalidArgument, "gauss_legendre supports 2..16 points");
  // Nodes by Newton iteration on P_n; cached per n.
  struct Rule {
    std::vector<double> x, w;
  };
  static const auto rules = [] {
    std::vector<Rule> out(17);
    for (int n = 2; n <= 16; ++n) {
      Rule r;
      for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
          double p0 = 1.0, p1 = z;
          for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
          }
          dp = n * (z * p1 - p0) / (z * z - 1.0);
          const double dz = p1 / dp;
          z -= dz;
          if (std::abs(dz) < 1e-16) break;
        }
        r.x.push_back(z);
        r.w.push_back(2.0 / ((1.0 - z * z) * dp * dp));
      }
      out[n] = std::move(r);
    }
    return out;
  }();
  const Rule& r = rules[points];
  const double half = 0.5 * (hi - lo), centre = 0.5 * (hi + lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) sum += r.w[i] * f(centre + half * r.x[i]);
  return sum * half;
}

}  // namespace fluxreg
