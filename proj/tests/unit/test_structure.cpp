#include <doctest.h>

#include <cmath>
#include <vector>

#include "fluxreg/error.hpp"
#include "fluxreg/quadrature.hpp"
#include "fluxreg/rng.hpp"
#include "fluxreg/structure.hpp"

using namespace fluxreg;

namespace {

StructureFunction custom_structure() {
  return make_structure(CustomSpec{[](double t) { return std::sqrt(t) * std::pow(1.0 + t, 0.25); }, {}, "custom"});
}

double trapezoid(const std::function<double(double)>& f, double lo, double hi, long panels) {
  const double h = (hi - lo) / panels;
  double sum = 0.5 * (f(lo) + f(hi));
  for (long k = 1; k < panels; ++k) sum += f(lo + k * h);
  return sum * h;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> t(n);
  for (int k = 0; k < n; ++k) t[k] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (n - 1));
  return t;
}

}  // namespace

TEST_CASE("power law indices are exact") {
  const auto sf = make_structure(PowerLawSpec{3.0});
  CHECK(sf.lower_index() == 1.0);
  CHECK(sf.upper_index() == 1.0);
  CHECK(sf.certainty() == IndexCertainty::Exact);
  CHECK(sf.describe() == "powerlaw:p=3");
}

TEST_CASE("constant structure has zero indices") {
  const auto sf = make_structure(ConstantSpec{1.0});
  CHECK(sf.lower_index() == 0.0);
  CHECK(sf.upper_index() == 0.0);
}

TEST_CASE("custom structure indices from the scan") {
  const auto sf = custom_structure();
  CHECK(sf.certainty() == IndexCertainty::NumericOnGrid);
  CHECK(sf.lower_index() == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(sf.upper_index() == doctest::Approx(0.75).epsilon(1e-5));
}

TEST_CASE("invalid structures are rejected") {
  CHECK_THROWS_AS(make_structure(PowerLawSpec{1.0}), Error);
  CHECK_THROWS_AS(make_structure(ConstantSpec{0.0}), Error);
  try {
    make_structure(CustomSpec{[](double t) { return 1.0 / (t * t); }, {}, "bad"});
    FAIL("expected IndexOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndexOutOfRange);
  }
}

TEST_CASE("b(t) = a(t) t") {
  CHECK(make_structure(PowerLawSpec{3.0}).b(2.0) == doctest::Approx(4.0));
  CHECK(make_structure(ConstantSpec{5.0}).b(3.0) == doctest::Approx(15.0));
  CHECK(make_structure(PowerLawSpec{1.5}).b(0.0) == 0.0);
  CHECK(custom_structure().b(0.0) == 0.0);
}

TEST_CASE("energy density") {
  CHECK(EnergyDensity(make_structure(PowerLawSpec{2.0}))(1.0) == doctest::Approx(0.5));
  CHECK(EnergyDensity(make_structure(PowerLawSpec{3.0}))(2.0) == doctest::Approx(8.0 / 3.0));
  const auto sf = custom_structure();
  const EnergyDensity B(sf);
  const double oracle = trapezoid([&](double s) { return sf.b(s); }, 0.0, 1.0, 1000000);
  CHECK(std::abs(B(1.0) - oracle) <= 1e-8);
  CHECK_THROWS_AS(B(-1.0), Error);
}

TEST_CASE("ellipticity a(t) t^2 >= B(t)") {
  for (const auto& sf : {make_structure(PowerLawSpec{1.5}), make_structure(PowerLawSpec{4.0}), custom_structure(),
                         regularize(make_structure(PowerLawSpec{3.0}), 1e-2)}) {
    const EnergyDensity B(sf);
    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
      const double t = rng.uniform(0.0, 10.0);
      const double lhs = sf.a(t) * t * t;
      CHECK(lhs >= B(t) - 1e-12 * lhs);
    }
  }
}

TEST_CASE("monotonicity") {
  const double e1[] = {1.0, 0.0}, e2[] = {0.0, 1.0}, m1[] = {-1.0, 0.0};
  CHECK(check_monotonicity(make_structure(PowerLawSpec{2.0}), e1, e2) == doctest::Approx(2.0));
  CHECK(check_monotonicity(make_structure(PowerLawSpec{4.0}), e1, m1) == doctest::Approx(4.0));
  CHECK_THROWS_AS(check_monotonicity(make_structure(PowerLawSpec{2.0}), e1, e1), Error);

  for (const auto& sf : {make_structure(PowerLawSpec{1.5}), make_structure(PowerLawSpec{3.0}), custom_structure(),
                         regularize(make_structure(PowerLawSpec{1.5}), 1e-2)}) {
    Rng rng(11);
    double worst = 1.0;
    for (int k = 0; k < 20000; ++k) {
      double xi[2], eta[2];
      for (double& v : xi) v = rng.uniform(-7.0, 7.0);
      for (double& v : eta) v = rng.uniform(-7.0, 7.0);
      worst = std::min(worst, check_monotonicity(sf, xi, eta) > 0.0 ? 1.0 : 0.0);
    }
    CHECK(worst == 1.0);
  }
}

TEST_CASE("index sandwich on the scan grid") {
  for (const auto& sf : {make_structure(PowerLawSpec{1.5}), custom_structure()}) {
    const double a1 = sf.a(1.0);
    for (double t : log_grid(1e-6, 1e6, 512)) {
      const double lo = a1 * std::min(std::pow(t, sf.lower_index()), std::pow(t, sf.upper_index()));
      const double hi = a1 * std::max(std::pow(t, sf.lower_index()), std::pow(t, sf.upper_index()));
      CHECK(sf.a(t) >= lo * (1 - 1e-9));
      CHECK(sf.a(t) <= hi * (1 + 1e-9));
    }
  }
}

TEST_CASE("regularization is the identity when the clamps are inactive") {
  const auto sf = make_structure(PowerLawSpec{2.0});
  for (double eps : {0.5, 0.1, 1e-3}) {
    const auto r = regularize(sf, eps);
    for (double t : {0.0, 1e-3, 0.5, 1.0, 7.0, 1e4}) CHECK(r.a(t) == 1.0);
  }
}

TEST_CASE("regularization activates the lower clamp at the origin") {
  const auto r = regularize(make_structure(PowerLawSpec{3.0}), 0.1);
  CHECK(r.a(0.0) == doctest::Approx(0.1).epsilon(3e-3));
  CHECK(r.kind() == StructureKind::Regularized);
  CHECK(r.epsilon() == 0.1);
  CHECK_THROWS_AS(regularize(r, 1.5), Error);
}

TEST_CASE("regularized family: clamp bounds and index window") {
  for (double p : {1.5, 3.0}) {
    const auto sf = make_structure(PowerLawSpec{p});
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      const auto r = regularize(sf, eps);
      bool bounded = true;
      for (double t : log_grid(1e-6, 1e6, 4096)) bounded = bounded && r.a(t) >= eps && r.a(t) <= 1.0 / eps;
      CHECK(bounded);
      CHECK(r.lower_index() >= std::min(sf.lower_index(), 0.0) - 1e-3);
      CHECK(r.upper_index() <= std::max(sf.upper_index(), 0.0) + 1e-3);
    }
  }
}

TEST_CASE("regularized flux converges uniformly on bounded sets") {
  const auto sf = make_structure(PowerLawSpec{1.5});
  double previous = INFINITY;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const auto r = regularize(sf, eps);
    double gap = 0.0;
    for (int k = 0; k <= 100000; ++k) {
      const double t = 10.0 * k / 100000;
      gap = std::max(gap, std::abs(r.b(t) - sf.b(t)));
    }
    CHECK(gap < previous);
    previous = gap;
  }
}

TEST_CASE("parse_structure") {
  CHECK(parse_structure("powerlaw:p=3.0").exponent() == 3.0);
  CHECK(parse_structure("constant:c=2").a(5.0) == 2.0);
  CHECK_THROWS_AS(parse_structure("powerlaw:q=3"), Error);
  CHECK_THROWS_AS(parse_structure("cubic:p=3"), Error);
}

TEST_CASE("quadrature rules") {
  CHECK(adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0) == doctest::Approx(std::exp(1.0) - 1.0));
  CHECK(gauss_legendre([](double x) { return std::pow(x, 7); }, 0.0, 2.0, 4) == doctest::Approx(32.0));
  QuadratureRule tight;
  tight.max_subdivisions = 4;
  tight.rel_tol = 1e-14;
  CHECK_THROWS_AS(adaptive_simpson([](double x) { return std::sqrt(x); }, 0.0, 1.0, tight), Error);
}

TEST_CASE("seeded streams are reproducible and task-split") {
  Rng a(5), b(5);
  CHECK(a.bits() == b.bits());
  auto t0 = Rng::for_task(5, 0), t0b = Rng::for_task(5, 0), t1 = Rng::for_task(5, 1);
  const auto v0 = t0.bits();
  CHECK(v0 == t0b.bits());
  CHECK(v0 != t1.bits());
  double eta[4];
  a.simplex_point(eta);
  double sum = 0.0;
  for (double v : eta) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0));
}
