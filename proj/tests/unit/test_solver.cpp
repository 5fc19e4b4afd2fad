#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fluxreg/error.hpp"
#include "fluxreg/estimates.hpp"
#include "fluxreg/rng.hpp"
#include "fluxreg/solver.hpp"

using namespace fluxreg;

namespace {

DomainPtr unit_square(double h) { return GridDomain::create(RectangleShape{}, h); }
DomainPtr unit_disk(double h) { return GridDomain::create(DiskShape{}, h); }

double max_nodal_error(const ScalarField& u, const std::function<double(double, double)>& exact) {
  double worst = 0.0;
  for (std::size_t i : u.domain().nodes()) worst = std::max(worst, std::abs(u[i] - exact(u.domain().x_of(i), u.domain().y_of(i))));
  return worst;
}

}  // namespace

TEST_CASE("zero load gives the zero solution") {
  const auto sf = make_structure(PowerLawSpec{3.0});
  for (auto bc : {BoundaryCondition::Dirichlet, BoundaryCondition::Neumann}) {
    const auto d = unit_disk(1.0 / 16);
    const auto s = solve(sf, d, ScalarField(d), bc);
    for (std::size_t i : d->nodes()) CHECK(s.u[i] == 0.0);
    CHECK(s.report.final_energy() == 0.0);
  }
}

TEST_CASE("manufactured Dirichlet Laplace solve converges at second order") {
  const auto sf = make_structure(ConstantSpec{1.0});
  std::vector<double> err;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    const auto d = unit_square(h);
    const auto f = ScalarField::from_function(
        d, [](double x, double y) { return 2 * M_PI * M_PI * std::sin(M_PI * x) * std::sin(M_PI * y); });
    const auto s = solve_dirichlet(sf, d, f);
    err.push_back(max_nodal_error(s.u, [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); }));
    CHECK(s.report.final_gradient() <= s.report.gradient_tolerance);
  }
  for (std::size_t k = 1; k < err.size(); ++k) CHECK(std::log2(err[k - 1] / err[k]) >= 1.8);
}

TEST_CASE("manufactured Neumann Laplace solve converges at second order") {
  const auto sf = make_structure(ConstantSpec{1.0});
  std::vector<double> err;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    const auto d = unit_square(h);
    const auto f = ScalarField::from_function(d, [](double x, double) { return std::cos(M_PI * x); });
    const auto s = solve_neumann(sf, d, f);
    err.push_back(max_nodal_error(s.u, [](double x, double) { return std::cos(M_PI * x) / (M_PI * M_PI); }));
  }
  for (std::size_t k = 1; k < err.size(); ++k) CHECK(std::log2(err[k - 1] / err[k]) >= 1.8);
}

TEST_CASE("disk flux is p-independent") {
  for (double p : {1.5, 3.0}) {
    const auto sf = make_structure(PowerLawSpec{p});
    const auto d = unit_disk(1.0 / 32);
    const auto s = solve_dirichlet(sf, d, ScalarField(d, 1.0));
    const auto V = flux(sf, s.u).V;
    double worst = 0.0;
    for (std::size_t i : d->nodes())
      worst = std::max(worst, std::hypot(V[i][0] + d->x_of(i) / 2, V[i][1] + d->y_of(i) / 2));
    CHECK(worst <= 0.05);
  }
}

TEST_CASE("Neumann residual decreases under refinement") {
  const auto sf = make_structure(PowerLawSpec{3.0});
  std::vector<double> residual;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    const auto d = unit_disk(h);
    const auto f = ScalarField::from_function(d, [](double x, double y) { return x * std::exp(-(x * x + y * y)); });
    const auto s = solve_neumann(sf, d, f);
    residual.push_back(s.report.residual_l2);
    double mean = 0.0;
    const auto w = load_weights(*d, BoundaryCondition::Neumann);
    for (std::size_t i : d->nodes()) mean += s.u[i] * w[i];
    CHECK(std::abs(mean) <= 1e-10);
  }
  CHECK(residual[1] < residual[0]);
  CHECK(residual[2] < residual[1]);
}

TEST_CASE("energy gradient matches finite differences of the energy") {
  for (auto bc : {BoundaryCondition::Dirichlet, BoundaryCondition::Neumann}) {
    for (const auto& sf : {make_structure(PowerLawSpec{3.0}), regularize(make_structure(PowerLawSpec{1.5}), 1e-2)}) {
      const auto d = unit_disk(0.125);
      Rng rng(5);
      ScalarField u(d), dir(d);
      const auto f = ScalarField::from_function(d, [](double x, double y) { return 1.0 + x * y; });
      for (std::size_t i : d->nodes()) {
        u[i] = rng.uniform(-1, 1);
        dir[i] = rng.uniform(-1, 1);
      }
      double mean = 0.0;
      for (std::size_t i : d->nodes()) mean += dir[i];
      mean /= static_cast<double>(d->nodes().size());
      for (std::size_t i : d->nodes()) dir[i] -= mean;
      const auto g = energy_gradient(sf, f, u, bc);
      ScalarField up(u), um(u);
      const double t = 1e-6;
      for (std::size_t i : d->nodes()) {
        up[i] += t * dir[i];
        um[i] -= t * dir[i];
      }
      const double fd = (discrete_energy(sf, f, up, bc) - discrete_energy(sf, f, um, bc)) / (2 * t);
      double analytic = 0.0;
      for (std::size_t i : d->nodes()) analytic += g[i] * dir[i];
      CHECK(analytic == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("energy decreases monotonically within every stage") {
  const auto sf = make_structure(PowerLawSpec{4.5});
  const auto d = GridDomain::create(RectangleShape{-1, 1, -1, 1}, 1.0 / 16);
  const auto s = solve_dirichlet(sf, d, ScalarField::from_function(d, [](double x, double) { return 1 + x / 2; }));
  CHECK(s.report.stages.size() == 4);
  for (const auto& st : s.report.stages)
    for (std::size_t k = 1; k < st.energy_history.size(); ++k) CHECK(st.energy_history[k] <= st.energy_history[k - 1]);
}

TEST_CASE("solver argument errors") {
  const auto sf = make_structure(PowerLawSpec{2.0});
  const auto d = unit_square(0.125);
  CHECK_THROWS_AS(solve_neumann(sf, d, ScalarField(d, 1.0)), Error);
  try {
    solve_dirichlet(sf, d, ScalarField(unit_square(0.125), 1.0));
    FAIL("expected DomainMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DomainMismatch);
  }
  SolveOptions bad;
  bad.epsilon_schedule = {1e-2, 1e-1};
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK(parse_boundary_condition("neumann") == BoundaryCondition::Neumann);
  CHECK_THROWS_AS(parse_boundary_condition("robin"), Error);
}

TEST_CASE("load weights and centring") {
  const auto d = unit_square(0.125);
  for (auto bc : {BoundaryCondition::Dirichlet, BoundaryCondition::Neumann}) {
    const auto w = load_weights(*d, bc);
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) > 0.0);
  }
  const auto wn = load_weights(*d, BoundaryCondition::Neumann);
  CHECK(std::accumulate(wn.begin(), wn.end(), 0.0) == doctest::Approx(1.0));
  const auto f = center_load(ScalarField::from_function(d, [](double x, double y) { return std::exp(x + y); }));
  double total = 0.0, scale = 0.0;
  for (std::size_t i : d->nodes()) {
    total += f[i] * wn[i];
    scale += std::abs(f[i]) * wn[i];
  }
  CHECK(std::abs(total) <= 1e-12 * scale);
}

TEST_CASE("Gaussian blur preserves constants and mass") {
  const auto d = unit_disk(1.0 / 16);
  const auto c = gaussian_blur(ScalarField(d, 2.5), 0.2);
  for (std::size_t i : d->nodes()) CHECK(c[i] == doctest::Approx(2.5));
  const auto f = ScalarField::from_function(d, [](double x, double) { return x > 0 ? 1.0 : 0.0; });
  const auto b = gaussian_blur(f, 1e-3);
  for (std::size_t i : d->nodes()) CHECK(b[i] == doctest::Approx(f[i]));
}

TEST_CASE("approximation sequence") {
  const auto sf = make_structure(PowerLawSpec{3.0});
  const auto d = unit_square(1.0 / 16);
  const auto smooth = ScalarField::from_function(d, [](double x, double y) { return std::sin(M_PI * x) + y; });
  const auto seq = approximation_sequence(sf, d, smooth, 9, BoundaryCondition::Dirichlet);
  REQUIRE(seq.size() == 10);
  CHECK(seq.back().u_gap == 0.0);
  CHECK(seq[8].sigma <= d->spacing() / 8);
  CHECK(seq[8].u_gap <= 1e-8);
  CHECK(seq[8].flux_gap <= 1e-8);

  const auto rough = ScalarField::from_function(d, [](double x, double) { return x < 0.5 ? 1.0 : 0.0; });
  const auto r = approximation_sequence(sf, d, rough, 5, BoundaryCondition::Dirichlet);
  for (std::size_t k = 2; k + 1 < r.size(); ++k) CHECK(r[k].flux_gap <= r[k - 1].flux_gap);
  const auto n = approximation_sequence(sf, d, rough, 3, BoundaryCondition::Neumann);
  for (const auto& step : n) CHECK(step.f_l1 > 0.0);
}
