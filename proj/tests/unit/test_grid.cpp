#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fluxreg/error.hpp"
#include "fluxreg/grid.hpp"
#include "fluxreg/rng.hpp"

using namespace fluxreg;

namespace {

DomainPtr unit_square(double h) { return GridDomain::create(RectangleShape{}, h); }
DomainPtr unit_disk(double h) { return GridDomain::create(DiskShape{}, h); }

double max_error(const ScalarField& a, const std::function<double(double, double)>& exact, bool interior_only) {
  const auto& d = a.domain();
  double worst = 0.0;
  for (std::size_t i : d.nodes())
    if (!interior_only || d.kind(i) == NodeKind::Interior)
      worst = std::max(worst, std::abs(a[i] - exact(d.x_of(i), d.y_of(i))));
  return worst;
}

}  // namespace

TEST_CASE("node classification") {
  for (const auto& d : {unit_square(0.125), unit_disk(0.1), GridDomain::create(AnnulusShape{}, 0.05)}) {
    for (std::size_t i = 0; i < d->size(); ++i) {
      const int ix = static_cast<int>(i % d->nx()), iy = static_cast<int>(i / d->nx());
      if (d->kind(i) == NodeKind::Exterior) continue;
      const bool all = d->in_domain(ix - 1, iy) && d->in_domain(ix + 1, iy) && d->in_domain(ix, iy - 1) &&
                       d->in_domain(ix, iy + 1);
      CHECK((d->kind(i) == NodeKind::Interior) == all);
    }
    for (int ix = 0; ix < d->nx(); ++ix) {
      CHECK_FALSE(d->in_domain(ix, 0));
      CHECK_FALSE(d->in_domain(ix, d->ny() - 1));
    }
  }
  const auto disk = unit_disk(0.05);
  for (std::size_t i : disk->nodes()) {
    const double r = std::hypot(disk->x_of(i), disk->y_of(i));
    CHECK(r <= 1.0);
    if (disk->kind(i) == NodeKind::Boundary) {
      CHECK(r >= 1.0 - 0.05);
      const auto n = disk->normal(i);
      CHECK(n[0] * disk->x_of(i) / r + n[1] * disk->y_of(i) / r == doctest::Approx(1.0));
    }
  }
  const auto sq = unit_square(0.25);
  CHECK(sq->nodes().size() == 25);
  CHECK(sq->interior_count() == 9);
  CHECK(sq->convex());
  CHECK(unit_disk(0.1)->convex());
  CHECK_FALSE(GridDomain::create(AnnulusShape{}, 0.05)->convex());
  CHECK(GridDomain::create(AnnulusShape{}, 0.05, true)->convex());
  const auto corner = sq->locate(1.0, 0.0);
  REQUIRE(corner);
  const auto n = sq->normal(*corner);
  CHECK(n[0] == doctest::Approx(M_SQRT1_2));
  CHECK(n[1] == doctest::Approx(-M_SQRT1_2));
  CHECK(sq->weight(*sq->locate(0.5, 0.5)) == 0.0625);
  CHECK(sq->weight(*sq->locate(0.5, 0.0)) == 0.03125);
}

TEST_CASE("domain parsing") {
  const auto d = GridDomain::parse("rect:xmin=-1,xmax=1,ymin=0,ymax=1,h=0.25");
  CHECK(d->nodes().size() == 9 * 5);
  CHECK(GridDomain::parse("disk:r=1,h=0.125")->describe() == "disk:r=1,h=0.125");
  CHECK_THROWS_AS(GridDomain::parse("rect:xmin=0,xmax=1,ymin=0,ymax=1,h=0.3"), Error);
  CHECK_THROWS_AS(GridDomain::parse("hexagon:h=0.1"), Error);
  CHECK_THROWS_AS(GridDomain::parse("disk:r=1"), Error);

  const auto path = std::filesystem::temp_directory_path() / "fluxreg_mask_test.txt";
  {
    std::ofstream out(path);
    out << "# L shape\n100\n110\n111\n";
  }
  const auto m = GridDomain::parse("mask:file=" + path.string() + ",h=0.5");
  CHECK(m->nodes().size() == 6);
  CHECK(m->locate(0.0, 1.0).has_value());
  CHECK(m->in_domain(*m->locate(0.0, 1.0)));
  CHECK_FALSE(m->in_domain(*m->locate(1.0, 1.0)));
  std::filesystem::remove(path);
}

TEST_CASE("field access") {
  const auto d = unit_square(0.25);
  const auto u = ScalarField::from_function(d, [](double x, double y) { return x + 10 * y; });
  CHECK(u.at(2, 1) == doctest::Approx(0.25 + 0.0));
  CHECK_THROWS_AS(u.at(0, 0), Error);
  CHECK(u[0] == 0.0);
}

TEST_CASE("gradient of polynomials") {
  const auto d = unit_square(0.1);
  const auto gx = gradient(ScalarField::from_function(d, [](double x, double) { return x; }));
  const auto gq = gradient(ScalarField::from_function(d, [](double x, double y) { return x * x + y * y; }));
  const auto gc = gradient(ScalarField(d, 3.0));
  for (std::size_t i : d->nodes()) {
    CHECK(gx[i][0] == doctest::Approx(1.0));
    CHECK(std::abs(gx[i][1]) <= 1e-12);
    CHECK(gq[i][0] == doctest::Approx(2 * d->x_of(i)));
    CHECK(gq[i][1] == doctest::Approx(2 * d->y_of(i)));
    CHECK(gc[i][0] == 0.0);
    CHECK(gc[i][1] == 0.0);
  }
}

TEST_CASE("gradient converges at second order") {
  std::vector<double> err;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    const auto d = unit_square(h);
    const auto g = gradient(ScalarField::from_function(d, [](double x, double) { return std::sin(M_PI * x); }));
    ScalarField gx(d);
    for (std::size_t i : d->nodes()) gx[i] = g[i][0];
    err.push_back(max_error(gx, [](double x, double) { return M_PI * std::cos(M_PI * x); }, false));
  }
  for (std::size_t k = 1; k < err.size(); ++k) CHECK(std::log2(err[k - 1] / err[k]) >= 1.8);
}

TEST_CASE("divergence") {
  const auto d = unit_disk(0.05);
  const auto V = VectorField::from_function(d, [](double x, double y) { return std::array<double, 2>{x, y}; });
  const auto W = VectorField::from_function(d, [](double x, double y) { return std::array<double, 2>{-x / 2, -y / 2}; });
  const auto C = VectorField::from_function(d, [](double, double) { return std::array<double, 2>{1.5, -2.0}; });
  const auto dv = divergence(V), dw = divergence(W), dc = divergence(C);
  for (std::size_t i : d->nodes()) {
    CHECK(dv[i] == doctest::Approx(2.0));
    CHECK(dw[i] == doctest::Approx(-1.0));
    CHECK(dc[i] == 0.0);
  }
}

TEST_CASE("summation by parts gap is first order") {
  std::vector<double> gaps;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    const auto d = unit_square(h);
    const auto u = ScalarField::from_function(d, [](double x, double y) { return std::sin(x) + y; });
    const auto V = VectorField::from_function(d, [](double x, double y) { return std::array<double, 2>{x * y, y * y / 2 + x}; });
    const auto du = gradient(u);
    const auto dv = divergence(V);
    ScalarField integrand(d);
    for (std::size_t i : d->nodes()) integrand[i] = u[i] * dv[i] + du[i][0] * V[i][0] + du[i][1] * V[i][1];
    // Boundary integral of u V.n: x = 1 gives int (sin 1 + y) y, y = 1 gives int (sin x + 1)(1/2 + x),
    // y = 0 gives -int x sin x, x = 0 gives nothing.
    const double s1 = std::sin(1.0), c1 = std::cos(1.0);
    const double exact = (s1 / 2 + 1.0 / 3) + ((1 - c1) / 2 + (s1 - c1) + 1.0) - (s1 - c1);
    gaps.push_back(std::abs(integrate(integrand) - exact));
  }
  CHECK(gaps[1] < gaps[0]);
  CHECK(gaps[2] < gaps[1]);
  CHECK(gaps[2] <= 0.05);
}

TEST_CASE("truncation") {
  const auto d = GridDomain::create(RectangleShape{-1, 1, -1, 1}, 0.1);
  const auto u = ScalarField::from_function(d, [](double x, double) { return x; });
  const auto same = truncate(u, 2.0);
  const auto ramp = truncate(u, 0.5);
  for (std::size_t i : d->nodes()) {
    CHECK(same[i] == u[i]);
    CHECK(ramp[i] == std::clamp(u[i], -0.5, 0.5));
  }
  Rng rng(3);
  ScalarField r(d);
  for (std::size_t i : d->nodes()) r[i] = rng.uniform(-3, 3);
  const auto ts = truncate(truncate(r, 1.2), 0.7), tm = truncate(r, 0.7);
  const auto twice = truncate(tm, 0.7);
  for (std::size_t i : d->nodes()) {
    CHECK(ts[i] == tm[i]);
    CHECK(twice[i] == tm[i]);
    CHECK(std::abs(tm[i]) <= 0.7);
  }
  CHECK_THROWS_AS(truncate(u, 0.0), Error);
}

TEST_CASE("integrals and norms") {
  for (double h : {0.1, 0.05}) {
    const auto d = unit_square(h);
    CHECK(std::abs(integrate(ScalarField(d, 1.0)) - 1.0) <= 2 * h);
    CHECK(std::abs(norm_l1(ScalarField(d, -1.0)) - 1.0) <= 2 * h);
  }
  std::vector<double> gaps;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const auto d = unit_disk(h);
    const auto f = ScalarField::from_function(d, [](double x, double y) { return std::hypot(x, y); });
    gaps.push_back(std::abs(norm_l2(f) - std::sqrt(M_PI / 2)));
  }
  CHECK(gaps[2] <= 0.02);
  CHECK(gaps[2] < gaps[0]);
}

TEST_CASE("W12 norm of the disk flux") {
  const double exact = std::sqrt(M_PI / 8 + M_PI / 2);
  std::vector<double> gaps;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const auto d = unit_disk(h);
    const auto V = VectorField::from_function(d, [](double x, double y) { return std::array<double, 2>{-x / 2, -y / 2}; });
    gaps.push_back(std::abs(norm_w12(V) - exact));
  }
  CHECK(gaps[2] / exact <= 0.03);
  CHECK(gaps[2] < gaps[0]);

  const auto d = unit_square(0.05);
  const auto C = VectorField::from_function(d, [](double, double) { return std::array<double, 2>{1.0, 2.0}; });
  CHECK(norm_w12(C) == doctest::Approx(norm_l2(C)));
  CHECK(norm_gradient_l2(C) == 0.0);
}

TEST_CASE("norm filters restrict the region") {
  const auto d = GridDomain::create(RectangleShape{-1, 1, -1, 1}, 0.05);
  const ScalarField one(d, 1.0);
  const double quarter = norm_l1(one, [](double x, double y) { return x > 0 && y > 0; });
  CHECK(quarter == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("Hessian norm of a quadratic") {
  const auto d = unit_square(1.0 / 32);
  const auto u = ScalarField::from_function(d, [](double x, double y) { return x * x + x * y; });
  // |D^2 u|^2 = 4 + 2 on the interior.
  const double interior_area = std::pow(1.0 - 2.0 / 32, 2);
  CHECK(norm_hessian_l2(u) == doctest::Approx(std::sqrt(6.0 * interior_area)).epsilon(0.05));
}

TEST_CASE("CSV round trip") {
  const auto d = unit_disk(0.1);
  const auto f = ScalarField::from_function(d, [](double x, double y) { return std::exp(x) * std::cos(3 * y) / 7; });
  const auto path = std::filesystem::temp_directory_path() / "fluxreg_grid_csv_test.csv";
  write_csv(path.string(), f, "# seed=1 version=test");
  const auto g = read_scalar_csv(d, path.string());
  for (std::size_t i : d->nodes()) CHECK(g[i] == f[i]);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x,y,value");
  std::filesystem::remove(path);
}
