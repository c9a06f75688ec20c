#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <numbers>
#include <sstream>

#include "support.hpp"
#include "trifem/analysis.hpp"

using namespace trifem;
using namespace trifem::test;
using std::numbers::pi;

TEST_CASE("rates") {
  const std::vector<double> r = rate({1.0, 0.5, 0.125});
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] == doctest::Approx(2.0));
  CHECK(rate({3.0}).empty());
  CHECK(rate_triples({0.4, 0.2})[0] == doctest::Approx(1.0));
  CHECK_THROWS_AS(rate({1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(rate({-1.0, 0.5}), std::invalid_argument);
}

TEST_CASE("expected rates") {
  CHECK(expected_rate(pi / 3).gamma == 1.0);
  CHECK(expected_rate(pi / 3).N == 0);
  const ExpectedRate e = expected_rate(2 * pi / 3);
  CHECK(e.N == 1);
  CHECK(e.beta[0] == doctest::Approx(-0.5));
  CHECK(e.gamma == 1.0);
  CHECK(expected_rate(7 * pi / 6).gamma == doctest::Approx(4.0 / 7.0));
  CHECK(expected_rate(1.25 * pi).gamma == doctest::Approx(0.8));
  CHECK(expected_rate(1.589 * pi).beta.size() == 3);
}

TEST_CASE("H1 error against a linear field is zero") {
  const MeshPtr mesh = refined(triangulate_initial(big_triangle(), 16.0), 2);
  const CornerFrame f = corner_frame(*mesh, 0);
  const RadialField y(f, 1.0, 1.0, {RadialPiece{0.0, std::numeric_limits<double>::infinity(), 0, {1.0}}});
  const H1Error e = h1_error_vs_field(interpolate(mesh, y), y);
  CHECK(e.norm < 1e-10);
  CHECK(e.seminorm < 1e-10);
}

TEST_CASE("H1 norm of the wrong solution against a polar oracle") {
  const MeshPtr mesh = refined(triangulate_initial(big_triangle(), 16.0), 3);
  const CornerFrame f = corner_frame(*mesh, 0);
  const CutoffSpec tilde = eta_tilde_coeffs();
  const double a = pi / f.omega;
  const H1Error e = h1_error_vs_field(P1Function::zero(mesh), wrong_solution(f, tilde));

  // |grad u|^2 integrates sin^2 and cos^2 over (0, omega), each giving omega / 2.
  auto semi_density = [&](double r) {
    const double eta = tilde.derivative(r, 0);
    const double deta = tilde.derivative(r, 1);
    const double ur = deta * std::pow(r, a) + a * eta * std::pow(r, a - 1);
    const double ut = a * eta * std::pow(r, a - 1);
    return (ur * ur + ut * ut) * r;
  };
  auto l2_density = [&](double r) {
    const double eta = tilde.derivative(r, 0);
    return eta * eta * std::pow(r, 2 * a) * r;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double split = tilde.tau * tilde.R;
  const double semi = 0.5 * f.omega * (GK::integrate(semi_density, 0.0, split) + GK::integrate(semi_density, split, tilde.R));
  const double l2 = 0.5 * f.omega * (GK::integrate(l2_density, 0.0, split) + GK::integrate(l2_density, split, tilde.R));
  CHECK(rel_diff(e.seminorm, std::sqrt(semi)) < 1e-6);
  CHECK(rel_diff(e.norm, std::sqrt(semi + l2)) < 1e-6);
}

TEST_CASE("level differences") {
  const MeshPtr coarse = triangulate_initial(big_triangle(), 8.0);
  const MeshPtr fine = refine_uniform(coarse);
  const P1Function g = random_h10(coarse, 4);
  const H1Error same = h1_error_between_levels(g, prolongate(g, fine));
  CHECK(same.norm == 0.0);
  const PoissonSolver solver(fine);
  const P1Function h = random_h10(fine, 8);
  const H1Error a = h1_error_between_levels(g, h);
  const H1Error b = h1_error_between_levels(g, h, solver);
  CHECK(rel_diff(a.norm, b.norm) < 1e-12);
  CHECK(a.seminorm < a.norm);
  CHECK_THROWS_AS(h1_error_between_levels(g, h, PoissonSolver(coarse)), std::invalid_argument);
}

TEST_CASE("manufactured Poisson problem converges at the optimal rates") {
  std::vector<double> semi, l2;
  for (int level = 3; level <= 5; ++level) {
    const ManufacturedErrors e = manufactured_poisson(level);
    semi.push_back(e.h1_semi);
    l2.push_back(e.l2);
  }
  for (double r : rate(semi)) {
    CHECK(r > 0.9);
    CHECK(r < 1.1);
  }
  for (double r : rate(l2)) {
    CHECK(r > 1.8);
    CHECK(r < 2.2);
  }
}

TEST_CASE("presets") {
  const std::vector<std::string> names = preset_names();
  CHECK(names.size() == 10);
  for (const auto& n : names) {
    const Preset p = make_preset(n);
    CHECK(p.name == n);
    CHECK(p.polygon.validate().size() <= 1);
    CHECK(p.min_level <= p.max_level);
  }
  CHECK(count_N(corner_frame(make_preset("example1.case1").polygon).omega) == 1);
  CHECK(count_N(corner_frame(make_preset("example1.case2").polygon).omega) == 2);
  CHECK(count_N(corner_frame(make_preset("example1.case3").polygon).omega) == 3);
  CHECK(count_N(corner_frame(make_preset("example2.case1").polygon).omega) == 0);
  CHECK_THROWS_AS(make_preset("nope"), std::invalid_argument);
  CHECK_THROWS_AS(make_preset("example3.case1", {.x0 = 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_preset("example3.case2", {.y0 = 0.0}), std::invalid_argument);
}

TEST_CASE("study table and CSV") {
  Preset p = make_preset("example2.case1");
  p.min_level = 1;
  p.max_level = 3;
  const RateTable t = run_study(p);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.N == 0);
  CHECK_FALSE(t.rows[0].rate_direct.has_value());
  CHECK(t.rows[1].rate_direct.has_value());
  CHECK(*t.rows[2].err_direct == doctest::Approx(*t.rows[2].err_modified).epsilon(1e-14));
  CHECK(*t.rows[2].err_direct < *t.rows[1].err_direct);
  CHECK(t.rows[1].h == doctest::Approx(t.rows[0].h / 2));

  std::ostringstream csv;
  write_csv(csv, t);
  std::istringstream lines(csv.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "level,h,err_direct,err_modified,rate_direct,rate_modified,expected_rate");
  CHECK(first.find(",,,1") != std::string::npos);

  Preset direct_only = p;
  direct_only.run_modified = false;
  const RateTable d = run_study(direct_only);
  CHECK_FALSE(d.rows[0].err_modified.has_value());

  Preset empty = p;
  empty.min_level = 3;
  empty.max_level = 2;
  CHECK(run_study(empty).rows.empty());
}
