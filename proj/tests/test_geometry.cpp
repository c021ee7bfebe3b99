#include <doctest.h>

#include <cmath>
#include <random>

#include "narrowgap/geometry.hpp"

using namespace narrowgap;

namespace {

SceneParams canonical_flat() {
  SceneParams p;
  p.profile = {0.5, 1.0, 2, 1.0, 1.0};
  p.epsilon = 1e-2;
  p.closure_height = 1.0;
  p.outer_radius = 4.0;
  return p;
}

SceneParams canonical_strict() {
  SceneParams p = canonical_flat();
  p.profile.flat_halfwidth = 0.0;
  p.profile.coeff_upper = 0.5;
  p.profile.coeff_lower = 0.5;
  return p;
}

}  // namespace

TEST_CASE("profile heights on and off the flat set") {
  GapProfile p{0.5, 1.0, 2, 1.0, 1.0};
  CHECK(p.h1(0.3) == doctest::Approx(0.0));
  CHECK(p.h2(0.3) == doctest::Approx(0.0));
  CHECK(p.h1(0.7) == doctest::Approx(0.04));
  CHECK(p.h2(0.7) == doctest::Approx(-0.04));

  GapProfile q{0.0, 1.0, 4, 2.0, 1.0};
  CHECK(q.h1(0.1) == doctest::Approx(2e-4));
  CHECK(q.h2(0.1) == doctest::Approx(-1e-4));

  CHECK_THROWS_AS(p.h1(1.5), GeometryError);
}

TEST_CASE("distance to the flat set") {
  GapProfile p{0.5, 1.0, 2, 1.0, 1.0};
  CHECK(p.dist_to_sigma(0.2) == doctest::Approx(0.0));
  CHECK(p.dist_to_sigma(-0.8) == doctest::Approx(0.3));
  GapProfile q{0.0, 1.0, 2, 1.0, 1.0};
  CHECK(q.dist_to_sigma(0.8) == doctest::Approx(0.8));
}

TEST_CASE("distance to the flat set is 1-Lipschitz and vanishes exactly on it") {
  GapProfile p{0.5, 1.0, 2, 1.0, 1.0};
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const double a = u(rng), b = u(rng);
    CHECK(std::abs(p.dist_to_sigma(a) - p.dist_to_sigma(b)) <= std::abs(a - b) + 1e-15);
  }
  for (double x = -0.5; x <= 0.5; x += 0.01) CHECK(p.dist_to_sigma(x) == 0.0);
  CHECK(p.dist_to_sigma(0.5 + 1e-12) > 0.0);
}

TEST_CASE("gap thickness") {
  Scene s = Scene::build(canonical_flat());
  CHECK(s.gap_thickness(0.1) == doctest::Approx(0.01));
  CHECK(s.gap_thickness(0.7) == doctest::Approx(0.09));

  SceneParams strict = canonical_strict();
  Scene s2 = Scene::build(strict);
  CHECK(s2.gap_thickness(0.0) == doctest::Approx(0.01));

  // delta >= eps with equality exactly on the flat set
  for (double x = -1.0; x <= 1.0; x += 1e-3) {
    const double d = s.gap_thickness(x);
    CHECK(d >= s.epsilon() - 1e-15);
    if (std::abs(x) <= 0.5)
      CHECK(d == doctest::Approx(s.epsilon()));
    else if (s.dist_to_sigma(x) > 1e-6)
      CHECK(d > s.epsilon());
  }

  // envelope: delta within [eps + lam0*d^m, eps + lam1*d^m], equal here
  const double lam = s.profile().curvature_low();
  for (double x = -1.0; x <= 1.0; x += 1e-3) {
    const double d = s.dist_to_sigma(x);
    CHECK(s.gap_thickness(x) ==
          doctest::Approx(s.epsilon() + lam * std::pow(d, 2)).epsilon(1e-12));
  }
}

TEST_CASE("scene construction: convex closures and exact minimum separation") {
  SceneParams p = canonical_flat();
  Scene s = Scene::build(p);

  const Polyline& d1 = s.inclusion_top();
  const Polyline& d2 = s.inclusion_bottom();
  CHECK(d1.signed_area() > 0.0);
  CHECK(d2.signed_area() > 0.0);
  CHECK(d1.is_convex(1e-9));
  CHECK(d2.is_convex(1e-9));

  // vertical separation at matched gap columns equals delta exactly
  const double sep = d1.min_distance_to(d2);
  CHECK(sep == doctest::Approx(p.epsilon).epsilon(1e-8));

  // gap curves match the profile to vertex tolerance
  for (double x : s.gap_lateral_grid()) {
    CHECK(std::abs(s.top_curve(x) - (p.epsilon + p.profile.h1_raw(x))) < 1e-12);
  }
}

TEST_CASE("scene construction: point contact set separates by exactly eps at x=0") {
  SceneParams p = canonical_strict();
  p.epsilon = 1e-3;
  Scene s = Scene::build(p);
  const double sep = s.inclusion_top().min_distance_to(s.inclusion_bottom());
  CHECK(sep == doctest::Approx(1e-3).epsilon(1e-6));
  // off the contact point the curves separate strictly
  CHECK(s.gap_thickness(0.1) > 1e-3);
}

TEST_CASE("scene construction: boundary mode gives one convex curve above the floor") {
  SceneParams p = canonical_flat();
  p.mode = SceneMode::InclusionVsBoundary;
  p.outer_radius = 4.0;
  Scene s = Scene::build(p);
  CHECK(s.inclusion_top().is_convex(1e-9));
  CHECK(!s.has_bottom_inclusion());
  CHECK_THROWS_AS(s.inclusion_bottom(), GeometryError);
  // inclusion sits above the floor section of the outer boundary
  for (double x : s.gap_lateral_grid())
    CHECK(s.top_curve(x) > s.bottom_curve(x));
}

TEST_CASE("scene construction rejects a closure height below the profile top") {
  SceneParams p = canonical_flat();
  p.closure_height = 0.03;  // below sup h1 + eps
  CHECK_THROWS_AS(Scene::build(p), GeometryError);
}

TEST_CASE("gap polyline spacing tracks the local thickness near the gap") {
  SceneParams p = canonical_strict();
  p.epsilon = 1e-3;
  Scene s = Scene::build(p);
  const auto& xi = s.gap_lateral_grid();
  // near the contact point the spacing is  lf * delta  up to the snap step
  for (std::size_t i = 0; i + 1 < xi.size(); ++i) {
    if (std::abs(xi[i]) < 0.05) {
      const double step = xi[i + 1] - xi[i];
      const double bound = p.lateral_factor * s.gap_thickness(xi[i]);
      CHECK(step <= 1.5 * bound);
    }
  }
  // grid is symmetric and pins the neck ends
  CHECK(xi.front() == doctest::Approx(-1.0));
  CHECK(xi.back() == doctest::Approx(1.0));
  for (std::size_t i = 0; i < xi.size(); ++i)
    CHECK(xi[i] == doctest::Approx(-xi[xi.size() - 1 - i]).epsilon(1e-12));
}

TEST_CASE("assumption validation on the canonical profile") {
  Scene s = Scene::build(canonical_flat());
  AssumptionReport rep = s.validate_assumptions();
  CHECK(rep.all_passed());
  // the hessian-floor check runs and uses kappa0 = 2(c1+c2)
  bool found = false;
  for (const auto& c : rep.checks)
    if (c.name == "hessian_floor") {
      found = true;
      CHECK(c.applicable);
      CHECK(c.passed);
      CHECK(c.worst == doctest::Approx(4.0).epsilon(1e-4));
    }
  CHECK(found);
}

TEST_CASE("assumption validation: quartic profile skips the hessian floor") {
  SceneParams p = canonical_flat();
  p.profile.growth_order = 4;
  Scene s = Scene::build(p);
  AssumptionReport rep = s.validate_assumptions();
  for (const auto& c : rep.checks)
    if (c.name == "hessian_floor") CHECK(!c.applicable);
  CHECK(rep.all_passed());
}

TEST_CASE("assumption validation: degenerate profile fails separation") {
  SceneParams p = canonical_flat();
  p.profile.coeff_upper = 0.0;
  p.profile.coeff_lower = 0.0;
  Scene s = Scene::build(p);
  AssumptionReport rep = s.validate_assumptions();
  CHECK(!rep.all_passed());
  for (const auto& c : rep.checks)
    if (c.name == "separation_off_sigma") CHECK(!c.passed);
}

TEST_CASE("coefficient field presets") {
  CoefficientField id = CoefficientField::identity();
  Matrix2 m = id.eval({0.3, 0.4});
  CHECK(m.a11 == 1.0);
  CHECK(m.a12 == 0.0);

  CoefficientField ra = CoefficientField::rotation_aniso(0.3, 4.0);
  Matrix2 a = ra.eval({0.0, 0.0});
  // symmetric, eigenvalues {4, 1}
  const double tr = a.a11 + a.a22;
  const double det = a.a11 * a.a22 - a.a12 * a.a12;
  CHECK(tr == doctest::Approx(5.0));
  CHECK(det == doctest::Approx(4.0));
  CHECK(ra.lambda_min() == doctest::Approx(1.0));
  CHECK(ra.lambda_max() == doctest::Approx(4.0));

  // ellipticity sampled with random unit vectors
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  for (int k = 0; k < 500; ++k) {
    const double th = u(rng);
    const double cx = std::cos(th), cy = std::sin(th);
    const double q = a.a11 * cx * cx + 2.0 * a.a12 * cx * cy + a.a22 * cy * cy;
    CHECK(q >= ra.lambda_min() - 1e-12);
    CHECK(q <= ra.lambda_max() + 1e-12);
  }
}

TEST_CASE("boundary data presets") {
  BoundaryData phi = BoundaryData::linear_xn();
  CHECK(phi.eval({2.0, 3.0}) == 3.0);
  CHECK(phi.grad({2.0, 3.0}).y == 1.0);
  BoundaryData c5 = BoundaryData::constant(5.0);
  CHECK(c5.eval({1.0, 1.0}) == 5.0);
  CHECK(c5.grad({1.0, 1.0}).x == 0.0);
}

TEST_CASE("region membership is consistent with the gap inequalities") {
  Scene s = Scene::build(canonical_flat());
  const double eps = s.epsilon();
  CHECK(Region::sigma().contains({0.1, eps / 2}, s));
  CHECK(!Region::sigma().contains({0.7, eps / 2}, s));
  CHECK(Region::omega_r(0.8).contains({0.7, eps / 2}, s));
  CHECK(!Region::omega_r(0.6).contains({0.7, eps / 2}, s));
  CHECK(Region::local_slab(0.7, 0.05).contains({0.72, 0.0}, s));
  CHECK(!Region::local_slab(0.7, 0.05).contains({0.8, 0.0}, s));
  CHECK(Region::exterior().contains({2.0, 2.0}, s));
  CHECK(!Region::exterior().contains({0.0, eps / 2}, s));
  // above the top curve but inside the neck span: not in the gap block
  CHECK(!Region::omega_r(0.8).contains({0.0, 1.0}, s));
}
