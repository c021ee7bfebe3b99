#include <doctest.h>

#include <cmath>

#include "narrowgap/capacitance.hpp"

using namespace narrowgap;

namespace {

SceneParams canonical_flat(double eps = 1e-2) {
  SceneParams p;
  p.profile = {0.5, 1.0, 2, 1.0, 1.0};
  p.epsilon = eps;
  p.closure_height = 1.0;
  p.outer_radius = 4.0;
  return p;
}

}  // namespace

TEST_CASE("annulus capacitance matches the closed form within 1 percent") {
  Mesh m = annulus_mesh(1.0, 2.0, 24, 144);
  HarmonicSolver solver(m, CoefficientField::identity(), {1e-12});
  FieldSolution v1 =
      solver.solve(DirichletProblem::from_tags(m, CoefficientField::identity(), 1.0, 0.0, 0.0).values);
  const double neg_a11 = energy_inner_product(m, v1, v1);
  CHECK(neg_a11 == doctest::Approx(2.0 * M_PI / std::log(2.0)).epsilon(0.01));
}

TEST_CASE("flux matrix: exact symmetry, signs, and zero loads for zero data") {
  SceneParams sp = canonical_flat();
  sp.phi = BoundaryData::constant(0.0);
  Scene s = Scene::build(sp);
  SceneSolution sol = solve_scene(s, {}, {1e-12});

  CHECK(sol.flux.a12 == sol.flux.a21);  // bitwise, by the symmetric energy form
  CHECK(sol.flux.a11 < 0.0);
  CHECK(sol.flux.a22 < 0.0);
  CHECK(sol.flux.a12 > 0.0);
  CHECK(std::abs(sol.flux.b1) < 1e-9 * std::abs(sol.flux.a11));
  CHECK(std::abs(sol.flux.b2) < 1e-9 * std::abs(sol.flux.a11));
  CHECK(sol.cond.pots.C1 == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(sol.cond.pots.C2 == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("outer-flux identity against the independent row-sum route") {
  Scene s = Scene::build(canonical_flat());
  SceneSolution sol = solve_scene(s, {}, {1e-12});
  CHECK(std::abs((sol.flux.a11 + sol.flux.a21) - sol.flux.f1) <= 1e-6 * std::abs(sol.flux.f1));
  CHECK(std::abs((sol.flux.a22 + sol.flux.a12) - sol.flux.f2) <= 1e-6 * std::abs(sol.flux.f2));
}

TEST_CASE("line-integral fluxes cross-check the energy route at coarse tolerance") {
  Scene s = Scene::build(canonical_flat());
  SceneSolution sol = solve_scene(s, {}, {1e-12});
  // a11 = flux of v1 w.r.t. the inclusion-outward normal, which is minus the
  // domain-outward line integral on that component
  const double a11_line =
      -boundary_flux_line_integral(sol.mesh, sol.comps.v1, BoundaryTag::InclusionTop);
  CHECK(a11_line == doctest::Approx(sol.flux.a11).epsilon(0.05));
}

TEST_CASE("conductor system: hand-solved 2x2 case") {
  FluxMatrix F;
  F.a11 = -2.0; F.a12 = 1.0; F.a21 = 1.0; F.a22 = -2.0;
  F.b1 = 1.0; F.b2 = 1.0;
  ConductorPotentials p = solve_conductors(F);
  CHECK(p.C1 == doctest::Approx(1.0));
  CHECK(p.C2 == doctest::Approx(1.0));
  CHECK(p.residual1 < 1e-12);
  CHECK(p.residual2 < 1e-12);
}

TEST_CASE("conductor system rejects a nonpositive determinant") {
  FluxMatrix F;
  F.a11 = -1.0; F.a12 = 2.0; F.a21 = 2.0; F.a22 = -1.0;
  CHECK_THROWS_AS(solve_conductors(F), SolverError);
}

TEST_CASE("factored potential difference agrees with the direct solve") {
  SceneParams sp = canonical_flat();
  sp.phi = BoundaryData::linear_xn();
  Scene s = Scene::build(sp);
  SceneSolution sol = solve_scene(s, {}, {1e-12});
  CHECK(std::abs(sol.cond.pots.diff) ==
        doctest::Approx(sol.cond.pots.diff_factored).epsilon(1e-9));
  const double scale = std::max(std::abs(sol.flux.a11), std::abs(sol.flux.a22));
  CHECK(sol.cond.pots.residual1 <= 1e-9 * scale);
  CHECK(sol.cond.pots.residual2 <= 1e-9 * scale);
}

TEST_CASE("symmetric scene with odd data gives opposite potentials") {
  SceneParams sp = canonical_flat();
  sp.phi = BoundaryData::linear_xn_centered(0.5 * sp.epsilon);
  Scene s = Scene::build(sp);
  SceneSolution sol = solve_scene(s, {}, {1e-12});
  CHECK(sol.cond.pots.C1 == doctest::Approx(-sol.cond.pots.C2).epsilon(1e-8));
  CHECK(std::abs(sol.cond.pots.C1) > 1e-4);  // nontrivial
}

TEST_CASE("constant data reconstructs a constant potential") {
  SceneParams sp = canonical_flat();
  sp.phi = BoundaryData::constant(5.0);
  Scene s = Scene::build(sp);
  SceneSolution sol = solve_scene(s, {}, {1e-12});
  CHECK(sol.cond.pots.C1 == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(sol.cond.pots.C2 == doctest::Approx(5.0).epsilon(1e-9));
  for (double v : sol.cond.u.values) CHECK(v == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(sol.cond.grad_max_gap < 1e-7);
}

TEST_CASE("reconstructed potential equals the conductor values exactly on the inclusions") {
  Scene s = Scene::build(canonical_flat());
  SceneSolution sol = solve_scene(s, {}, {1e-12});
  for (int v = 0; v < sol.mesh.n_vertices(); ++v) {
    if (sol.mesh.vertex_tags[v] == BoundaryTag::InclusionTop)
      CHECK(sol.cond.u.values[v] == sol.cond.pots.C1);
    if (sol.mesh.vertex_tags[v] == BoundaryTag::InclusionBottom)
      CHECK(sol.cond.u.values[v] == sol.cond.pots.C2);
  }
}

TEST_CASE("oracle: reconstruction agrees with the direct constrained solve") {
  SceneParams sp = canonical_flat();
  sp.phi = BoundaryData::linear_xn();
  Scene s = Scene::build(sp);
  SceneSolution sol = solve_scene(s, {}, {1e-12});

  std::vector<double> outer(sol.mesh.n_vertices(), 0.0);
  for (int v = 0; v < sol.mesh.n_vertices(); ++v)
    if (sol.mesh.vertex_tags[v] == BoundaryTag::Outer)
      outer[v] = sp.phi.eval(sol.mesh.vertices[v]);
  const std::vector<double> direct =
      direct_constrained_solve(sol.mesh, CoefficientField::identity(), outer);

  double scale = 0.0, diff = 0.0;
  for (int v = 0; v < sol.mesh.n_vertices(); ++v) {
    scale = std::max(scale, std::abs(direct[v]));
    diff = std::max(diff, std::abs(direct[v] - sol.cond.u.values[v]));
  }
  CHECK(diff <= 1e-8 * scale);
}

TEST_CASE("direct constrained solve refuses oversized meshes") {
  Scene s = Scene::build(canonical_flat());
  Mesh m = triangulate_scene(s, {});
  std::vector<double> outer(m.n_vertices(), 0.0);
  CHECK_THROWS_AS(direct_constrained_solve(m, CoefficientField::identity(), outer, 100),
                  SolverError);
}

TEST_CASE("boundary mode: constant data is inert") {
  SceneParams sp = canonical_flat();
  sp.mode = SceneMode::InclusionVsBoundary;
  sp.phi = BoundaryData::constant(2.0);
  Scene s = Scene::build(sp);
  BoundaryModeSolution sol = solve_boundary_mode(s, {}, {1e-12});
  CHECK(std::abs(sol.qtilde) < 1e-8);
  CHECK(sol.C1 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(sol.grad_max_gap < 1e-8);
  CHECK(sol.grad_max_far < 1e-8);
}

TEST_CASE("boundary mode: odd lateral data has vanishing flux functional") {
  SceneParams sp = canonical_flat();
  sp.mode = SceneMode::InclusionVsBoundary;
  sp.phi = BoundaryData::linear_x1();
  Scene s = Scene::build(sp);
  BoundaryModeSolution sol = solve_boundary_mode(s, {}, {1e-12});
  CHECK(std::abs(sol.qtilde) < 1e-8);
}

TEST_CASE("boundary mode signs: vertical data lifts the conductor potential") {
  SceneParams sp = canonical_flat();
  sp.mode = SceneMode::InclusionVsBoundary;
  sp.phi = BoundaryData::linear_xn();
  Scene s = Scene::build(sp);
  BoundaryModeSolution sol = solve_boundary_mode(s, {}, {1e-12});
  CHECK(sol.a11 < 0.0);
  // the inclusion floats to a potential above phi(0) = 0
  CHECK(sol.C1 > sol.phi0);
  CHECK(sol.qtilde > 0.0);
}
