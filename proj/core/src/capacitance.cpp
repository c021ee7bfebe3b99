#include "narrowgap/capacitance.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>

namespace narrowgap {

ComponentFields solve_components(const HarmonicSolver& solver, const Scene& scene) {
  const Mesh& m = solver.mesh();
  const CoefficientField& A = solver.coeff();
  ComponentFields out;
  out.v1 = solver.solve(DirichletProblem::from_tags(m, A, 1.0, 0.0, 0.0).values);
  out.v2 = solver.solve(DirichletProblem::from_tags(m, A, 0.0, 1.0, 0.0).values);
  const BoundaryData phi = scene.params().phi;
  out.v3 = solver.solve(
      DirichletProblem::from_function(m, A, 0.0, 0.0, [&](Vec2 p) { return phi.eval(p); }).values);
  return out;
}

FluxMatrix flux_matrix(const HarmonicSolver& solver, const ComponentFields& comps) {
  const Mesh& m = solver.mesh();
  const CoefficientField& A = solver.coeff();
  FluxMatrix F;
  F.a11 = -energy_inner_product(m, comps.v1, comps.v1, A);
  F.a12 = -energy_inner_product(m, comps.v1, comps.v2, A);
  F.a21 = -energy_inner_product(m, comps.v2, comps.v1, A);
  F.a22 = -energy_inner_product(m, comps.v2, comps.v2, A);
  F.b1 = -energy_inner_product(m, comps.v1, comps.v3, A);
  F.b2 = -energy_inner_product(m, comps.v2, comps.v3, A);
  // outer fluxes from the discrete flux sum, not from the a_ij identities
  F.f1 = solver.boundary_flux(comps.v1, BoundaryTag::Outer);
  F.f2 = solver.boundary_flux(comps.v2, BoundaryTag::Outer);
  return F;
}

ConductorPotentials solve_conductors(const FluxMatrix& F) {
  const double det = F.a11 * F.a22 - F.a12 * F.a21;
  if (det <= 0.0)
    throw SolverError("flux matrix determinant is not positive; geometry or solver inconsistency");
  ConductorPotentials p;
  p.C1 = (-F.b1 * F.a22 + F.b2 * F.a12) / det;
  p.C2 = (-F.a11 * F.b2 + F.a21 * F.b1) / det;
  p.alpha = (F.a11 + F.a12) / (F.a21 + F.a22);
  p.diff = p.C1 - p.C2;
  const double denom = F.a11 - p.alpha * F.a12;
  p.diff_factored = std::abs(F.b1 - p.alpha * F.b2) / std::abs(denom);
  p.residual1 = std::abs(p.C1 * F.a11 + p.C2 * F.a12 + F.b1);
  p.residual2 = std::abs(p.C1 * F.a21 + p.C2 * F.a22 + F.b2);
  return p;
}

namespace {

double slab_halfwidth(const Scene& scene) {
  // wide enough to catch the central column of gap cells
  return 1.05 * scene.params().lateral_factor * scene.epsilon() + 1e-14;
}

}  // namespace

ConductorSolution reconstruct(const HarmonicSolver& solver, const Scene& scene,
                              const ComponentFields& comps, const ConductorPotentials& pots) {
  const Mesh& m = solver.mesh();
  ConductorSolution out;
  out.pots = pots;

  out.u.values.resize(m.n_vertices());
  for (int v = 0; v < m.n_vertices(); ++v) {
    switch (m.vertex_tags[v]) {
      case BoundaryTag::InclusionTop: out.u.values[v] = pots.C1; break;
      case BoundaryTag::InclusionBottom: out.u.values[v] = pots.C2; break;
      default:
        out.u.values[v] = pots.C1 * comps.v1.values[v] + pots.C2 * comps.v2.values[v] +
                          comps.v3.values[v];
    }
  }
  out.u.tri_grads = gradient_field(m, out.u.values);
  out.u.iterations = comps.v1.iterations + comps.v2.iterations + comps.v3.iterations;
  out.u.residual = std::max({comps.v1.residual, comps.v2.residual, comps.v3.residual});

  const double R1 = scene.profile().neck_halfwidth;
  out.grad_max_sigma = gradient_max(m, out.u.tri_grads, scene, Region::sigma());
  out.grad_max_gap = gradient_max(m, out.u.tri_grads, scene, Region::omega_r(R1));
  out.grad_max_far = gradient_max(m, out.u.tri_grads, scene, Region::exterior());
  out.grad_max_center =
      gradient_max(m, out.u.tri_grads, scene, Region::local_slab(0.0, slab_halfwidth(scene)));

  // decomposition terms over the narrow region
  const Region gap = Region::omega_r(R1);
  double g1 = gradient_max(m, comps.v1.tri_grads, scene, gap);
  std::vector<Vec2> sum12(m.n_triangles());
  for (int t = 0; t < m.n_triangles(); ++t)
    sum12[t] = comps.v1.tri_grads[t] + comps.v2.tri_grads[t];
  out.term_diff_v1 = std::abs(pots.diff) * g1;
  out.term_sum_v12 = std::abs(pots.C2) * gradient_max(m, sum12, scene, gap);
  out.term_v3 = gradient_max(m, comps.v3.tri_grads, scene, gap);
  return out;
}

SceneSolution solve_scene(const Scene& scene, const GradingPolicy& policy,
                          const SolverOptions& opt) {
  if (scene.mode() != SceneMode::TwoInclusion)
    throw SolverError("solve_scene requires a two-inclusion scene");
  SceneSolution out;
  out.mesh = triangulate_scene(scene, policy);
  const CoefficientField A =
      scene.params().coefficient.value_or(CoefficientField::identity());
  HarmonicSolver solver(out.mesh, A, opt);
  out.comps = solve_components(solver, scene);
  out.flux = flux_matrix(solver, out.comps);
  out.cond = reconstruct(solver, scene, out.comps, solve_conductors(out.flux));
  out.solver_iterations = out.cond.u.iterations;
  out.solver_residual = out.cond.u.residual;
  return out;
}

BoundaryModeSolution solve_boundary_mode(const Scene& scene, const GradingPolicy& policy,
                                         const SolverOptions& opt) {
  if (scene.mode() != SceneMode::InclusionVsBoundary)
    throw SolverError("solve_boundary_mode requires an inclusion-vs-boundary scene");
  BoundaryModeSolution out;
  out.mesh = triangulate_scene(scene, policy);
  const CoefficientField A =
      scene.params().coefficient.value_or(CoefficientField::identity());
  HarmonicSolver solver(out.mesh, A, opt);

  const BoundaryData phi = scene.params().phi;
  out.phi0 = phi.eval({0.0, 0.0});
  out.v1 = solver.solve(DirichletProblem::from_tags(out.mesh, A, 1.0, 0.0, 0.0).values);
  out.v0 = solver.solve(DirichletProblem::from_function(out.mesh, A, 0.0, 0.0, [&](Vec2 p) {
                          return phi.eval(p) - out.phi0;
                        }).values);

  out.a11 = -energy_inner_product(out.mesh, out.v1, out.v1, A);
  out.qtilde = -energy_inner_product(out.mesh, out.v1, out.v0, A);
  // zero net flux on the inclusion: (C1 - phi(0)) a11 + qtilde = 0
  out.C1 = out.phi0 + out.qtilde / (-out.a11);

  out.u.values.resize(out.mesh.n_vertices());
  for (int v = 0; v < out.mesh.n_vertices(); ++v) {
    if (out.mesh.vertex_tags[v] == BoundaryTag::InclusionTop)
      out.u.values[v] = out.C1;
    else
      out.u.values[v] =
          (out.C1 - out.phi0) * out.v1.values[v] + out.v0.values[v] + out.phi0;
  }
  out.u.tri_grads = gradient_field(out.mesh, out.u.values);

  const double R1 = scene.profile().neck_halfwidth;
  out.grad_max_sigma = gradient_max(out.mesh, out.u.tri_grads, scene, Region::sigma());
  out.grad_max_gap = gradient_max(out.mesh, out.u.tri_grads, scene, Region::omega_r(R1));
  out.grad_max_far = gradient_max(out.mesh, out.u.tri_grads, scene, Region::exterior());
  out.grad_max_center = gradient_max(out.mesh, out.u.tri_grads, scene,
                                     Region::local_slab(0.0, slab_halfwidth(scene)));
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> direct_constrained_solve(const Mesh& mesh, const CoefficientField& A,
                                             const std::vector<double>& outer_values,
                                             int max_unknowns) {
  const int n = mesh.n_vertices();
  if (static_cast<int>(outer_values.size()) != n)
    throw SolverError("outer value vector size mismatch");

  bool has_bottom = false;
  for (int v = 0; v < n; ++v)
    if (mesh.vertex_tags[v] == BoundaryTag::InclusionBottom) {
      has_bottom = true;
      break;
    }

  // reduced unknowns: interior vertices, then one slot per inclusion
  std::vector<int> red(n, -1);
  int ni = 0;
  for (int v = 0; v < n; ++v)
    if (mesh.vertex_tags[v] == BoundaryTag::Interior) red[v] = ni++;
  const int slot_top = ni;
  const int slot_bottom = has_bottom ? ni + 1 : -1;
  const int nred = ni + 1 + (has_bottom ? 1 : 0);
  if (nred > max_unknowns)
    throw SolverError("direct constrained solve limited to " + std::to_string(max_unknowns) +
                      " unknowns");
  for (int v = 0; v < n; ++v) {
    if (mesh.vertex_tags[v] == BoundaryTag::InclusionTop) red[v] = slot_top;
    if (mesh.vertex_tags[v] == BoundaryTag::InclusionBottom) red[v] = slot_bottom;
  }

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nred);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tr = mesh.triangles[t];
    const Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
    const double area2 = cross(b - a, c - a);
    const double area = 0.5 * area2;
    const Vec2 g[3] = {{(b.y - c.y) / area2, (c.x - b.x) / area2},
                       {(c.y - a.y) / area2, (a.x - c.x) / area2},
                       {(a.y - b.y) / area2, (b.x - a.x) / area2}};
    const Matrix2 M = A.eval(mesh.centroid(t));
    for (int i = 0; i < 3; ++i) {
      const int ri = red[tr[i]];
      if (ri < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const double k = area * (M.a11 * g[i].x * g[j].x + M.a22 * g[i].y * g[j].y +
                                 M.a12 * (g[i].x * g[j].y + g[i].y * g[j].x));
        const int rj = red[tr[j]];
        if (rj >= 0)
          trips.emplace_back(ri, rj, k);
        else
          rhs[ri] -= k * outer_values[tr[j]];
      }
    }
  }
  Eigen::SparseMatrix<double> K(nred, nred);
  K.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("direct constrained solve: factorization failed");
  const Eigen::VectorXd x = ldlt.solve(rhs);

  std::vector<double> u(n);
  for (int v = 0; v < n; ++v) u[v] = red[v] >= 0 ? x[red[v]] : outer_values[v];
  return u;
}

}  // namespace narrowgap
