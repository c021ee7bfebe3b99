// Conductor potentials for the perfectly conducting inclusion pair.
//
// The potential is decomposed as u = C1 v1 + C2 v2 + v3 where v1, v2 are the
// equipotential unit lifts of the two inclusions and v3 carries the outer
// data.  The inclusion fluxes a_ij and loads b_i are computed as energy inner
// products (the Green-identity route), which keeps a12 = a21 exact; the
// zero-net-flux conditions then fix C1, C2 from a 2x2 system.  A direct
// one-shot solve with lumped equipotential unknowns serves as the oracle.

#pragma once

#include <optional>

#include "narrowgap/harmonic.hpp"

namespace narrowgap {

struct FluxMatrix {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;
  double b1 = 0.0, b2 = 0.0;
  double f1 = 0.0, f2 = 0.0;  // outer fluxes via independent row sums
  double qtilde = 0.0;        // boundary mode only
};

struct ConductorPotentials {
  double C1 = 0.0, C2 = 0.0;
  double alpha = 0.0;                  // (a11+a12)/(a21+a22)
  double diff = 0.0;                   // C1 - C2, direct solve
  double diff_factored = 0.0;          // |b1 - alpha b2| / |a11 - alpha a12|
  double residual1 = 0.0, residual2 = 0.0;
};

struct ComponentFields {
  FieldSolution v1, v2, v3;
};

struct ConductorSolution {
  ConductorPotentials pots;
  FieldSolution u;
  double grad_max_sigma = 0.0;   // over the flat block
  double grad_max_gap = 0.0;     // over the narrow region
  double grad_max_far = 0.0;     // outside the narrow region
  double grad_max_center = 0.0;  // over the central column of the gap
  // decomposition terms, maxima over the narrow region
  double term_diff_v1 = 0.0;     // |C1-C2| max|grad v1|
  double term_sum_v12 = 0.0;     // |C2| max|grad(v1+v2)|
  double term_v3 = 0.0;          // max|grad v3|
};

// solve the three component problems on a shared operator
ComponentFields solve_components(const HarmonicSolver& solver, const Scene& scene);

FluxMatrix flux_matrix(const HarmonicSolver& solver, const ComponentFields& comps);

// exact 2x2 solve of the zero-net-flux system; checks the determinant sign
ConductorPotentials solve_conductors(const FluxMatrix& F);

ConductorSolution reconstruct(const HarmonicSolver& solver, const Scene& scene,
                              const ComponentFields& comps, const ConductorPotentials& pots);

// full pipeline results for one scene
struct SceneSolution {
  Mesh mesh;
  ComponentFields comps;
  FluxMatrix flux;
  ConductorSolution cond;
  int solver_iterations = 0;
  double solver_residual = 0.0;
};

SceneSolution solve_scene(const Scene& scene, const GradingPolicy& policy = {},
                          const SolverOptions& opt = {});

// inclusion-vs-boundary mode: u = (C1 - phi(0)) v1 + v0 + phi(0)
struct BoundaryModeSolution {
  Mesh mesh;
  FieldSolution v1, v0;
  double a11 = 0.0;
  double qtilde = 0.0;
  double C1 = 0.0;
  double phi0 = 0.0;
  FieldSolution u;
  double grad_max_sigma = 0.0, grad_max_gap = 0.0, grad_max_far = 0.0, grad_max_center = 0.0;
};

BoundaryModeSolution solve_boundary_mode(const Scene& scene, const GradingPolicy& policy = {},
                                         const SolverOptions& opt = {});

// direct constrained solve of the full problem: equal-value unknowns on each
// inclusion plus the zero-net-flux rows (oracle; refuses > max_unknowns)
std::vector<double> direct_constrained_solve(const Mesh& mesh, const CoefficientField& A,
                                             const std::vector<double>& outer_values,
                                             int max_unknowns = 20000);

}  // namespace narrowgap
