// Piecewise-linear finite elements for Dirichlet problems -div(A grad u) = 0.
//
// Stiffness entries are exact for coefficients frozen at triangle centroids
// (exact everywhere for A = I), so the energy bilinear form is symmetric to
// the last bit and boundary fluxes derived from it satisfy the discrete
// divergence theorem.  The linear solver is preconditioned CG; the default
// preconditioner is a cached sparse factorization, which makes the iteration
// converge to machine residual in a couple of steps and keeps runs
// deterministic.

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "narrowgap/geometry.hpp"
#include "narrowgap/mesh.hpp"

namespace narrowgap {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Preconditioner { Jacobi, IncompleteCholesky, Factorized };

struct SolverOptions {
  double tol = 1e-10;            // relative residual
  double iter_cap_factor = 50.0; // cap = factor * sqrt(unknowns)
  Preconditioner pre = Preconditioner::Factorized;
};

struct FieldSolution {
  std::vector<double> values;   // nodal
  std::vector<Vec2> tri_grads;  // exact per-triangle gradients
  int iterations = 0;
  double residual = 0.0;        // relative residual of the discrete system
};

// Dirichlet data: one value per boundary vertex (interior entries ignored)
struct DirichletProblem {
  const Mesh* mesh = nullptr;
  CoefficientField coeff = CoefficientField::identity();
  std::vector<double> values;

  static DirichletProblem from_tags(const Mesh& m, const CoefficientField& A, double v_top,
                                    double v_bottom, double v_outer);
  // outer boundary takes pointwise values of the given function
  static DirichletProblem from_function(const Mesh& m, const CoefficientField& A, double v_top,
                                        double v_bottom,
                                        const std::function<double(Vec2)>& outer);
};

class HarmonicSolver {
 public:
  HarmonicSolver(const Mesh& mesh, CoefficientField coeff = CoefficientField::identity(),
                 SolverOptions opt = {});
  ~HarmonicSolver();
  HarmonicSolver(HarmonicSolver&&) noexcept;
  HarmonicSolver& operator=(HarmonicSolver&&) noexcept;

  FieldSolution solve(const std::vector<double>& boundary_values) const;

  // row sum of the unconstrained operator over vertices of one tag: the
  // variationally consistent boundary flux w.r.t. the domain-outward normal
  double boundary_flux(const FieldSolution& f, BoundaryTag tag) const;

  // operator application on a full nodal vector
  std::vector<double> apply_stiffness(const std::vector<double>& v) const;

  const Mesh& mesh() const { return *mesh_; }
  const CoefficientField& coeff() const { return coeff_; }
  int n_free() const;

 private:
  const Mesh* mesh_;
  CoefficientField coeff_;
  SolverOptions opt_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

FieldSolution solve_dirichlet(const DirichletProblem& p, const SolverOptions& opt = {});

// exact P1 gradients of a nodal field
std::vector<Vec2> gradient_field(const Mesh& mesh, const std::vector<double>& values);

// max of |grad| over triangles whose centroid lies in the region
double gradient_max(const Mesh& mesh, const std::vector<Vec2>& grads, const Scene& scene,
                    const Region& region);

// lateral profile: per-bin max of |grad| over gap-block triangles
struct GradientProfile {
  std::vector<double> bin_center;
  std::vector<double> max_grad;
};
GradientProfile gradient_profile(const Mesh& mesh, const std::vector<Vec2>& grads,
                                 const Scene& scene, int bins);

// energy inner product  integral_Omega  grad f . A grad g  (symmetric exactly)
double energy_inner_product(const Mesh& mesh, const FieldSolution& f, const FieldSolution& g,
                            const CoefficientField& A = CoefficientField::identity());
double energy_inner_product(const Mesh& mesh, const std::vector<Vec2>& gf,
                            const std::vector<Vec2>& gg,
                            const CoefficientField& A = CoefficientField::identity());

// coarse cross-check: boundary line integral of the P1 normal derivative,
// w.r.t. the domain-outward normal on the given component
double boundary_flux_line_integral(const Mesh& mesh, const FieldSolution& f, BoundaryTag tag,
                                   const CoefficientField& A = CoefficientField::identity());

// ---------------------------------------------------------------------------
// manufactured solutions on the annulus family

enum class ExactHarmonic { Linear, LogR, QuadCos2, DipoleCos };

struct ManufacturedResult {
  std::vector<double> h;            // refinement scale per level
  std::vector<double> nodal_linf;   // max nodal error
  std::vector<double> grad_l2;      // L2 gradient error
  double nodal_order = 0.0;
  double grad_order = 0.0;
};

double exact_value(ExactHarmonic e, Vec2 p);
Vec2 exact_gradient(ExactHarmonic e, Vec2 p);

ManufacturedResult manufactured_error(ExactHarmonic exact, int levels = 3,
                                      int base_radial = 8, int base_theta = 48);

}  // namespace narrowgap
