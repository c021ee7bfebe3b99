#include "narrowgap/harmonic.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <map>

namespace narrowgap {

namespace {

struct TriGeom {
  Vec2 g0, g1, g2;  // barycentric gradients
  double area;
};

TriGeom tri_geom(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area2 = cross(b - a, c - a);
  TriGeom t;
  t.area = 0.5 * area2;
  t.g0 = {(b.y - c.y) / area2, (c.x - b.x) / area2};
  t.g1 = {(c.y - a.y) / area2, (a.x - c.x) / area2};
  t.g2 = {(a.y - b.y) / area2, (b.x - a.x) / area2};
  return t;
}

double quad_form(const Matrix2& A, Vec2 u, Vec2 v) {
  return A.a11 * u.x * v.x + A.a22 * u.y * v.y + A.a12 * (u.x * v.y + u.y * v.x);
}

}  // namespace

// ---------------------------------------------------------------------------

DirichletProblem DirichletProblem::from_tags(const Mesh& m, const CoefficientField& A,
                                             double v_top, double v_bottom, double v_outer) {
  DirichletProblem p;
  p.mesh = &m;
  p.coeff = A;
  p.values.assign(m.n_vertices(), 0.0);
  for (int v = 0; v < m.n_vertices(); ++v) {
    switch (m.vertex_tags[v]) {
      case BoundaryTag::InclusionTop: p.values[v] = v_top; break;
      case BoundaryTag::InclusionBottom: p.values[v] = v_bottom; break;
      case BoundaryTag::Outer: p.values[v] = v_outer; break;
      default: break;
    }
  }
  return p;
}

DirichletProblem DirichletProblem::from_function(const Mesh& m, const CoefficientField& A,
                                                 double v_top, double v_bottom,
                                                 const std::function<double(Vec2)>& outer) {
  DirichletProblem p = from_tags(m, A, v_top, v_bottom, 0.0);
  for (int v = 0; v < m.n_vertices(); ++v)
    if (m.vertex_tags[v] == BoundaryTag::Outer) p.values[v] = outer(m.vertices[v]);
  return p;
}

// ---------------------------------------------------------------------------

struct HarmonicSolver::Impl {
  Eigen::SparseMatrix<double> K;    // full operator, all vertices
  Eigen::SparseMatrix<double> Kff;  // free block
  std::vector<int> free_index;      // vertex -> free slot, -1 for boundary
  std::vector<int> free_vertex;     // free slot -> vertex
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::IncompleteCholesky<double> ic;
  Eigen::VectorXd inv_diag;
};

HarmonicSolver::HarmonicSolver(const Mesh& mesh, CoefficientField coeff, SolverOptions opt)
    : mesh_(&mesh), coeff_(std::move(coeff)), opt_(opt), impl_(std::make_unique<Impl>()) {
  const int n = mesh.n_vertices();
  impl_->free_index.assign(n, -1);
  for (int v = 0; v < n; ++v)
    if (mesh.vertex_tags[v] == BoundaryTag::Interior) {
      impl_->free_index[v] = static_cast<int>(impl_->free_vertex.size());
      impl_->free_vertex.push_back(v);
    }
  const int nf = static_cast<int>(impl_->free_vertex.size());
  if (nf == 0) throw SolverError("mesh has no interior vertices");

  std::vector<Eigen::Triplet<double>> trips, trips_ff;
  trips.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 9);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tr = mesh.triangles[t];
    const TriGeom g = tri_geom(mesh.vertices[tr[0]], mesh.vertices[tr[1]], mesh.vertices[tr[2]]);
    if (g.area <= 0.0) throw SolverError("nonpositive triangle area in assembly");
    const Matrix2 A = coeff_.eval(mesh.centroid(t));
    if (A.a11 <= 0.0 || A.a11 * A.a22 - A.a12 * A.a12 <= 0.0)
      throw SolverError("coefficient field is not elliptic at a sample point");
    const Vec2 gr[3] = {g.g0, g.g1, g.g2};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double k = g.area * quad_form(A, gr[i], gr[j]);
        trips.emplace_back(tr[i], tr[j], k);
        const int fi = impl_->free_index[tr[i]];
        const int fj = impl_->free_index[tr[j]];
        if (fi >= 0 && fj >= 0) trips_ff.emplace_back(fi, fj, k);
      }
  }
  impl_->K.resize(n, n);
  impl_->K.setFromTriplets(trips.begin(), trips.end());
  impl_->Kff.resize(nf, nf);
  impl_->Kff.setFromTriplets(trips_ff.begin(), trips_ff.end());

  switch (opt_.pre) {
    case Preconditioner::Factorized:
      impl_->ldlt.compute(impl_->Kff);
      if (impl_->ldlt.info() != Eigen::Success)
        throw SolverError("sparse factorization of the stiffness matrix failed");
      break;
    case Preconditioner::IncompleteCholesky:
      impl_->ic.compute(impl_->Kff);
      if (impl_->ic.info() != Eigen::Success)
        throw SolverError("incomplete Cholesky setup failed");
      break;
    case Preconditioner::Jacobi:
      impl_->inv_diag = impl_->Kff.diagonal().cwiseInverse();
      break;
  }
}

HarmonicSolver::~HarmonicSolver() = default;
HarmonicSolver::HarmonicSolver(HarmonicSolver&&) noexcept = default;
HarmonicSolver& HarmonicSolver::operator=(HarmonicSolver&&) noexcept = default;

int HarmonicSolver::n_free() const { return static_cast<int>(impl_->free_vertex.size()); }

FieldSolution HarmonicSolver::solve(const std::vector<double>& boundary_values) const {
  const Mesh& m = *mesh_;
  const int n = m.n_vertices();
  if (static_cast<int>(boundary_values.size()) != n)
    throw SolverError("boundary value vector size mismatch");

  // rhs: b_f = -K_fb g, via one application of the full operator to the lift
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (int v = 0; v < n; ++v)
    if (impl_->free_index[v] < 0) g[v] = boundary_values[v];
  const Eigen::VectorXd Kg = impl_->K * g;

  const int nf = n_free();
  Eigen::VectorXd b(nf);
  for (int f = 0; f < nf; ++f) b[f] = -Kg[impl_->free_vertex[f]];

  auto precond = [&](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    switch (opt_.pre) {
      case Preconditioner::Factorized: return impl_->ldlt.solve(r);
      case Preconditioner::IncompleteCholesky: return impl_->ic.solve(r);
      case Preconditioner::Jacobi: return impl_->inv_diag.cwiseProduct(r);
    }
    return r;
  };

  // preconditioned CG, zero initial guess
  const double bnorm = b.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nf);
  int iters = 0;
  double rel = 0.0;
  if (bnorm > 0.0) {
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = precond(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    const int cap = std::max(
        16, static_cast<int>(opt_.iter_cap_factor * std::sqrt(static_cast<double>(nf))));
    rel = r.norm() / bnorm;
    while (rel > opt_.tol) {
      if (iters >= cap)
        throw SolverError("CG failed to converge: relative residual " + std::to_string(rel) +
                          " after " + std::to_string(iters) + " iterations");
      const Eigen::VectorXd Ap = impl_->Kff * p;
      const double alpha = rz / p.dot(Ap);
      x += alpha * p;
      r -= alpha * Ap;
      ++iters;
      rel = r.norm() / bnorm;
      if (rel <= opt_.tol) break;
      z = precond(r);
      const double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
    }
  }

  FieldSolution out;
  out.values.assign(n, 0.0);
  for (int v = 0; v < n; ++v)
    out.values[v] = impl_->free_index[v] < 0 ? boundary_values[v] : x[impl_->free_index[v]];
  out.tri_grads = gradient_field(m, out.values);
  out.iterations = iters;
  out.residual = rel;
  return out;
}

double HarmonicSolver::boundary_flux(const FieldSolution& f, BoundaryTag tag) const {
  const Eigen::Map<const Eigen::VectorXd> v(f.values.data(), f.values.size());
  const Eigen::VectorXd Kv = impl_->K * v;
  double s = 0.0;
  for (int i = 0; i < mesh_->n_vertices(); ++i)
    if (mesh_->vertex_tags[i] == tag) s += Kv[i];
  return s;
}

std::vector<double> HarmonicSolver::apply_stiffness(const std::vector<double>& v) const {
  const Eigen::Map<const Eigen::VectorXd> x(v.data(), v.size());
  const Eigen::VectorXd y = impl_->K * x;
  return {y.data(), y.data() + y.size()};
}

FieldSolution solve_dirichlet(const DirichletProblem& p, const SolverOptions& opt) {
  if (!p.mesh) throw SolverError("problem has no mesh");
  HarmonicSolver solver(*p.mesh, p.coeff, opt);
  return solver.solve(p.values);
}

// ---------------------------------------------------------------------------

std::vector<Vec2> gradient_field(const Mesh& mesh, const std::vector<double>& values) {
  std::vector<Vec2> grads(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tr = mesh.triangles[t];
    const TriGeom g = tri_geom(mesh.vertices[tr[0]], mesh.vertices[tr[1]], mesh.vertices[tr[2]]);
    grads[t] = values[tr[0]] * g.g0 + values[tr[1]] * g.g1 + values[tr[2]] * g.g2;
  }
  return grads;
}

double gradient_max(const Mesh& mesh, const std::vector<Vec2>& grads, const Scene& scene,
                    const Region& region) {
  double best = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t)
    if (region.contains(mesh.centroid(t), scene)) best = std::max(best, norm(grads[t]));
  return best;
}

GradientProfile gradient_profile(const Mesh& mesh, const std::vector<Vec2>& grads,
                                 const Scene& scene, int bins) {
  const double R1 = scene.profile().neck_halfwidth;
  GradientProfile prof;
  prof.bin_center.resize(bins);
  prof.max_grad.assign(bins, 0.0);
  for (int b = 0; b < bins; ++b) prof.bin_center[b] = -R1 + (2.0 * R1) * ((b + 0.5) / bins);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    if (mesh.tri_regions[t] != TriRegion::GapBlock) continue;
    const Vec2 c = mesh.centroid(t);
    int b = static_cast<int>((c.x + R1) / (2.0 * R1) * bins);
    b = std::clamp(b, 0, bins - 1);
    prof.max_grad[b] = std::max(prof.max_grad[b], norm(grads[t]));
  }
  return prof;
}

double energy_inner_product(const Mesh& mesh, const std::vector<Vec2>& gf,
                            const std::vector<Vec2>& gg, const CoefficientField& A) {
  double acc = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Matrix2 a = A.eval(mesh.centroid(t));
    acc += mesh.area(t) * quad_form(a, gf[t], gg[t]);
  }
  return acc;
}

double energy_inner_product(const Mesh& mesh, const FieldSolution& f, const FieldSolution& g,
                            const CoefficientField& A) {
  return energy_inner_product(mesh, f.tri_grads, g.tri_grads, A);
}

double boundary_flux_line_integral(const Mesh& mesh, const FieldSolution& f, BoundaryTag tag,
                                   const CoefficientField& A) {
  // boundary edges appear in exactly one triangle; normal oriented away from it
  std::map<std::pair<int, int>, std::pair<int, int>> once;  // edge -> (tri, opposite vertex)
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tr = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      int a = tr[k], b = tr[(k + 1) % 3];
      const int opp = tr[(k + 2) % 3];
      if (a > b) std::swap(a, b);
      auto it = once.find({a, b});
      if (it == once.end())
        once[{a, b}] = {t, opp};
      else
        it->second.first = -1;  // interior edge
    }
  }
  double s = 0.0;
  for (const auto& [e, to] : once) {
    if (to.first < 0) continue;
    if (mesh.vertex_tags[e.first] != tag || mesh.vertex_tags[e.second] != tag) continue;
    const Vec2 pa = mesh.vertices[e.first], pb = mesh.vertices[e.second];
    const Vec2 edge = pb - pa;
    Vec2 n{edge.y, -edge.x};  // length |edge|
    const Vec2 inward = mesh.vertices[to.second] - pa;
    if (dot(n, inward) > 0.0) n = -1.0 * n;
    const Matrix2 a = A.eval(mesh.centroid(to.first));
    const Vec2 g = f.tri_grads[to.first];
    const Vec2 flux{a.a11 * g.x + a.a12 * g.y, a.a12 * g.x + a.a22 * g.y};
    s += dot(flux, n);
  }
  return s;
}

// ---------------------------------------------------------------------------

double exact_value(ExactHarmonic e, Vec2 p) {
  switch (e) {
    case ExactHarmonic::Linear: return p.y;
    case ExactHarmonic::LogR: return std::log(norm(p));
    case ExactHarmonic::QuadCos2: return p.x * p.x - p.y * p.y;
    case ExactHarmonic::DipoleCos: return p.x / dot(p, p);
  }
  return 0.0;
}

Vec2 exact_gradient(ExactHarmonic e, Vec2 p) {
  const double r2 = dot(p, p);
  switch (e) {
    case ExactHarmonic::Linear: return {0.0, 1.0};
    case ExactHarmonic::LogR: return {p.x / r2, p.y / r2};
    case ExactHarmonic::QuadCos2: return {2.0 * p.x, -2.0 * p.y};
    case ExactHarmonic::DipoleCos:
      return {(r2 - 2.0 * p.x * p.x) / (r2 * r2), -2.0 * p.x * p.y / (r2 * r2)};
  }
  return {0.0, 0.0};
}

ManufacturedResult manufactured_error(ExactHarmonic exact, int levels, int base_radial,
                                      int base_theta) {
  ManufacturedResult res;
  for (int lev = 0; lev < levels; ++lev) {
    const int scale = 1 << lev;
    Mesh m = annulus_mesh(1.0, 2.0, base_radial * scale, base_theta * scale);
    DirichletProblem p;
    p.mesh = &m;
    p.values.assign(m.n_vertices(), 0.0);
    for (int v = 0; v < m.n_vertices(); ++v)
      if (m.vertex_tags[v] != BoundaryTag::Interior)
        p.values[v] = exact_value(exact, m.vertices[v]);
    FieldSolution f = solve_dirichlet(p, {1e-12});

    double linf = 0.0;
    for (int v = 0; v < m.n_vertices(); ++v)
      linf = std::max(linf, std::abs(f.values[v] - exact_value(exact, m.vertices[v])));
    double gl2 = 0.0;
    for (int t = 0; t < m.n_triangles(); ++t) {
      const Vec2 d = f.tri_grads[t] - exact_gradient(exact, m.centroid(t));
      gl2 += m.area(t) * dot(d, d);
    }
    res.h.push_back(1.0 / scale);
    res.nodal_linf.push_back(linf);
    res.grad_l2.push_back(std::sqrt(gl2));
  }

  auto fit_order = [&](const std::vector<double>& err) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(err.size());
    for (int i = 0; i < n; ++i) {
      const double X = std::log(res.h[i]);
      const double Y = std::log(std::max(err[i], 1e-300));
      sx += X; sy += Y; sxx += X * X; sxy += X * Y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  res.nodal_order = fit_order(res.nodal_linf);
  res.grad_order = fit_order(res.grad_l2);
  return res;
}

}  // namespace narrowgap
