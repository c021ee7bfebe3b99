#include "narrowgap/auxiliary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace narrowgap {

namespace {

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

double smoothstep_prime(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 6.0 * t * (1.0 - t);
}

}  // namespace

AuxiliaryField::AuxiliaryField(AuxKind kind, const Scene& scene) : kind_(kind), scene_(&scene) {
  coeff_ = scene.params().coefficient.value_or(CoefficientField::identity());
  // radial fade bracket: hold 1 past the inclusions, reach 0 before the outer
  const Vec2 c = scene.gap_midpoint();
  double rmax = 0.0;
  for (const Vec2& p : scene.inclusion_top().pts) rmax = std::max(rmax, norm(p - c));
  if (scene.has_bottom_inclusion())
    for (const Vec2& p : scene.inclusion_bottom().pts) rmax = std::max(rmax, norm(p - c));
  double router;
  if (scene.mode() == SceneMode::TwoInclusion) {
    router = scene.outer_radius();
  } else {
    router = std::numeric_limits<double>::infinity();
    for (const Vec2& p : scene.outer_arc())
      if (std::abs(p.x) < 0.9 * scene.outer_radius())  // dome section
        router = std::min(router, norm(p - c));
  }
  fade_inner_ = 1.02 * rmax;
  fade_outer_ = std::max(0.95 * router, fade_inner_ * 1.2);
}

AuxiliaryField::Eval AuxiliaryField::eval_gap(Vec2 p) const {
  const Scene& s = *scene_;
  const GapProfile& pr = s.profile();
  const double eps = s.epsilon();
  const double x = p.x, y = p.y;

  const double h1 = pr.h1_raw(x), h2 = pr.h2_raw(x);
  const double h1p = pr.h1_prime_raw(x), h2p = pr.h2_prime_raw(x);
  const double delta = eps + h1 - h2;
  const double dp = h1p - h2p;

  // base profile ubar1
  Eval ub;
  ub.value = (y - h2) / delta;
  ub.grad = {(-h2p * delta - (y - h2) * dp) / (delta * delta), 1.0 / delta};

  switch (kind_) {
    case AuxKind::UBar1:
      return ub;
    case AuxKind::UBar2:
      return {1.0 - ub.value, {-ub.grad.x, -ub.grad.y}};
    case AuxKind::UTilde1:
    case AuxKind::UTilde2: {
      const Matrix2 A = coeff_.eval(p);
      const double psi = A.a12 * dp / (4.0 * A.a22);
      // second lateral derivative of h1 - h2 (constant-coefficient A assumed
      // by the presets, so psi' carries only the profile curvature)
      const double d = pr.dist_to_sigma(x);
      const int m = pr.growth_order;
      const double ddp = (d > 0.0)
                             ? (pr.coeff_upper + pr.coeff_lower) * m * (m - 1) *
                                   std::pow(d, m - 2)
                             : 0.0;
      const double psip = A.a12 * ddp / (4.0 * A.a22);
      const double T = (2.0 * y - (eps + h1 + h2)) / delta;
      const double Tx = (-(h1p + h2p) * delta - (2.0 * y - (eps + h1 + h2)) * dp) /
                        (delta * delta);
      const double Ty = 2.0 / delta;
      const double B = T * T - 1.0;
      Eval e;
      e.value = ub.value + psi * B;
      e.grad = {ub.grad.x + psip * B + psi * 2.0 * T * Tx, ub.grad.y + psi * 2.0 * T * Ty};
      if (kind_ == AuxKind::UTilde2) {
        e.value = 1.0 - e.value;
        e.grad = {-e.grad.x, -e.grad.y};
      }
      return e;
    }
    case AuxKind::UHat: {
      // (1 - ubar1) * (phi(x, h(x)) - phi(0)) with h the floor profile
      const BoundaryData& phi = s.params().phi;
      const double phi0 = phi.eval({0.0, 0.0});
      const Vec2 q{x, h2};
      const double big = phi.eval(q) - phi0;
      const Vec2 g = phi.grad(q);
      const double bigp = g.x + g.y * h2p;
      Eval e;
      e.value = (1.0 - ub.value) * big;
      e.grad = {-ub.grad.x * big + (1.0 - ub.value) * bigp, -ub.grad.y * big};
      return e;
    }
  }
  return {};
}

AuxiliaryField::Eval AuxiliaryField::eval_extension(Vec2 p) const {
  const Scene& s = *scene_;
  const GapProfile& pr = s.profile();
  const double eps = s.epsilon();
  const double R1 = pr.neck_halfwidth;

  // saturated vertical profile on the laterally clamped curves
  const double xc = std::clamp(p.x, -R1, R1);
  const double S1 = eps + pr.h1_raw(xc);
  const double S2 = pr.h2_raw(xc);
  const double span = S1 - S2;
  double tau = (p.y - S2) / span;
  Vec2 dtau{0.0, 1.0 / span};
  if (std::abs(p.x) < R1) {
    const double h1p = pr.h1_prime_raw(xc), h2p = pr.h2_prime_raw(xc);
    dtau.x = (-h2p * span - (p.y - S2) * (h1p - h2p)) / (span * span);
  }
  if (tau <= 0.0) {
    tau = 0.0;
    dtau = {0.0, 0.0};
  } else if (tau >= 1.0) {
    tau = 1.0;
    dtau = {0.0, 0.0};
  }

  // collar blend toward the smoothstepped profile
  const double collar = 0.25 * R1;
  const double mu_arg = (std::abs(p.x) - R1) / collar;
  const double mu = 1.0 - smoothstep(mu_arg);
  const double dmu_dx = -smoothstep_prime(mu_arg) / collar * (p.x >= 0.0 ? 1.0 : -1.0);

  const double P = smoothstep(tau);
  const double Pp = smoothstep_prime(tau);
  double val = mu * tau + (1.0 - mu) * P;
  Vec2 grad{mu * dtau.x + dmu_dx * tau + (1.0 - mu) * Pp * dtau.x - dmu_dx * P,
            mu * dtau.y + (1.0 - mu) * Pp * dtau.y};

  // radial fade to zero toward the outer boundary
  const Vec2 c = s.gap_midpoint();
  const double rho = norm(p - c);
  const double q_arg = (rho - fade_inner_) / (fade_outer_ - fade_inner_);
  const double Q = 1.0 - smoothstep(q_arg);
  if (Q < 1.0) {
    const double dQ = -smoothstep_prime(q_arg) / (fade_outer_ - fade_inner_);
    const Vec2 drho = rho > 0.0 ? (1.0 / rho) * (p - c) : Vec2{0.0, 0.0};
    grad = {Q * grad.x + dQ * drho.x * val, Q * grad.y + dQ * drho.y * val};
    val *= Q;
  }

  switch (kind_) {
    case AuxKind::UBar1:
      return {val, grad};
    case AuxKind::UTilde1: {
      // corrector decays across the collar
      const Matrix2 A = coeff_.eval(p);
      const double dp = pr.h1_prime_raw(xc) - pr.h2_prime_raw(xc);
      const double psi = A.a12 * dp / (4.0 * A.a22);
      const double T = std::clamp((2.0 * p.y - (eps + pr.h1_raw(xc) + pr.h2_raw(xc))) / span,
                                  -1.0, 1.0);
      const double B = T * T - 1.0;
      // value-level blend only; the collar gradient of the corrector is mild
      return {val + mu * psi * B, grad};
    }
    case AuxKind::UBar2:
    case AuxKind::UTilde2:
      return {1.0 - val, {-grad.x, -grad.y}};
    case AuxKind::UHat: {
      const BoundaryData& phi = s.params().phi;
      const double phi0 = phi.eval({0.0, 0.0});
      const Vec2 q{xc, S2};
      const double big = phi.eval(q) - phi0;
      const Vec2 g = phi.grad(q);
      const double bigp = std::abs(p.x) < R1 ? g.x + g.y * pr.h2_prime_raw(xc) : 0.0;
      return {(1.0 - val) * big, {-grad.x * big + (1.0 - val) * bigp, -grad.y * big}};
    }
  }
  return {val, grad};
}

AuxiliaryField::Eval AuxiliaryField::eval(Vec2 p, bool allow_extension) const {
  if (scene_->in_gap_block(p, 1e-12)) return eval_gap(p);
  if (!allow_extension)
    throw GeometryError("auxiliary field evaluated outside the narrow region");
  return eval_extension(p);
}

std::vector<double> AuxiliaryField::interpolate(const Mesh& mesh) const {
  std::vector<double> out(mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) out[v] = eval(mesh.vertices[v], true).value;
  return out;
}

// ---------------------------------------------------------------------------

double divergence_residual(const AuxiliaryField& aux, const CoefficientField& A, Vec2 p) {
  const double eps = aux.scene().epsilon();
  const double h = 1e-6 * eps;
  if (h < 64.0 * std::numeric_limits<double>::epsilon() * std::max({std::abs(p.x), std::abs(p.y), 1.0}))
    throw ToleranceError("finite-difference step underflow for this epsilon");
  auto flux = [&](Vec2 q) -> Vec2 {
    const Vec2 g = aux.eval(q, true).grad;
    const Matrix2 a = A.eval(q);
    return {a.a11 * g.x + a.a12 * g.y, a.a12 * g.x + a.a22 * g.y};
  };
  const double fx = (flux({p.x + h, p.y}).x - flux({p.x - h, p.y}).x) / (2.0 * h);
  const double fy = (flux({p.x, p.y + h}).y - flux({p.x, p.y - h}).y) / (2.0 * h);
  return fx + fy;
}

ResidualScan corrector_residual(const AuxiliaryField& aux, const CoefficientField& A,
                                int n_lateral, const std::vector<double>& sigmas) {
  const Scene& s = aux.scene();
  const GapProfile& pr = s.profile();
  const double R1 = pr.neck_halfwidth;
  const double eps = s.epsilon();
  ResidualScan scan;
  for (int i = 0; i < n_lateral; ++i) {
    const double x = -R1 * 0.98 + 1.96 * R1 * (static_cast<double>(i) / (n_lateral - 1));
    const double d = pr.dist_to_sigma(x);
    const double delta = s.gap_thickness(x);
    const double bot = s.bottom_curve(x);
    for (double sg : sigmas) {
      const double y = bot + sg * delta;
      const double r = std::abs(divergence_residual(aux, A, {x, y}));
      ++scan.n_samples;
      if (d == 0.0)
        scan.max_on_sigma = std::max(scan.max_on_sigma, r);
      else {
        scan.max_off_sigma = std::max(scan.max_off_sigma, r);
        scan.max_normalized =
            std::max(scan.max_normalized, r * (eps + std::pow(d, pr.growth_order)));
      }
      if (sg == 0.5) scan.max_midline = std::max(scan.max_midline, r);
    }
  }
  return scan;
}

// ---------------------------------------------------------------------------

std::vector<Vec2> difference_gradients(const Mesh& mesh, const FieldSolution& v,
                                       const AuxiliaryField& aux) {
  std::vector<double> diff = aux.interpolate(mesh);
  for (int i = 0; i < mesh.n_vertices(); ++i) diff[i] = v.values[i] - diff[i];
  return gradient_field(mesh, diff);
}

GradientComparison compare_gradients(const Mesh& mesh, const FieldSolution& v,
                                     const AuxiliaryField& aux, const Region& region, int bins) {
  const std::vector<Vec2> gd = difference_gradients(mesh, v, aux);
  GradientComparison out;
  out.max = gradient_max(mesh, gd, aux.scene(), region);
  out.profile = gradient_profile(mesh, gd, aux.scene(), bins);
  return out;
}

LocalEnergy local_energy(const Mesh& mesh, const std::vector<Vec2>& diff_grads,
                         const Scene& scene, double z) {
  LocalEnergy le;
  le.delta = scene.gap_thickness(z);
  le.delta_pow_n = le.delta * le.delta;
  const Region slab = Region::local_slab(z, le.delta);
  bool any = false;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    if (!slab.contains(mesh.centroid(t), scene)) continue;
    any = true;
    le.energy += mesh.area(t) * dot(diff_grads[t], diff_grads[t]);
  }
  if (!any) throw GeometryError("local energy window contains no triangles");
  le.ratio = le.energy / le.delta_pow_n;
  return le;
}

void write_profile_csv(const std::string& path, const Mesh& mesh, const FieldSolution& v,
                       const AuxiliaryField& aux, const Scene& scene, int stations) {
  const std::vector<Vec2> gd = difference_gradients(mesh, v, aux);
  const double R1 = scene.profile().neck_halfwidth;
  FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw GeometryError("cannot open " + path);
  std::fprintf(f, "x,d,delta,grad_ubar_max,grad_diff_max,local_energy,delta_pow_n\n");
  for (int i = 0; i < stations; ++i) {
    const double x = -R1 * 0.95 + 1.9 * R1 * (static_cast<double>(i) / (stations - 1));
    const double d = scene.dist_to_sigma(x);
    const double delta = scene.gap_thickness(x);
    // analytic profile-gradient maximum across the column
    double gub = 0.0;
    for (double sg : {0.15, 0.5, 0.85}) {
      const Vec2 p{x, scene.bottom_curve(x) + sg * delta};
      gub = std::max(gub, norm(aux.eval(p, true).grad));
    }
    const Region slab = Region::local_slab(x, delta);
    double gdm = 0.0;
    double en = 0.0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      if (!slab.contains(mesh.centroid(t), scene)) continue;
      gdm = std::max(gdm, norm(gd[t]));
      en += mesh.area(t) * dot(gd[t], gd[t]);
    }
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", x, d, delta, gub, gdm, en,
                 delta * delta);
  }
  std::fclose(f);
}

}  // namespace narrowgap
