// Parametric geometry for a pair of convex inclusions separated by a thin gap.
//
// The two facing boundaries over the neck region |x| <= R1 are
//     top:    y = eps + h1(x),   h1(x) =  c1 * (|x| - R0)_+^m
//     bottom: y = h2(x),         h2(x) = -c2 * (|x| - R0)_+^m
// so both are exactly flat on the contact set Sigma' = [-R0, R0] and separate
// like a power of the distance to it.  R0 = 0 degenerates Sigma' to a point
// (the strictly convex case); R0 > 0 keeps a flat block of width 2*R0.
//
// Inclusions are closed by vertical walls up to height H and a semicircular
// cap; the closure is verified convex, never assumed.  The surrounding matrix
// domain is a disk of radius L centered on the gap midpoint, or, in
// inclusion-vs-boundary mode, a dome sitting on the (partially flat) floor.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace narrowgap {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Gap profile

struct GapProfile {
  double flat_halfwidth = 0.5;   // R0; 0 encodes a point contact set
  double neck_halfwidth = 1.0;   // R1 > R0
  int growth_order = 2;          // m >= 2
  double coeff_upper = 1.0;      // c1, top profile
  double coeff_lower = 1.0;      // c2, bottom profile
  double hessian_floor = 0.0;    // kappa0; 0 means "derive from c1,c2" (m=2)
  double norm_cap = 0.0;         // kappa1; 0 means "derive from family"

  // envelope constants: c1+c2 on both sides for this family
  double curvature_low() const { return coeff_upper + coeff_lower; }
  double curvature_high() const { return coeff_upper + coeff_lower; }

  double kappa0() const {
    if (hessian_floor > 0.0) return hessian_floor;
    return 2.0 * (coeff_upper + coeff_lower);
  }
  double kappa1() const;

  void validate() const;

  // distance of a lateral coordinate to the flat set, max(|x|-R0, 0)
  double dist_to_sigma(double x) const {
    return std::max(std::abs(x) - flat_halfwidth, 0.0);
  }

  double h1(double x) const;  // requires |x| <= R1
  double h2(double x) const;
  double h1_prime(double x) const;
  double h2_prime(double x) const;

  // unchecked closed forms, finite for any lateral coordinate
  double h1_raw(double x) const {
    return coeff_upper * std::pow(dist_to_sigma(x), growth_order);
  }
  double h2_raw(double x) const {
    return -coeff_lower * std::pow(dist_to_sigma(x), growth_order);
  }
  double h1_prime_raw(double x) const;
  double h2_prime_raw(double x) const;
};

// ---------------------------------------------------------------------------
// Coefficient field A(x) for the divergence-form variant

enum class CoefficientKind { Identity, Diagonal, RotationAniso };

struct Matrix2 {
  double a11 = 1.0, a12 = 0.0, a22 = 1.0;  // symmetric
};

struct CoefficientField {
  CoefficientKind kind = CoefficientKind::Identity;
  double theta = 0.0;  // rotation angle (rotation_aniso)
  double ratio = 1.0;  // principal-axis ratio (rotation_aniso), a11 of diagonal
  double diag_b = 1.0; // a22 of diagonal

  static CoefficientField identity() { return {}; }
  static CoefficientField diagonal(double a, double b);
  static CoefficientField rotation_aniso(double theta, double ratio);

  Matrix2 eval(Vec2 p) const;
  double lambda_min() const;  // ellipticity lower bound
  double lambda_max() const;  // ellipticity upper bound
  bool is_identity() const { return kind == CoefficientKind::Identity; }
};

// ---------------------------------------------------------------------------
// Boundary data phi on the outer boundary (value, gradient, Hessian)

enum class PhiKind { Constant, LinearXn, LinearX1, LinearXnCentered, Affine };

struct BoundaryData {
  PhiKind kind = PhiKind::LinearXn;
  double value = 0.0;   // constant term
  double ax = 0.0;      // affine x-slope
  double ay = 0.0;      // affine y-slope
  double center = 0.0;  // midline offset for the centered variant

  static BoundaryData constant(double c) { return {PhiKind::Constant, c}; }
  static BoundaryData linear_xn() { return {PhiKind::LinearXn}; }
  static BoundaryData linear_x1() { return {PhiKind::LinearX1}; }
  static BoundaryData linear_xn_centered(double mid) {
    return {PhiKind::LinearXnCentered, 0.0, 0.0, 0.0, mid};
  }
  static BoundaryData affine(double ax, double ay, double c) {
    return {PhiKind::Affine, c, ax, ay};
  }

  double eval(Vec2 p) const;
  Vec2 grad(Vec2 p) const;
  // all presets have vanishing Hessian; kept for the C^2 contract
  Matrix2 hessian(Vec2) const { return {0.0, 0.0, 0.0}; }
};

// ---------------------------------------------------------------------------
// Scene

enum class SceneMode { TwoInclusion, InclusionVsBoundary };

enum class BoundaryTag : std::uint8_t {
  Interior = 0,
  InclusionTop = 1,     // boundary of D1
  InclusionBottom = 2,  // boundary of D2 (two-inclusion mode only)
  Outer = 3
};

struct Polyline {
  std::vector<Vec2> pts;  // closed loop, CCW, last != first
  BoundaryTag tag = BoundaryTag::Interior;

  double signed_area() const;
  bool is_convex(double tol = 1e-12) const;
  double min_distance_to(const Polyline& other) const;
};

struct SceneParams {
  GapProfile profile;
  double epsilon = 1e-2;
  double closure_height = 1.0;   // H, absolute wall-top height of D1
  double outer_radius = 0.0;     // L; 0 means default 4*R1
  SceneMode mode = SceneMode::TwoInclusion;
  std::optional<CoefficientField> coefficient;
  BoundaryData phi = BoundaryData::linear_xn();
  // discretization of the boundary polylines (the mesh reuses these samples)
  double boundary_spacing = 0.0;  // h_bnd; 0 means default R1/20
  double lateral_factor = 0.5;    // gap spacing = min(h_bnd, sqrt(delta), lf*delta)
};

struct AssumptionCheck {
  std::string name;
  bool applicable = true;
  bool passed = true;
  double worst = 0.0;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  bool all_passed() const;
};

class Scene {
 public:
  static Scene build(const SceneParams& params);

  const SceneParams& params() const { return params_; }
  const GapProfile& profile() const { return params_.profile; }
  double epsilon() const { return params_.epsilon; }
  SceneMode mode() const { return params_.mode; }
  double outer_radius() const { return outer_radius_; }
  double boundary_spacing() const { return boundary_spacing_; }
  Vec2 gap_midpoint() const { return {0.0, 0.5 * params_.epsilon}; }

  // facing curves over the neck: top is the lower boundary of D1, bottom is
  // the upper boundary of D2 (or the floor of the matrix domain)
  double top_curve(double x) const { return params_.epsilon + params_.profile.h1_raw(x); }
  double bottom_curve(double x) const { return params_.profile.h2_raw(x); }
  double gap_thickness(double x) const;  // delta(x), requires |x| <= R1
  double dist_to_sigma(double x) const { return params_.profile.dist_to_sigma(x); }

  const Polyline& inclusion_top() const { return d1_; }
  const Polyline& inclusion_bottom() const;
  const Polyline& outer_boundary() const { return outer_; }
  bool has_bottom_inclusion() const { return params_.mode == SceneMode::TwoInclusion; }

  // lateral sample grid of the gap block, shared with the mesh
  const std::vector<double>& gap_lateral_grid() const { return gap_xi_; }

  // closure sections (wall + cap + wall) including both gap-junction points,
  // ordered CCW around the respective inclusion
  const std::vector<Vec2>& d1_closure() const { return d1_closure_; }
  const std::vector<Vec2>& d2_closure() const { return d2_closure_; }
  // outer-boundary arc from the right floor junction over the dome to the
  // left junction, boundary mode only (includes both junctions)
  const std::vector<Vec2>& outer_arc() const { return outer_arc_; }

  AssumptionReport validate_assumptions(int grid_points = 2001) const;

  bool in_gap_block(Vec2 p, double tol = 0.0) const;

 private:
  SceneParams params_;
  double outer_radius_ = 0.0;
  double boundary_spacing_ = 0.0;
  std::vector<double> gap_xi_;
  Polyline d1_, d2_, outer_;
  std::vector<Vec2> d1_closure_, d2_closure_, outer_arc_;

  void build_gap_grid();
  void build_two_inclusion();
  void build_boundary_mode();
};

// ---------------------------------------------------------------------------
// Region selectors over a scene

enum class RegionKind { Sigma, OmegaR, LocalSlab, Exterior, All };

struct Region {
  RegionKind kind = RegionKind::All;
  double r = 0.0;  // OmegaR radius
  double z = 0.0;  // LocalSlab center (lateral)
  double t = 0.0;  // LocalSlab halfwidth

  static Region sigma() { return {RegionKind::Sigma}; }
  static Region omega_r(double r) { return {RegionKind::OmegaR, r}; }
  static Region local_slab(double z, double t) { return {RegionKind::LocalSlab, 0.0, z, t}; }
  static Region exterior() { return {RegionKind::Exterior}; }
  static Region all() { return {RegionKind::All}; }

  bool contains(Vec2 p, const Scene& scene) const;
  std::string name() const;
};

}  // namespace narrowgap
