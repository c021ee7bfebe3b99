#include "narrowgap/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace narrowgap {

namespace {

double segment_point_distance(Vec2 a, Vec2 b, Vec2 p) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(p - a);
  double t = dot(p - a, ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

double segment_segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  // segments in this geometry never intersect; endpoint projections suffice
  return std::min(std::min(segment_point_distance(a, b, c), segment_point_distance(a, b, d)),
                  std::min(segment_point_distance(c, d, a), segment_point_distance(c, d, b)));
}

// points strictly between a and b, roughly max_step apart
std::vector<double> interior_steps(double a, double b, double max_step) {
  std::vector<double> out;
  const double len = std::abs(b - a);
  const int n = std::max(1, static_cast<int>(std::ceil(len / max_step)));
  for (int i = 1; i < n; ++i) out.push_back(a + (b - a) * (static_cast<double>(i) / n));
  return out;
}

void dedupe_loop(std::vector<Vec2>& pts) {
  std::vector<Vec2> clean;
  for (const Vec2& p : pts) {
    if (!clean.empty() && norm(p - clean.back()) < 1e-14) continue;
    clean.push_back(p);
  }
  while (clean.size() > 1 && norm(clean.back() - clean.front()) < 1e-14) clean.pop_back();
  pts = std::move(clean);
}

}  // namespace

// ---------------------------------------------------------------------------
// GapProfile

void GapProfile::validate() const {
  if (flat_halfwidth < 0.0) throw GeometryError("flat_halfwidth must be >= 0");
  if (neck_halfwidth <= flat_halfwidth)
    throw GeometryError("neck_halfwidth must exceed flat_halfwidth");
  if (growth_order < 2) throw GeometryError("growth_order must be >= 2");
  if (coeff_upper < 0.0 || coeff_lower < 0.0)
    throw GeometryError("profile coefficients must be nonnegative");
}

double GapProfile::kappa1() const {
  if (norm_cap > 0.0) return norm_cap;
  const double w = neck_halfwidth - flat_halfwidth;
  const double c = std::max(coeff_upper, coeff_lower);
  const int m = growth_order;
  double bound = c * (std::pow(w, m) + m * std::pow(w, m - 1) + m * (m - 1) * std::pow(w, m - 2));
  return 1.01 * bound + 1e-12;
}

double GapProfile::h1(double x) const {
  if (std::abs(x) > neck_halfwidth * (1.0 + 1e-12))
    throw GeometryError("profile evaluated outside |x| <= R1");
  return h1_raw(x);
}

double GapProfile::h2(double x) const {
  if (std::abs(x) > neck_halfwidth * (1.0 + 1e-12))
    throw GeometryError("profile evaluated outside |x| <= R1");
  return h2_raw(x);
}

double GapProfile::h1_prime_raw(double x) const {
  const double d = dist_to_sigma(x);
  if (d == 0.0) return 0.0;
  const double s = x >= 0.0 ? 1.0 : -1.0;
  return s * coeff_upper * growth_order * std::pow(d, growth_order - 1);
}

double GapProfile::h2_prime_raw(double x) const {
  const double d = dist_to_sigma(x);
  if (d == 0.0) return 0.0;
  const double s = x >= 0.0 ? 1.0 : -1.0;
  return -s * coeff_lower * growth_order * std::pow(d, growth_order - 1);
}

double GapProfile::h1_prime(double x) const {
  if (std::abs(x) > neck_halfwidth * (1.0 + 1e-12))
    throw GeometryError("profile evaluated outside |x| <= R1");
  return h1_prime_raw(x);
}

double GapProfile::h2_prime(double x) const {
  if (std::abs(x) > neck_halfwidth * (1.0 + 1e-12))
    throw GeometryError("profile evaluated outside |x| <= R1");
  return h2_prime_raw(x);
}

// ---------------------------------------------------------------------------
// CoefficientField

CoefficientField CoefficientField::diagonal(double a, double b) {
  if (a <= 0.0 || b <= 0.0) throw GeometryError("diagonal coefficients must be positive");
  CoefficientField f;
  f.kind = CoefficientKind::Diagonal;
  f.ratio = a;
  f.diag_b = b;
  return f;
}

CoefficientField CoefficientField::rotation_aniso(double theta, double ratio) {
  if (ratio <= 0.0) throw GeometryError("anisotropy ratio must be positive");
  CoefficientField f;
  f.kind = CoefficientKind::RotationAniso;
  f.theta = theta;
  f.ratio = ratio;
  return f;
}

Matrix2 CoefficientField::eval(Vec2) const {
  switch (kind) {
    case CoefficientKind::Identity:
      return {1.0, 0.0, 1.0};
    case CoefficientKind::Diagonal:
      return {ratio, 0.0, diag_b};
    case CoefficientKind::RotationAniso: {
      const double c = std::cos(theta), s = std::sin(theta);
      // R diag(ratio, 1) R^T
      return {ratio * c * c + s * s, (ratio - 1.0) * s * c, ratio * s * s + c * c};
    }
  }
  return {1.0, 0.0, 1.0};
}

double CoefficientField::lambda_min() const {
  switch (kind) {
    case CoefficientKind::Identity: return 1.0;
    case CoefficientKind::Diagonal: return std::min(ratio, diag_b);
    case CoefficientKind::RotationAniso: return std::min(ratio, 1.0);
  }
  return 1.0;
}

double CoefficientField::lambda_max() const {
  switch (kind) {
    case CoefficientKind::Identity: return 1.0;
    case CoefficientKind::Diagonal: return std::max(ratio, diag_b);
    case CoefficientKind::RotationAniso: return std::max(ratio, 1.0);
  }
  return 1.0;
}

// ---------------------------------------------------------------------------
// BoundaryData

double BoundaryData::eval(Vec2 p) const {
  switch (kind) {
    case PhiKind::Constant: return value;
    case PhiKind::LinearXn: return p.y;
    case PhiKind::LinearX1: return p.x;
    case PhiKind::LinearXnCentered: return p.y - center;
    case PhiKind::Affine: return ax * p.x + ay * p.y + value;
  }
  return 0.0;
}

Vec2 BoundaryData::grad(Vec2) const {
  switch (kind) {
    case PhiKind::Constant: return {0.0, 0.0};
    case PhiKind::LinearXn: return {0.0, 1.0};
    case PhiKind::LinearX1: return {1.0, 0.0};
    case PhiKind::LinearXnCentered: return {0.0, 1.0};
    case PhiKind::Affine: return {ax, ay};
  }
  return {0.0, 0.0};
}

// ---------------------------------------------------------------------------
// Polyline

double Polyline::signed_area() const {
  double a = 0.0;
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(pts[i], pts[(i + 1) % n]);
  return 0.5 * a;
}

bool Polyline::is_convex(double tol) const {
  const std::size_t n = pts.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e1 = pts[(i + 1) % n] - pts[i];
    const Vec2 e2 = pts[(i + 2) % n] - pts[(i + 1) % n];
    const double scale = std::max(norm(e1) * norm(e2), 1e-300);
    if (cross(e1, e2) < -tol * scale) return false;
  }
  return true;
}

double Polyline::min_distance_to(const Polyline& other) const {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = pts.size(), m = other.pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = pts[i], b = pts[(i + 1) % n];
    for (std::size_t j = 0; j < m; ++j)
      best = std::min(best, segment_segment_distance(a, b, other.pts[j], other.pts[(j + 1) % m]));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Scene

double Scene::gap_thickness(double x) const {
  const GapProfile& p = params_.profile;
  if (std::abs(x) > p.neck_halfwidth * (1.0 + 1e-12))
    throw GeometryError("gap_thickness evaluated outside |x| <= R1");
  return params_.epsilon + p.h1_raw(x) - p.h2_raw(x);
}

const Polyline& Scene::inclusion_bottom() const {
  if (params_.mode != SceneMode::TwoInclusion)
    throw GeometryError("no bottom inclusion in inclusion-vs-boundary mode");
  return d2_;
}

bool Scene::in_gap_block(Vec2 p, double tol) const {
  const GapProfile& pr = params_.profile;
  if (std::abs(p.x) > pr.neck_halfwidth + tol) return false;
  const double x = std::clamp(p.x, -pr.neck_halfwidth, pr.neck_halfwidth);
  return p.y >= bottom_curve(x) - tol && p.y <= top_curve(x) + tol;
}

void Scene::build_gap_grid() {
  const GapProfile& pr = params_.profile;
  const double R0 = pr.flat_halfwidth, R1 = pr.neck_halfwidth;
  const double hb = boundary_spacing_;
  const double lf = params_.lateral_factor;

  auto spacing = [&](double x) {
    const double delta = gap_thickness(x);
    return std::min({hb, std::sqrt(delta), lf * delta});
  };

  // march the positive half, pinning the flat rim and the neck end exactly
  std::vector<double> pos{0.0};
  auto march_to = [&](double target) {
    while (true) {
      const double x = pos.back();
      const double s = spacing(x);
      if (x + s >= target - 0.45 * s) {
        if (target > x + 1e-15) pos.push_back(target);
        return;
      }
      pos.push_back(x + s);
    }
  };
  if (R0 > 0.0) march_to(R0);
  march_to(R1);

  gap_xi_.clear();
  gap_xi_.reserve(2 * pos.size());
  for (auto it = pos.rbegin(); it != pos.rend(); ++it)
    if (*it > 0.0) gap_xi_.push_back(-*it);
  gap_xi_.insert(gap_xi_.end(), pos.begin(), pos.end());
}

void Scene::build_two_inclusion() {
  const GapProfile& pr = params_.profile;
  const double R1 = pr.neck_halfwidth;
  const double eps = params_.epsilon;
  const double H = params_.closure_height;
  const double hb = boundary_spacing_;

  const double top_end = eps + pr.h1_raw(R1);
  const double bot_end = pr.h2_raw(R1);
  const double Hb = H - eps;  // wall-bottom depth of D2, mirror of H about eps/2
  // even count keeps the cap apex on the symmetry axis
  int ncap = std::max(8, static_cast<int>(std::ceil(M_PI * R1 / hb)));
  if (ncap % 2 != 0) ++ncap;

  // D1 closure: right wall up, cap over the top, left wall down (CCW),
  // including the two gap junctions
  d1_closure_.clear();
  d1_closure_.push_back({R1, top_end});
  for (double y : interior_steps(top_end, H, hb)) d1_closure_.push_back({R1, y});
  for (int k = 0; k <= ncap; ++k) {
    const double th = M_PI * (static_cast<double>(k) / ncap);
    d1_closure_.push_back({R1 * std::cos(th), H + R1 * std::sin(th)});
  }
  for (double y : interior_steps(H, top_end, hb)) d1_closure_.push_back({-R1, y});
  d1_closure_.push_back({-R1, top_end});

  d1_.tag = BoundaryTag::InclusionTop;
  d1_.pts.clear();
  for (double x : gap_xi_) d1_.pts.push_back({x, eps + pr.h1_raw(x)});
  d1_.pts.insert(d1_.pts.end(), d1_closure_.begin() + 1, d1_closure_.end() - 1);
  dedupe_loop(d1_.pts);

  // D2 closure: left wall down, cap under the bottom, right wall up (CCW)
  d2_closure_.clear();
  d2_closure_.push_back({-R1, bot_end});
  for (double y : interior_steps(bot_end, -Hb, hb)) d2_closure_.push_back({-R1, y});
  for (int k = 0; k <= ncap; ++k) {
    const double th = M_PI + M_PI * (static_cast<double>(k) / ncap);
    d2_closure_.push_back({R1 * std::cos(th), -Hb + R1 * std::sin(th)});
  }
  for (double y : interior_steps(-Hb, bot_end, hb)) d2_closure_.push_back({R1, y});
  d2_closure_.push_back({R1, bot_end});

  d2_.tag = BoundaryTag::InclusionBottom;
  d2_.pts.clear();
  for (auto it = gap_xi_.rbegin(); it != gap_xi_.rend(); ++it)
    d2_.pts.push_back({*it, pr.h2_raw(*it)});
  d2_.pts.insert(d2_.pts.end(), d2_closure_.begin() + 1, d2_closure_.end() - 1);
  dedupe_loop(d2_.pts);

  if (d1_.signed_area() <= 0.0 || d2_.signed_area() <= 0.0)
    throw GeometryError("inclusion closure produced a nonpositively oriented loop");
  if (!d1_.is_convex(1e-9) || !d2_.is_convex(1e-9))
    throw GeometryError("inclusion closure is not convex");

  // outer circle: symmetric even ring about the gap midpoint; the half-step
  // offset keeps its angles clear of the capsule apex angles
  outer_.tag = BoundaryTag::Outer;
  outer_.pts.clear();
  const Vec2 c = gap_midpoint();
  int nout = std::max(16, static_cast<int>(std::ceil(2.0 * M_PI * outer_radius_ / hb)));
  if (nout % 2 != 0) ++nout;
  for (int k = 0; k < nout; ++k) {
    const double th = 2.0 * M_PI * ((static_cast<double>(k) + 0.5) / nout);
    outer_.pts.push_back({c.x + outer_radius_ * std::cos(th), c.y + outer_radius_ * std::sin(th)});
  }

  const double apex = H + R1 - c.y;
  if (apex >= 0.95 * outer_radius_)
    throw GeometryError("outer boundary too close to the inclusions");
}

void Scene::build_boundary_mode() {
  const GapProfile& pr = params_.profile;
  const double R1 = pr.neck_halfwidth;
  const double eps = params_.epsilon;
  const double H = params_.closure_height;
  const double hb = boundary_spacing_;
  const double W = outer_radius_;  // dome radius; floor spans [-W, W]

  const double top_end = eps + pr.h1_raw(R1);
  if (H + R1 >= 0.9 * W) throw GeometryError("dome radius too small for the inclusion");
  int ncap = std::max(8, static_cast<int>(std::ceil(M_PI * R1 / hb)));
  if (ncap % 2 != 0) ++ncap;

  // D1 closure and polyline, exactly as in two-inclusion mode
  d1_closure_.clear();
  d1_closure_.push_back({R1, top_end});
  for (double y : interior_steps(top_end, H, hb)) d1_closure_.push_back({R1, y});
  for (int k = 0; k <= ncap; ++k) {
    const double th = M_PI * (static_cast<double>(k) / ncap);
    d1_closure_.push_back({R1 * std::cos(th), H + R1 * std::sin(th)});
  }
  for (double y : interior_steps(H, top_end, hb)) d1_closure_.push_back({-R1, y});
  d1_closure_.push_back({-R1, top_end});

  d1_.tag = BoundaryTag::InclusionTop;
  d1_.pts.clear();
  for (double x : gap_xi_) d1_.pts.push_back({x, eps + pr.h1_raw(x)});
  d1_.pts.insert(d1_.pts.end(), d1_closure_.begin() + 1, d1_closure_.end() - 1);
  dedupe_loop(d1_.pts);
  if (!d1_.is_convex(1e-9)) throw GeometryError("inclusion closure is not convex");

  // outer arc: from the right floor junction along the flat extension, over
  // the dome, and back along the left extension (mirror-symmetric samples)
  const double floor_ext = pr.h2_raw(R1);
  const double bot_end = floor_ext;
  outer_arc_.clear();
  outer_arc_.push_back({R1, bot_end});
  std::vector<double> ext = interior_steps(R1, W, hb);
  for (double x : ext) outer_arc_.push_back({x, floor_ext});
  outer_arc_.push_back({W, floor_ext});
  // half-step offset keeps dome samples clear of the symmetry axis, so the
  // stitch merge against the inclusion cap never sees tied parameters
  int ndome = std::max(16, static_cast<int>(std::ceil(M_PI * W / hb)));
  if (ndome % 2 != 0) ++ndome;
  for (int k = 0; k < ndome; ++k) {
    const double th = M_PI * ((static_cast<double>(k) + 0.5) / ndome);
    outer_arc_.push_back({W * std::cos(th), floor_ext + W * std::sin(th)});
  }
  outer_arc_.push_back({-W, floor_ext});
  for (auto it = ext.rbegin(); it != ext.rend(); ++it) outer_arc_.push_back({-*it, floor_ext});
  outer_arc_.push_back({-R1, bot_end});

  // closed outer polyline: floor gap section left->right, then the arc
  outer_.tag = BoundaryTag::Outer;
  outer_.pts.clear();
  for (double x : gap_xi_) outer_.pts.push_back({x, pr.h2_raw(x)});
  outer_.pts.insert(outer_.pts.end(), outer_arc_.begin() + 1, outer_arc_.end() - 1);
  dedupe_loop(outer_.pts);
}

Scene Scene::build(const SceneParams& params) {
  Scene s;
  s.params_ = params;
  params.profile.validate();
  if (params.epsilon <= 0.0) throw GeometryError("epsilon must be positive");

  const double R1 = params.profile.neck_halfwidth;
  s.outer_radius_ = params.outer_radius > 0.0 ? params.outer_radius : 4.0 * R1;
  if (s.outer_radius_ <= 3.0 * R1) throw GeometryError("outer_radius must exceed 3*R1");
  s.boundary_spacing_ = params.boundary_spacing > 0.0 ? params.boundary_spacing : R1 / 20.0;
  if (params.lateral_factor <= 0.0) throw GeometryError("lateral_factor must be positive");

  const double sup_h1 = params.profile.h1_raw(R1);
  if (params.closure_height <= sup_h1 + params.epsilon)
    throw GeometryError("closure_height must exceed sup h1 + epsilon");

  s.build_gap_grid();
  if (params.mode == SceneMode::TwoInclusion)
    s.build_two_inclusion();
  else
    s.build_boundary_mode();
  return s;
}

// ---------------------------------------------------------------------------
// Assumption validation

bool AssumptionReport::all_passed() const {
  for (const auto& c : checks)
    if (c.applicable && !c.passed) return false;
  return true;
}

AssumptionReport Scene::validate_assumptions(int grid_points) const {
  const GapProfile& pr = params_.profile;
  const double R0 = pr.flat_halfwidth, R1 = pr.neck_halfwidth;
  const int n = std::max(grid_points, 101);
  const double h = 2.0 * R1 / (n - 1);

  AssumptionReport rep;

  {
    AssumptionCheck c{"flat_on_sigma"};
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = -R1 + i * h;
      if (std::abs(x) <= R0)
        worst = std::max({worst, std::abs(pr.h1_raw(x)), std::abs(pr.h2_raw(x))});
    }
    c.worst = worst;
    c.passed = worst <= 1e-14;
    c.applicable = R0 > 0.0;
    if (!c.applicable) c.detail = "point contact set";
    rep.checks.push_back(c);
  }

  {
    AssumptionCheck c{"separation_off_sigma"};
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double x = -R1 + i * h;
      if (std::abs(x) > R0 + h) worst = std::min(worst, pr.h1_raw(x) - pr.h2_raw(x));
    }
    c.worst = worst;
    c.passed = worst > 0.0;
    rep.checks.push_back(c);
  }

  {
    AssumptionCheck c{"gradient_at_rim"};
    const double g = std::max(std::abs(pr.h1_prime_raw(R0)), std::abs(pr.h2_prime_raw(R0)));
    c.worst = g;
    c.passed = g <= 1e-12;
    rep.checks.push_back(c);
  }

  {
    AssumptionCheck c{"hessian_floor"};
    if (pr.growth_order != 2) {
      c.applicable = false;
      c.detail = "applies to growth order 2 only";
    } else {
      const double kappa0 = pr.kappa0();
      double worst = std::numeric_limits<double>::infinity();
      for (int i = 1; i + 1 < n; ++i) {
        const double x = -R1 + i * h;
        if (pr.dist_to_sigma(x) <= 1.5 * h || std::abs(x) > R1 - h) continue;
        const double d2 = ((pr.h1_raw(x + h) - pr.h2_raw(x + h)) -
                           2.0 * (pr.h1_raw(x) - pr.h2_raw(x)) +
                           (pr.h1_raw(x - h) - pr.h2_raw(x - h))) /
                          (h * h);
        worst = std::min(worst, d2);
      }
      c.worst = worst;
      c.passed = worst >= kappa0 * (1.0 - 1e-6);
    }
    rep.checks.push_back(c);
  }

  {
    AssumptionCheck c{"c2_seminorm"};
    const double kappa1 = pr.kappa1();
    double worst = 0.0;
    for (int i = 1; i + 1 < n; ++i) {
      const double x = -R1 + i * h;
      for (bool top : {true, false}) {
        auto f = [&](double t) { return top ? pr.h1_raw(t) : pr.h2_raw(t); };
        const double v = std::abs(f(x));
        const double g1 = std::abs((f(x + h) - f(x - h)) / (2.0 * h));
        const double g2 = std::abs((f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h));
        worst = std::max({worst, v, g1, g2});
      }
    }
    c.worst = worst;
    c.passed = worst <= kappa1;
    rep.checks.push_back(c);
  }

  return rep;
}

// ---------------------------------------------------------------------------
// Region

bool Region::contains(Vec2 p, const Scene& scene) const {
  switch (kind) {
    case RegionKind::All:
      return true;
    case RegionKind::Sigma:
      if (std::abs(p.x) > scene.profile().flat_halfwidth) return false;
      return scene.in_gap_block(p);
    case RegionKind::OmegaR:
      if (std::abs(p.x) >= r) return false;
      return scene.in_gap_block(p);
    case RegionKind::LocalSlab:
      if (std::abs(p.x - z) >= t) return false;
      return scene.in_gap_block(p);
    case RegionKind::Exterior:
      return !scene.in_gap_block(p);
  }
  return false;
}

std::string Region::name() const {
  switch (kind) {
    case RegionKind::All: return "all";
    case RegionKind::Sigma: return "sigma";
    case RegionKind::OmegaR: return "omega_r";
    case RegionKind::LocalSlab: return "local_slab";
    case RegionKind::Exterior: return "exterior";
  }
  return "unknown";
}

}  // namespace narrowgap
