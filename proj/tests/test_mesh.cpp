#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "narrowgap/mesh.hpp"

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



bool conforming(const Mesh& m) {
  // every interior edge shared by exactly two triangles with matching ids
  std::map<std::pair<int, int>, int> cnt;
  for (const auto& t : m.triangles)
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++cnt[{a, b}];
    }
  for (const auto& [e, c] : cnt)
    if (c > 2) return false;
  return true;
}

double dist_to_polyline(Vec2 p, const Polyline& poly) {
  double best = 1e300;
  const std::size_t n = poly.pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly.pts[i], b = poly.pts[(i + 1) % n];
    const Vec2 ab = b - a;
    double t = dot(p - a, ab) / std::max(dot(ab, ab), 1e-300);
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, norm(p - (a + t * ab)));
  }
  return best;
}

}  // namespace

TEST_CASE("triangulation of the canonical flat scene") {
  Scene s = Scene::build(canonical_flat());
  GradingPolicy g;
  Mesh m = triangulate_scene(s, g);

  CHECK(m.n_triangles() > 0);
  for (int t = 0; t < m.n_triangles(); ++t) CHECK(m.area(t) > 0.0);
  CHECK(conforming(m));

  // at least n_layers cells across the flat gap: count vertices on the x=0 column
  int on_axis = 0;
  for (int v = 0; v < m.n_vertices(); ++v)
    if (m.vertices[v].x == 0.0 && m.vertices[v].y >= 0.0 && m.vertices[v].y <= s.epsilon())
      ++on_axis;
  CHECK(on_axis >= g.n_layers + 1);

  // boundary vertices sit on their tagged component polylines
  for (int v = 0; v < m.n_vertices(); ++v) {
    switch (m.vertex_tags[v]) {
      case BoundaryTag::InclusionTop:
        CHECK(dist_to_polyline(m.vertices[v], s.inclusion_top()) < 1e-10);
        break;
      case BoundaryTag::InclusionBottom:
        CHECK(dist_to_polyline(m.vertices[v], s.inclusion_bottom()) < 1e-10);
        break;
      case BoundaryTag::Outer:
        CHECK(dist_to_polyline(m.vertices[v], s.outer_boundary()) < 1e-10);
        break;
      default:
        break;
    }
  }

  // inclusion-top vertices satisfy the top-curve equation in the neck
  // (wall vertices at |x| = R1 excluded)
  for (int v = 0; v < m.n_vertices(); ++v) {
    if (m.vertex_tags[v] != BoundaryTag::InclusionTop) continue;
    const Vec2 p = m.vertices[v];
    if (std::abs(p.x) < s.profile().neck_halfwidth - 1e-12 &&
        p.y < 0.5 * s.params().closure_height)
      CHECK(std::abs(s.top_curve(p.x) - p.y) < 1e-10);
  }
}

TEST_CASE("euler characteristic matches the loop count") {
  Scene s = Scene::build(canonical_flat());
  Mesh m = triangulate_scene(s, {});
  EulerStats st = euler_stats(m);
  CHECK(st.boundary_loops == 3);  // two inclusions + outer circle
  CHECK(st.consistent());

  SceneParams bp = canonical_flat();
  bp.mode = SceneMode::InclusionVsBoundary;
  Scene sb = Scene::build(bp);
  Mesh mb = triangulate_scene(sb, {});
  EulerStats stb = euler_stats(mb);
  CHECK(stb.boundary_loops == 2);  // inclusion + outer loop
  CHECK(stb.consistent());
  for (int t = 0; t < mb.n_triangles(); ++t) CHECK(mb.area(t) > 0.0);
  CHECK(conforming(mb));
}

TEST_CASE("gap vertex count grows like the inverse square root of the gap") {
  // lateral resolution follows the local thickness, so the column count in
  // the gap integrates to ~ eps^{-1/2} for the point-contact quadratic neck
  std::vector<double> eps{1e-2, 1e-3, 1e-4};
  std::vector<double> counts;
  for (double e : eps) {
    SceneParams p;
    p.profile = {0.0, 1.0, 2, 0.5, 0.5};
    p.epsilon = e;
    p.closure_height = 1.0;
    p.outer_radius = 4.0;
    p.boundary_spacing = 0.2;
    Scene s = Scene::build(p);
    Mesh m = triangulate_scene(s, {});
    int gap_tris = 0;
    std::set<int> gap_verts;
    for (int t = 0; t < m.n_triangles(); ++t)
      if (m.tri_regions[t] == TriRegion::GapBlock) {
        ++gap_tris;
        for (int k : m.triangles[t]) gap_verts.insert(k);
      }
    CHECK(gap_tris > 0);
    counts.push_back(static_cast<double>(gap_verts.size()));
  }
  // least-squares slope of log(count) vs log(eps)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(eps.size());
  for (int i = 0; i < n; ++i) {
    const double X = std::log(eps[i]), Y = std::log(counts[i]);
    sx += X; sy += Y; sxx += X * X; sxy += X * Y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.24));  // band -0.5 +/- 0.12
  CHECK(counts[1] > counts[0]);
  CHECK(counts[2] > counts[1]);
}

TEST_CASE("degenerate grading policy is rejected") {
  Scene s = Scene::build(canonical_flat());
  GradingPolicy g;
  g.n_layers = 1;
  CHECK_THROWS_AS(triangulate_scene(s, g), MeshError);
}

TEST_CASE("quality report on a uniform equilateral patch") {
  Mesh m;
  const double h = std::sqrt(3.0) / 2.0;
  // two rows of equilateral triangles
  for (int j = 0; j <= 1; ++j)
    for (int i = 0; i <= 4; ++i)
      m.vertices.push_back({i + 0.5 * j, j * h});
  m.vertex_tags.assign(m.vertices.size(), BoundaryTag::Interior);
  for (int i = 0; i + 1 <= 4; ++i) {
    m.triangles.push_back({i, i + 1, i + 5});
    m.triangles.push_back({i + 1, i + 6, i + 5});
  }
  m.tri_regions.assign(m.triangles.size(), TriRegion::Exterior);
  QualityReport q = mesh_quality_report(m);
  CHECK(q.min_angle_deg == doctest::Approx(60.0).epsilon(1e-6));
  CHECK(q.nonpositive_area == 0);

  // corrupt one orientation: flagged
  std::swap(m.triangles[0][1], m.triangles[0][2]);
  QualityReport q2 = mesh_quality_report(m);
  CHECK(q2.nonpositive_area == 1);
}

TEST_CASE("canonical mesh satisfies the anisotropy cap") {
  Scene s = Scene::build(canonical_flat());
  GradingPolicy g;
  Mesh m = triangulate_scene(s, g);
  QualityReport q = mesh_quality_report(m, g.anisotropy_cap);
  CHECK(q.anisotropy_violations == 0);
  CHECK(q.min_area > 0.0);
}

TEST_CASE("policy refinement keeps boundary tags of persisting vertices") {
  Scene s = Scene::build(canonical_flat());
  GradingPolicy coarse;
  GradingPolicy fine;
  fine.n_layers = 2 * coarse.n_layers;
  fine.h_far = 0.5 * (3.0 * s.boundary_spacing());
  Mesh mc = triangulate_scene(s, coarse);
  Mesh mf = triangulate_scene(s, fine);

  std::map<std::pair<double, double>, BoundaryTag> fine_tags;
  for (int v = 0; v < mf.n_vertices(); ++v)
    fine_tags[{mf.vertices[v].x, mf.vertices[v].y}] = mf.vertex_tags[v];

  int persisted = 0;
  for (int v = 0; v < mc.n_vertices(); ++v) {
    if (mc.vertex_tags[v] == BoundaryTag::Interior) continue;
    auto it = fine_tags.find({mc.vertices[v].x, mc.vertices[v].y});
    if (it != fine_tags.end()) {
      ++persisted;
      CHECK(it->second == mc.vertex_tags[v]);
    }
  }
  CHECK(persisted > 100);
}

TEST_CASE("triangulation is mirror symmetric for symmetric scenes") {
  Scene s = Scene::build(canonical_flat());
  Mesh m = triangulate_scene(s, {});
  // vertex set closed under x -> -x and y -> eps - y up to roundoff
  std::set<std::pair<long long, long long>> keys;
  auto key = [](double x, double y, long long dx, long long dy) {
    return std::make_pair(static_cast<long long>(std::llround(x * 1e10)) + dx,
                          static_cast<long long>(std::llround(y * 1e10)) + dy);
  };
  for (const Vec2& p : m.vertices) keys.insert(key(p.x, p.y, 0, 0));
  auto has_near = [&](double x, double y) {
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy)
        if (keys.count(key(x, y, dx, dy))) return true;
    return false;
  };
  const double eps = s.epsilon();
  int miss_x = 0, miss_y = 0;
  for (const Vec2& p : m.vertices) {
    if (!has_near(-p.x, p.y)) ++miss_x;
    if (!has_near(p.x, eps - p.y)) ++miss_y;
  }
  CHECK(miss_x == 0);
  CHECK(miss_y == 0);
}

TEST_CASE("annulus mesh") {
  Mesh m = annulus_mesh(1.0, 2.0, 8, 64);
  for (int t = 0; t < m.n_triangles(); ++t) CHECK(m.area(t) > 0.0);
  CHECK(conforming(m));
  EulerStats st = euler_stats(m);
  CHECK(st.boundary_loops == 2);
  CHECK(st.consistent());
  double total = 0.0;
  for (int t = 0; t < m.n_triangles(); ++t) total += m.area(t);
  CHECK(total == doctest::Approx(M_PI * 3.0).epsilon(2e-3));
}
