#include "narrowgap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace narrowgap {

namespace {

double tri_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * cross(b - a, c - a);
}

// Split rule for a structured quad (ll, lr, ur, ul) given CCW.  Non-tied
// quads split along the shorter diagonal (mirror-consistent by itself);
// ties use a quadrant rule about the symmetry center so the triangulation
// stays invariant under x- and y-mirror of symmetric scenes.
bool split_along_ll_ur(const Vec2& ll, const Vec2& lr, const Vec2& ur, const Vec2& ul,
                       Vec2 sym_center) {
  const double d1 = norm(ur - ll);
  const double d2 = norm(ul - lr);
  const double tol = 1e-12 * std::max(d1, d2);
  if (std::abs(d1 - d2) > tol) return d1 < d2;
  const Vec2 c = 0.25 * (ll + lr + ur + ul);
  const bool right = c.x >= sym_center.x;
  const bool up = c.y >= sym_center.y;
  return right != up;
}

struct MeshBuilder {
  Mesh m;
  Vec2 sym_center{0.0, 0.0};

  int add_vertex(Vec2 p, BoundaryTag tag) {
    m.vertices.push_back(p);
    m.vertex_tags.push_back(tag);
    return static_cast<int>(m.vertices.size()) - 1;
  }

  void add_tri(int a, int b, int c, TriRegion region) {
    if (a == b || b == c || a == c) return;  // collapsed edge
    double ar = tri_area(m.vertices[a], m.vertices[b], m.vertices[c]);
    if (ar < 0.0) {
      std::swap(b, c);
      ar = -ar;
    }
    if (ar == 0.0) return;
    m.triangles.push_back({a, b, c});
    m.tri_regions.push_back(region);
  }

  void add_quad(int ill, int ilr, int iur, int iul, TriRegion region) {
    const int ids[4] = {ill, ilr, iur, iul};
    int uniq = 0;
    for (int i = 0; i < 4; ++i) {
      bool dup = false;
      for (int j = 0; j < i; ++j) dup = dup || ids[i] == ids[j];
      if (!dup) ++uniq;
    }
    if (uniq < 3) return;
    if (uniq == 3) {  // degenerate side, emit the surviving triangle
      if (ill == ilr) { add_tri(ill, iur, iul, region); return; }
      if (ilr == iur) { add_tri(ill, ilr, iul, region); return; }
      if (iur == iul) { add_tri(ill, ilr, iur, region); return; }
      if (iul == ill) { add_tri(ill, ilr, iur, region); return; }
      add_tri(ill, ilr, iur, region);
      return;
    }
    const Vec2 &ll = m.vertices[ill], &lr = m.vertices[ilr];
    const Vec2 &ur = m.vertices[iur], &ul = m.vertices[iul];
    if (split_along_ll_ur(ll, lr, ur, ul, sym_center)) {
      add_tri(ill, ilr, iur, region);
      add_tri(ill, iur, iul, region);
    } else {
      add_tri(ilr, iur, iul, region);
      add_tri(ilr, iul, ill, region);
    }
  }
};

// radial step sequence: grow geometrically from h_first, capped at h_far
std::vector<double> layer_fractions(double total, double h_first, double h_far, double growth) {
  std::vector<double> steps;
  double s = std::min(h_first, total);
  double acc = 0.0;
  while (acc + s < total - 0.5 * std::min(s, h_far)) {
    steps.push_back(s);
    acc += s;
    s = std::min(s * growth, h_far);
  }
  steps.push_back(total - acc);
  std::vector<double> t{0.0};
  double run = 0.0;
  for (double st : steps) {
    run += st;
    t.push_back(run / total);
  }
  t.back() = 1.0;
  return t;
}

// point where the ray from `center` through `dir` crosses the closed polygon
Vec2 ray_polygon_point(const std::vector<Vec2>& poly, Vec2 center, Vec2 dir) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i] - center, b = poly[(i + 1) % n] - center;
    const double ca = cross(dir, a), cb = cross(dir, b);
    if ((ca > 0.0 && cb > 0.0) || (ca < 0.0 && cb < 0.0)) continue;
    const double denom = ca - cb;
    if (denom == 0.0) continue;
    const double t = ca / denom;
    const Vec2 p = a + t * (b - a);
    if (dot(p, dir) > 0.0) return center + p;
  }
  throw MeshError("ray does not cross the outer polyline");
}

std::vector<double> cumulative_fractions(const std::vector<Vec2>& pts) {
  std::vector<double> s(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i)
    s[i] = s[i - 1] + norm(pts[i] - pts[i - 1]);
  const double total = s.back();
  for (double& v : s) v /= total;
  return s;
}

Vec2 point_at_fraction(const std::vector<Vec2>& pts, const std::vector<double>& s, double f) {
  if (f <= 0.0) return pts.front();
  if (f >= 1.0) return pts.back();
  const auto it = std::upper_bound(s.begin(), s.end(), f);
  const std::size_t k = std::max<std::size_t>(1, it - s.begin()) - 0;
  const std::size_t hi = std::min(k, s.size() - 1);
  const std::size_t lo = hi - 1;
  const double span = s[hi] - s[lo];
  const double t = span > 0.0 ? (f - s[lo]) / span : 0.0;
  return pts[lo] + t * (pts[hi] - pts[lo]);
}

}  // namespace

// ---------------------------------------------------------------------------

double Mesh::area(int t) const {
  const auto& tr = triangles[t];
  return tri_area(vertices[tr[0]], vertices[tr[1]], vertices[tr[2]]);
}

Vec2 Mesh::centroid(int t) const {
  const auto& tr = triangles[t];
  return (1.0 / 3.0) * (vertices[tr[0]] + vertices[tr[1]] + vertices[tr[2]]);
}

std::array<int, 4> Mesh::tag_counts() const {
  std::array<int, 4> c{0, 0, 0, 0};
  for (BoundaryTag t : vertex_tags) ++c[static_cast<int>(t)];
  return c;
}

// ---------------------------------------------------------------------------

Mesh triangulate_scene(const Scene& scene, const GradingPolicy& policy) {
  if (policy.n_layers < 3) throw MeshError("grading policy requires n_layers >= 3");
  const double h_far = policy.h_far > 0.0 ? policy.h_far : 3.0 * scene.boundary_spacing();
  if (h_far <= 0.0) throw MeshError("h_far must be positive");

  const std::vector<double>& xi = scene.gap_lateral_grid();
  const int ncol = static_cast<int>(xi.size());
  const int nlay = policy.n_layers;
  const bool two_inclusion = scene.mode() == SceneMode::TwoInclusion;

  MeshBuilder b;
  b.sym_center = scene.gap_midpoint();

  // --- gap block: mapped structured grid -------------------------------
  const BoundaryTag bottom_tag = two_inclusion ? BoundaryTag::InclusionBottom : BoundaryTag::Outer;
  std::vector<int> gv(static_cast<std::size_t>(ncol) * (nlay + 1));
  auto gid = [&](int i, int j) -> int& { return gv[static_cast<std::size_t>(i) * (nlay + 1) + j]; };
  for (int i = 0; i < ncol; ++i) {
    const double x = xi[i];
    const double bot = scene.bottom_curve(x);
    const double delta = scene.gap_thickness(x);
    for (int j = 0; j <= nlay; ++j) {
      const double sigma = static_cast<double>(j) / nlay;
      BoundaryTag tag = BoundaryTag::Interior;
      if (j == 0) tag = bottom_tag;
      if (j == nlay) tag = BoundaryTag::InclusionTop;
      gid(i, j) = b.add_vertex({x, bot + sigma * delta}, tag);
    }
  }
  for (int i = 0; i + 1 < ncol; ++i)
    for (int j = 0; j < nlay; ++j)
      b.add_quad(gid(i, j), gid(i + 1, j), gid(i + 1, j + 1), gid(i, j + 1), TriRegion::GapBlock);

  // --- inclusion closures ----------------------------------------------
  // closure sections exclude the two junction vertices already in the grid
  auto add_section = [&](const std::vector<Vec2>& sec, BoundaryTag tag) {
    std::vector<int> ids;
    for (std::size_t k = 1; k + 1 < sec.size(); ++k) ids.push_back(b.add_vertex(sec[k], tag));
    return ids;
  };
  const std::vector<int> d1c = add_section(scene.d1_closure(), BoundaryTag::InclusionTop);

  if (two_inclusion) {
    const std::vector<int> d2c = add_section(scene.d2_closure(), BoundaryTag::InclusionBottom);

    // capsule hull loop, CCW: right glue up, D1 closure, left glue down,
    // D2 closure (left junction -> bottom cap -> right junction)
    std::vector<int> capsule;
    for (int j = 0; j <= nlay; ++j) capsule.push_back(gid(ncol - 1, j));
    capsule.insert(capsule.end(), d1c.begin(), d1c.end());
    for (int j = nlay; j >= 0; --j) capsule.push_back(gid(0, j));
    capsule.insert(capsule.end(), d2c.begin(), d2c.end());

    // radial rings from the capsule onto the outer polyline; the last ring
    // lies exactly on polyline segments at the capsule angles
    const Vec2 c = scene.gap_midpoint();
    const std::vector<Vec2>& poly = scene.outer_boundary().pts;
    std::vector<Vec2> targets;
    targets.reserve(capsule.size());
    double dmin = std::numeric_limits<double>::infinity();
    for (int v : capsule) {
      const Vec2 p = b.m.vertices[v];
      targets.push_back(ray_polygon_point(poly, c, p - c));
      dmin = std::min(dmin, norm(targets.back() - p));
    }
    const std::vector<double> t =
        layer_fractions(dmin, 0.75 * scene.boundary_spacing(), h_far, policy.radial_growth);
    const int nring = static_cast<int>(t.size()) - 1;

    std::vector<int> prev = capsule;
    for (int j = 1; j <= nring; ++j) {
      const bool last = j == nring;
      std::vector<int> ring;
      ring.reserve(capsule.size());
      for (std::size_t k = 0; k < capsule.size(); ++k) {
        const Vec2 p = b.m.vertices[capsule[k]];
        const Vec2 q = last ? targets[k] : p + t[j] * (targets[k] - p);
        ring.push_back(b.add_vertex(q, last ? BoundaryTag::Outer : BoundaryTag::Interior));
      }
      const std::size_t n = capsule.size();
      for (std::size_t i = 0; i < n; ++i)
        b.add_quad(prev[i], prev[(i + 1) % n], ring[(i + 1) % n], ring[i], TriRegion::Exterior);
      prev = ring;
    }
  } else {
    // open inner chain: right glue up, D1 closure, left glue down
    std::vector<int> inner;
    for (int j = 0; j <= nlay; ++j) inner.push_back(gid(ncol - 1, j));
    inner.insert(inner.end(), d1c.begin(), d1c.end());
    for (int j = nlay; j >= 0; --j) inner.push_back(gid(0, j));

    const std::vector<Vec2>& arc = scene.outer_arc();
    const std::vector<double> arc_s = cumulative_fractions(arc);

    std::vector<Vec2> inner_pts;
    for (int v : inner) inner_pts.push_back(b.m.vertices[v]);
    const std::vector<double> inner_s = cumulative_fractions(inner_pts);

    std::vector<Vec2> targets;
    targets.reserve(inner.size());
    double dmax = 0.0;
    for (std::size_t k = 0; k < inner.size(); ++k) {
      targets.push_back(point_at_fraction(arc, arc_s, inner_s[k]));
      dmax = std::max(dmax, norm(targets[k] - inner_pts[k]));
    }
    const std::vector<double> t =
        layer_fractions(dmax, 0.75 * scene.boundary_spacing(), h_far, policy.radial_growth);
    const int nring = static_cast<int>(t.size()) - 1;

    // the last ring lies on the arc polyline; shared junction vertices are
    // reused so the collapsed end columns fan out naturally
    std::vector<int> prev = inner;
    for (int j = 1; j <= nring; ++j) {
      const bool last = j == nring;
      std::vector<int> ring;
      for (std::size_t k = 0; k < inner.size(); ++k) {
        const Vec2 q = last ? targets[k] : inner_pts[k] + t[j] * (targets[k] - inner_pts[k]);
        if (norm(q - inner_pts.front()) < 1e-13)
          ring.push_back(inner.front());
        else if (norm(q - inner_pts.back()) < 1e-13)
          ring.push_back(inner.back());
        else
          ring.push_back(b.add_vertex(q, last ? BoundaryTag::Outer : BoundaryTag::Interior));
      }
      for (std::size_t i = 0; i + 1 < inner.size(); ++i)
        b.add_quad(prev[i], ring[i], ring[i + 1], prev[i + 1], TriRegion::Exterior);
      prev = ring;
    }
  }

  // --- validation --------------------------------------------------------
  for (int tI = 0; tI < b.m.n_triangles(); ++tI) {
    if (b.m.area(tI) <= 0.0)
      throw MeshError("nonpositive-area triangle after mapping; raise the anisotropy cap "
                      "or refine the grading policy");
  }
  return std::move(b.m);
}

// ---------------------------------------------------------------------------

QualityReport mesh_quality_report(const Mesh& mesh, double anisotropy_cap) {
  QualityReport rep;
  rep.n_triangles = mesh.n_triangles();
  rep.n_vertices = mesh.n_vertices();
  rep.min_angle_deg = 180.0;
  rep.min_angle_raw_deg = 180.0;
  rep.min_area = std::numeric_limits<double>::infinity();

  auto min_angle = [](Vec2 a, Vec2 b, Vec2 c) {
    const double la = norm(c - b), lb = norm(a - c), lc = norm(b - a);
    auto ang = [](double opp, double s1, double s2) {
      double v = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2);
      v = std::clamp(v, -1.0, 1.0);
      return std::acos(v);
    };
    const double m = std::min({ang(la, lb, lc), ang(lb, la, lc), ang(lc, la, lb)});
    return m * 180.0 / M_PI;
  };

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tr = mesh.triangles[t];
    const Vec2 a = mesh.vertices[tr[0]], b = mesh.vertices[tr[1]], c = mesh.vertices[tr[2]];
    const double ar = tri_area(a, b, c);
    if (ar <= 0.0) ++rep.nonpositive_area;
    rep.min_area = std::min(rep.min_area, ar);

    const double l0 = norm(b - a), l1 = norm(c - b), l2 = norm(a - c);
    const double ratio = std::max({l0, l1, l2}) / std::max(std::min({l0, l1, l2}), 1e-300);
    rep.max_edge_ratio = std::max(rep.max_edge_ratio, ratio);
    if (ratio > anisotropy_cap && mesh.tri_regions[t] == TriRegion::GapBlock)
      ++rep.anisotropy_violations;

    rep.min_angle_raw_deg = std::min(rep.min_angle_raw_deg, min_angle(a, b, c));
    if (mesh.tri_regions[t] == TriRegion::GapBlock) {
      // normalize out the intended cell anisotropy before measuring angles
      const double w = std::max({std::abs(b.x - a.x), std::abs(c.x - b.x), std::abs(a.x - c.x)});
      const double h = std::max({std::abs(b.y - a.y), std::abs(c.y - b.y), std::abs(a.y - c.y)});
      if (w > 0.0 && h > 0.0) {
        const double sx = 1.0 / w, sy = 1.0 / h;
        const Vec2 an{a.x * sx, a.y * sy}, bn{b.x * sx, b.y * sy}, cn{c.x * sx, c.y * sy};
        rep.min_angle_deg = std::min(rep.min_angle_deg, min_angle(an, bn, cn));
      }
    } else {
      rep.min_angle_deg = std::min(rep.min_angle_deg, min_angle(a, b, c));
    }
  }
  if (mesh.n_triangles() == 0) {
    rep.min_angle_deg = rep.min_angle_raw_deg = 0.0;
    rep.min_area = 0.0;
  }
  return rep;
}

EulerStats euler_stats(const Mesh& mesh) {
  EulerStats st;
  st.v = mesh.n_vertices();
  st.f = mesh.n_triangles();
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& tr : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = tr[k], b = tr[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_count[{a, b}];
    }
  }
  st.e = static_cast<long long>(edge_count.size());

  // boundary loops: follow edges adjacent to exactly one triangle
  std::map<int, std::vector<int>> link;
  for (const auto& [e, c] : edge_count) {
    if (c == 1) {
      link[e.first].push_back(e.second);
      link[e.second].push_back(e.first);
    }
  }
  std::set<int> seen;
  for (const auto& [v, nbrs] : link) {
    if (seen.count(v)) continue;
    ++st.boundary_loops;
    int cur = v, prev = -1;
    while (!seen.count(cur)) {
      seen.insert(cur);
      const auto& nb = link[cur];
      int next = -1;
      for (int cand : nb)
        if (cand != prev) { next = cand; break; }
      if (next < 0) break;
      prev = cur;
      cur = next;
    }
  }
  return st;
}

// ---------------------------------------------------------------------------

Mesh annulus_mesh(double r0, double r1, int n_radial, int n_theta) {
  if (r0 <= 0.0 || r1 <= r0) throw MeshError("annulus requires 0 < r0 < r1");
  if (n_radial < 1 || n_theta < 8) throw MeshError("annulus resolution too coarse");
  MeshBuilder b;
  b.sym_center = {0.0, 0.0};
  std::vector<int> ids(static_cast<std::size_t>(n_radial + 1) * n_theta);
  auto vid = [&](int i, int k) -> int& {
    return ids[static_cast<std::size_t>(i) * n_theta + (k % n_theta)];
  };
  for (int i = 0; i <= n_radial; ++i) {
    const double r = r0 + (r1 - r0) * (static_cast<double>(i) / n_radial);
    BoundaryTag tag = BoundaryTag::Interior;
    if (i == 0) tag = BoundaryTag::InclusionTop;
    if (i == n_radial) tag = BoundaryTag::Outer;
    for (int k = 0; k < n_theta; ++k) {
      const double th = 2.0 * M_PI * (static_cast<double>(k) / n_theta);
      vid(i, k) = b.add_vertex({r * std::cos(th), r * std::sin(th)}, tag);
    }
  }
  for (int i = 0; i < n_radial; ++i)
    for (int k = 0; k < n_theta; ++k)
      b.add_quad(vid(i, k), vid(i, k + 1), vid(i + 1, k + 1), vid(i + 1, k), TriRegion::Exterior);
  return std::move(b.m);
}

// ---------------------------------------------------------------------------

void write_mesh_csv(const Mesh& mesh, const std::string& vertices_path,
                    const std::string& triangles_path) {
  FILE* fv = std::fopen(vertices_path.c_str(), "w");
  if (!fv) throw MeshError("cannot open " + vertices_path);
  std::fprintf(fv, "id,x,y,tag\n");
  static const char* tag_names[] = {"interior", "inclusion_top", "inclusion_bottom", "outer"};
  for (int i = 0; i < mesh.n_vertices(); ++i)
    std::fprintf(fv, "%d,%.17g,%.17g,%s\n", i, mesh.vertices[i].x, mesh.vertices[i].y,
                 tag_names[static_cast<int>(mesh.vertex_tags[i])]);
  std::fclose(fv);

  FILE* ft = std::fopen(triangles_path.c_str(), "w");
  if (!ft) throw MeshError("cannot open " + triangles_path);
  std::fprintf(ft, "id,v0,v1,v2,region\n");
  for (int t = 0; t < mesh.n_triangles(); ++t)
    std::fprintf(ft, "%d,%d,%d,%d,%s\n", t, mesh.triangles[t][0], mesh.triangles[t][1],
                 mesh.triangles[t][2],
                 mesh.tri_regions[t] == TriRegion::GapBlock ? "gap" : "exterior");
  std::fclose(ft);
}

}  // namespace narrowgap
