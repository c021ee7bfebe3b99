// Boundary-fitted triangulation of the matrix domain.
//
// The gap block |x| <= R1 is meshed by the mapped structured grid
// (xi, sigma) -> (xi, h2(xi) + sigma * delta(xi)) with a fixed number of
// layers across the gap, so the thin-neck anisotropy is controlled by
// construction.  The exterior is meshed by radial layers between the
// capsule hull of the inclusions and the outer boundary, stitched to the
// outer polyline by an angular merge.  Quads are split along the shorter
// diagonal; ties (rectangles on the flat block, near-squares in the rings)
// are split by a quadrant rule that keeps the triangulation invariant under
// the scene's mirror symmetries.

#pragma once

#include <array>
#include <string>
#include <vector>

#include "narrowgap/geometry.hpp"

namespace narrowgap {

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TriRegion : std::uint8_t { GapBlock = 0, Exterior = 1 };

struct GradingPolicy {
  int n_layers = 6;           // cells across the gap, >= 3
  double h_far = 0.0;         // target exterior edge length; 0 = 3 * h_bnd
  double anisotropy_cap = 8.0;
  double radial_growth = 1.4; // exterior layer growth factor
};

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryTag> vertex_tags;
  std::vector<TriRegion> tri_regions;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }

  double area(int t) const;
  Vec2 centroid(int t) const;

  // counts of vertices by tag
  std::array<int, 4> tag_counts() const;
};

struct EulerStats {
  long long v = 0, e = 0, f = 0;
  int boundary_loops = 0;
  long long characteristic() const { return v - e + f; }
  bool consistent() const { return characteristic() == 1 - (boundary_loops - 1); }
};

struct QualityReport {
  int n_triangles = 0;
  int n_vertices = 0;
  double min_angle_deg = 0.0;       // after anisotropy normalization (gap block)
  double min_angle_raw_deg = 0.0;   // no normalization
  double max_edge_ratio = 0.0;      // longest/shortest edge over the mesh
  int anisotropy_violations = 0;    // triangles whose edge ratio exceeds the cap
  int nonpositive_area = 0;
  double min_area = 0.0;
};

Mesh triangulate_scene(const Scene& scene, const GradingPolicy& policy = {});

QualityReport mesh_quality_report(const Mesh& mesh, double anisotropy_cap = 8.0);

EulerStats euler_stats(const Mesh& mesh);

// structured polar annulus r in [r0, r1]; inner boundary tagged InclusionTop,
// outer tagged Outer (closed-form test geometry)
Mesh annulus_mesh(double r0, double r1, int n_radial, int n_theta);

// CSV dumps: vertices.csv (id,x,y,tag), triangles.csv (id,v0,v1,v2,region)
void write_mesh_csv(const Mesh& mesh, const std::string& vertices_path,
                    const std::string& triangles_path);

}  // namespace narrowgap
