#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stcontrol/problem.hpp"

namespace stcontrol {

struct Point {
  double x = 0.0;
  double t = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Boundary flags stored per vertex as a bit set.
enum BoundaryTag : std::uint8_t {
  interior = 0,
  left_side = 1,   // x = x_min
  right_side = 2,  // x = x_max
  initial_time = 4,
  final_time = 8,
};

struct Triangle {
  std::array<int, 3> v{};
  int region = 2;
  friend bool operator==(const Triangle&, const Triangle&) = default;
};

using Edge = std::array<int, 2>;

/// Interface-fitted triangulation of the space-time cylinder. Triangles are
/// counter-clockwise in the (x, t) plane and labelled by subdomain.
struct SpaceTimeMesh {
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;
  std::vector<Edge> interface_edges;
  std::vector<std::uint8_t> boundary_tags;
  double h = 0.0;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  friend bool operator==(const SpaceTimeMesh&, const SpaceTimeMesh&) = default;
};

struct MeshOptions {
  double cull_fraction = 0.3;  ///< grid nodes closer than this * pitch to an interface node are dropped
};

/// Layered strip triangulation with interface nodes inserted on every time
/// line. Needs n_layers >= 2.
SpaceTimeMesh build_mesh(const ProblemSpec& spec, int n_layers, const MeshOptions& options = {});

double signed_area(const SpaceTimeMesh& mesh, const Triangle& tri);
double diameter(const SpaceTimeMesh& mesh, const Triangle& tri);
double inscribed_diameter(const SpaceTimeMesh& mesh, const Triangle& tri);
double measure_h(const SpaceTimeMesh& mesh);
double region_area(const SpaceTimeMesh& mesh, int region);

struct ValidationReport {
  double max_interface_residual = 0.0;
  int interface_residual_violations = 0;  ///< interface vertices off Γ* by more than the tolerance
  int straddle_count = 0;                 ///< triangles with vertices strictly on both sides
  int label_mismatches = 0;               ///< region label disagrees with the vertices' side
  int orientation_violations = 0;
  int conformity_violations = 0;
  double quasi_uniformity = 0.0;  ///< max diameter / min inscribed diameter
  double rho_max = 8.0;
  double interface_tolerance = 1e-10;

  bool quasi_uniform() const { return quasi_uniformity <= rho_max; }
  bool ok() const {
    return interface_residual_violations == 0 && straddle_count == 0 && label_mismatches == 0 &&
           orientation_violations == 0 && conformity_violations == 0 && quasi_uniform();
  }
  std::string summary() const;
};

ValidationReport validate_mesh(const SpaceTimeMesh& mesh, const ProblemSpec& spec, double rho_max = 8.0);

/// Text format: `stmesh 1`, then sections `vertices N`, `triangles M`,
/// `interface_edges K`. Reals are written with 17 significant digits.
void write_mesh(const SpaceTimeMesh& mesh, const std::filesystem::path& path);
void write_mesh(const SpaceTimeMesh& mesh, std::ostream& out);
SpaceTimeMesh read_mesh(const std::filesystem::path& path);
SpaceTimeMesh read_mesh(std::istream& in);

}  // namespace stcontrol
