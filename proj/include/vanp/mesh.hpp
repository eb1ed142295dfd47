#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace vanp {

using Point = Eigen::Vector2d;

enum class NodeKind : std::uint8_t { Standard, Barycenter };

struct Node {
  int id = 0;
  Point x = Point::Zero();
  NodeKind kind = NodeKind::Standard;
};

/// Triangle of the integration partition. Vertices are standard node ids in
/// counter-clockwise order; `barycenter` is -1 until the mesh is enhanced.
struct TriCell {
  int id = 0;
  std::array<int, 3> vertices{};
  int barycenter = -1;
};

struct NodalVolume {
  int node_id = 0;
  std::vector<int> cells;
  double measure = 0.0;
};

/// Triangular integration mesh with its standard node set and, once enhanced,
/// one barycenter node per cell appended after the standard nodes.
///
/// Immutable after construction. The constructor orients every cell
/// counter-clockwise, rejects zero-area cells and non-manifold edges, and
/// marks as boundary the endpoints of edges owned by a single cell.
class TriangulationMesh {
 public:
  TriangulationMesh(std::vector<Point> points, std::vector<std::array<int, 3>> cells);

  [[nodiscard]] std::span<const Node> nodes() const noexcept { return nodes_; }
  [[nodiscard]] std::span<const TriCell> cells() const noexcept { return cells_; }
  [[nodiscard]] const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  [[nodiscard]] const TriCell& cell(int id) const { return cells_.at(static_cast<std::size_t>(id)); }

  [[nodiscard]] int num_nodes() const noexcept { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] int num_standard() const noexcept { return num_standard_; }
  [[nodiscard]] int num_cells() const noexcept { return static_cast<int>(cells_.size()); }
  [[nodiscard]] bool is_enhanced() const noexcept { return num_nodes() > num_standard_; }

  /// Sorted standard node ids lying on the domain boundary.
  [[nodiscard]] std::span<const int> boundary_nodes() const noexcept { return boundary_nodes_; }
  [[nodiscard]] bool is_boundary(int node_id) const;
  /// Edges owned by exactly one cell, as (cell, local edge k) with edge k
  /// running from vertex k to vertex (k+1)%3.
  [[nodiscard]] std::span<const std::array<int, 2>> boundary_edges() const noexcept { return boundary_edges_; }

  /// Maximum over cells of the longest edge length.
  [[nodiscard]] double h() const noexcept { return h_; }
  [[nodiscard]] double cell_area(int cell_id) const;
  [[nodiscard]] double domain_area() const;
  [[nodiscard]] std::array<Point, 3> cell_points(int cell_id) const;
  [[nodiscard]] Point centroid(int cell_id) const;
  /// Cells having the standard node as a vertex, ascending.
  [[nodiscard]] std::span<const int> incident_cells(int standard_node) const;

  [[nodiscard]] std::vector<Point> standard_points() const;

 private:
  friend TriangulationMesh enhance_with_barycenters(const TriangulationMesh& mesh);
  TriangulationMesh() = default;

  std::vector<Node> nodes_;
  std::vector<TriCell> cells_;
  int num_standard_ = 0;
  std::vector<int> boundary_nodes_;
  std::vector<char> boundary_flag_;
  std::vector<std::array<int, 2>> boundary_edges_;
  std::vector<int> incidence_offsets_;
  std::vector<int> incidence_;
  double h_ = 0.0;
};

enum class MeshPattern { Structured, PerturbedUnstructured };

/// Unit square [0,1]^2 split into n x n squares, each cut along the
/// (0,0)-(1,1) diagonal direction. The perturbed pattern jitters interior
/// nodes by at most 0.25/n (seeded) and restores the Delaunay property by
/// edge flipping.
[[nodiscard]] TriangulationMesh generate_square_mesh(int n, MeshPattern pattern, std::uint64_t seed = 7);

/// Hexagon fan around the origin refined `levels` times by edge midpoints;
/// midpoints of boundary edges are pushed onto the unit circle.
[[nodiscard]] TriangulationMesh generate_disk_mesh(int levels);

/// Parallelogram (0,0), (a,0), (a + b cos t, b sin t), (b cos t, b sin t) with
/// t = skew_deg, meshed as an n x n grid of cells cut along the short diagonal.
[[nodiscard]] TriangulationMesh generate_parallelogram_mesh(double a, double b, double skew_deg, int n);

/// Reads `<stem>.node` and `<stem>.ele`. `path` may name either file or the
/// common stem.
[[nodiscard]] TriangulationMesh read_mesh(const std::filesystem::path& path);
void write_mesh(const TriangulationMesh& mesh, const std::filesystem::path& stem);

/// Appends one barycenter node per cell. Throws invalid-state if the mesh is
/// already enhanced.
[[nodiscard]] TriangulationMesh enhance_with_barycenters(const TriangulationMesh& mesh);

/// Standard node: every cell with the node as a vertex. Barycenter node: its
/// owning cell.
[[nodiscard]] NodalVolume nodal_volume(const TriangulationMesh& mesh, int node_id);

/// Lawson edge flipping until every interior edge is locally Delaunay.
/// Returns the flipped connectivity (counter-clockwise).
[[nodiscard]] std::vector<std::array<int, 3>> flip_to_delaunay(std::span<const Point> points,
                                                               std::vector<std::array<int, 3>> cells);

[[nodiscard]] double signed_area(const Point& a, const Point& b, const Point& c) noexcept;

}  // namespace vanp
