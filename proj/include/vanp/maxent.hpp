#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "vanp/mesh.hpp"

namespace vanp {

/// Parameters of the Gaussian-prior maxent basis.
struct MaxentConfig {
  double gamma = 2.0;           ///< support parameter; larger means narrower support
  double newton_tol = 1e-12;    ///< on |sum phi_a c_a| with c_a scaled by the local spacing
  int newton_max_iter = 100;
  double prior_cutoff = 1e-8;   ///< nodes whose prior falls below this are dropped

  void validate() const;
  /// Support radius in units of h_a: sqrt(-ln(cutoff) / gamma).
  [[nodiscard]] double support_factor() const;
};

/// Characteristic nodal spacing h_a, indexed like the node set.
struct NodalSpacing {
  std::vector<double> h_a;
};

enum class NodeSetKind { Standard, Enhanced };

/// h_a = mean distance from node a to the nodes sharing a cell with it,
/// restricted to the chosen node set.
[[nodiscard]] NodalSpacing compute_nodal_spacing(const TriangulationMesh& mesh, NodeSetKind kind);

/// Nodes of one approximation set (standard or enhanced) with their spacing,
/// convex hull and a bucket grid for support queries. Node i here is mesh
/// node i, so standard ids precede barycenter ids.
class NodeSet {
 public:
  NodeSet(std::vector<Point> points, NodalSpacing spacing);

  [[nodiscard]] int size() const noexcept { return static_cast<int>(points_.size()); }
  [[nodiscard]] const Point& point(int id) const { return points_[static_cast<std::size_t>(id)]; }
  [[nodiscard]] std::span<const Point> points() const noexcept { return points_; }
  [[nodiscard]] double spacing(int id) const { return spacing_.h_a[static_cast<std::size_t>(id)]; }
  [[nodiscard]] const NodalSpacing& spacing() const noexcept { return spacing_; }
  /// Hull vertices (node ids), counter-clockwise, collinear points dropped.
  [[nodiscard]] std::span<const int> hull() const noexcept { return hull_; }
  /// Distance tolerance used to decide that a point lies on the hull.
  [[nodiscard]] double hull_tolerance() const noexcept { return hull_tol_; }

  /// Ids (ascending) with ||x_a - x|| <= factor * h_a.
  [[nodiscard]] std::vector<int> within(const Point& x, double factor) const;

 private:
  std::vector<Point> points_;
  NodalSpacing spacing_;
  std::vector<int> hull_;
  double hull_tol_ = 0.0;
  double max_spacing_ = 0.0;
  Point origin_ = Point::Zero();
  double bucket_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<int> bucket_offsets_;
  std::vector<int> bucket_nodes_;
};

[[nodiscard]] NodeSet make_node_set(const TriangulationMesh& mesh, NodeSetKind kind);

/// Result of one basis evaluation. Entries of phi / grad_phi follow
/// `contributors`.
struct BasisEval {
  Point point = Point::Zero();
  std::vector<int> contributors;
  std::vector<double> phi;
  std::vector<Point> grad_phi;
  Eigen::Vector2d lambda = Eigen::Vector2d::Zero();
  int iterations = 0;
  /// True when the point lies on the hull; the basis then reduces to the 1D
  /// maxent basis of the nodes on that face (or to the vertex indicator) and
  /// grad_phi holds only the tangential derivative.
  bool on_boundary = false;
};

/// Nodal contribution at x under the truncated Gaussian prior. Throws
/// support-deficiency when the list does not affinely span the plane.
[[nodiscard]] std::vector<int> contributing_nodes(const Point& x, const NodeSet& nodes, const MaxentConfig& config);

/// Maxent basis values and gradients at x via damped Newton on the dual.
[[nodiscard]] BasisEval evaluate_basis(const Point& x, const NodeSet& nodes, const MaxentConfig& config);

}  // namespace vanp
