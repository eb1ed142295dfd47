#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vanp/maxent.hpp"
#include "vanp/mesh.hpp"

namespace vanp {

enum class TriRuleOrder { ST3, ST6 };

/// Interior Gauss rule mapped to one cell (physical points, area weights).
struct TriQuadRule {
  std::vector<Point> points;
  std::vector<double> weights;
  TriRuleOrder order = TriRuleOrder::ST3;
};

/// Two-point Gauss rule on each edge k (vertex k to vertex k+1).
struct EdgeQuadRule {
  std::array<std::array<Point, 2>, 3> points{};
  std::array<std::array<double, 2>, 3> weights{};
  std::array<Point, 3> normals{};  ///< unit outward normals
};

/// ST3: barycentric (2/3,1/6,1/6) and permutations, weights area/3.
/// ST6: the degree-4 six-point rule.
[[nodiscard]] TriQuadRule interior_rule(const std::array<Point, 3>& vertices, TriRuleOrder order);
[[nodiscard]] TriQuadRule interior_rule(const TriangulationMesh& mesh, int cell_id, TriRuleOrder order);

[[nodiscard]] EdgeQuadRule edge_rule(const std::array<Point, 3>& vertices);
[[nodiscard]] EdgeQuadRule edge_rule(const TriangulationMesh& mesh, int cell_id);

/// Basis values and QC3-corrected derivatives at the three ST3 points of a
/// cell. Column a of each matrix belongs to contributors[a]; row h to
/// interior point h.
struct CorrectedCellQuadrature {
  int cell = -1;
  TriQuadRule interior;
  std::vector<int> contributors;
  Eigen::Matrix<double, 3, Eigen::Dynamic> phi;
  Eigen::Matrix<double, 3, Eigen::Dynamic> dphi_x;
  Eigen::Matrix<double, 3, Eigen::Dynamic> dphi_y;
};

/// Replaces the interior derivatives of every contributing basis function by
/// the solution of W d_j = f_j, which makes the three-point rule integrate
/// phi_{a,j} * {1, x, y} consistently with the divergence theorem.
///
/// `interior` must be the ST3 rule of the cell; `interior_evals[h]` the basis
/// at interior point h and `edge_evals[2k+g]` the basis at edge point g of
/// edge k. Contributors are aligned on the union list, padding with zero.
[[nodiscard]] CorrectedCellQuadrature qc3_correct(int cell_id, const TriQuadRule& interior, const EdgeQuadRule& edges,
                                                  std::span<const BasisEval> interior_evals,
                                                  std::span<const BasisEval> edge_evals);

/// Max over contributors and j of |W d_j - f_j| / max(|f_j|, area) for the
/// given derivative set, recomputed from the same basis data. Test helper.
[[nodiscard]] double qc3_constraint_residual(const CorrectedCellQuadrature& corrected, const EdgeQuadRule& edges,
                                             std::span<const BasisEval> edge_evals);

}  // namespace vanp
