#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "vanp/maxent.hpp"
#include "vanp/mesh.hpp"
#include "vanp/problems.hpp"
#include "vanp/quadrature.hpp"

namespace vanp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

/// How stiffness-type integrals are evaluated on a cell.
enum class QuadratureScheme {
  QC3,  ///< three-point rule with corrected derivatives (default)
  ST3,  ///< three-point rule, raw maxent derivatives
  ST6,  ///< six-point rule, raw maxent derivatives
};

[[nodiscard]] std::string_view to_string(QuadratureScheme scheme) noexcept;
[[nodiscard]] QuadratureScheme parse_quadrature(std::string_view name);

/// Degrees of freedom: one w per standard node, then (r_x, r_y) per enhanced
/// node. Boundary standard nodes carry prescribed w, r_x, r_y.
struct DofMap {
  int num_standard = 0;
  int num_enhanced = 0;
  std::vector<int> constrained;  ///< sorted

  [[nodiscard]] int size() const noexcept { return num_standard + 2 * num_enhanced; }
  [[nodiscard]] int w_dof(int standard_node) const noexcept { return standard_node; }
  [[nodiscard]] int r_dof(int enhanced_node, int component) const noexcept {
    return num_standard + 2 * enhanced_node + component;
  }
};

[[nodiscard]] DofMap make_dof_map(const TriangulationMesh& mesh);

/// Basis data of one node set at the stiffness points of one cell.
/// Row q = quadrature point, column a = ids[a].
struct CellSetBasis {
  std::vector<int> ids;
  Eigen::MatrixXd phi;
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dy;

  [[nodiscard]] Eigen::Index column(int id) const;  ///< -1 if absent
};

struct CellBasis {
  TriQuadRule rule;
  CellSetBasis standard;
  CellSetBasis enhanced;
};

/// Enhanced mesh, both node sets and the basis at every stiffness point.
/// Everything here is independent of the plate thickness.
class Discretization {
 public:
  /// `mesh` may be plain or enhanced; barycenters are added when missing.
  Discretization(const TriangulationMesh& mesh, const MaxentConfig& config,
                 QuadratureScheme scheme = QuadratureScheme::QC3);

  [[nodiscard]] const TriangulationMesh& mesh() const noexcept { return mesh_; }
  [[nodiscard]] const NodeSet& standard() const noexcept { return standard_; }
  [[nodiscard]] const NodeSet& enhanced() const noexcept { return enhanced_; }
  [[nodiscard]] const MaxentConfig& config() const noexcept { return config_; }
  [[nodiscard]] QuadratureScheme scheme() const noexcept { return scheme_; }
  [[nodiscard]] const DofMap& dofs() const noexcept { return dofs_; }
  [[nodiscard]] const std::vector<CellBasis>& cells() const noexcept { return cells_; }

 private:
  TriangulationMesh mesh_;
  MaxentConfig config_;
  QuadratureScheme scheme_;
  NodeSet standard_;
  NodeSet enhanced_;
  DofMap dofs_;
  std::vector<CellBasis> cells_;
};

/// Volume-averaged nodal projections pi_c[.] over the nodal volumes E_c of
/// the standard nodes.
struct ProjectionTable {
  std::vector<double> volume;  ///< V_c = int_{E_c} phi_c
  /// Row 2c+j, column a (standard): j-th component of pi_c[G_a].
  SparseRowMatrix gradient;
  /// Row c, column a (enhanced): pi_c[N_a] (a multiple of the 2x2 identity).
  SparseRowMatrix value;
  QuadratureScheme scheme = QuadratureScheme::QC3;
  /// Maps the dof vector to the projected shear strain at the nodes:
  /// row 2c+j = pi_c[grad w]_j - pi_c[r]_j.
  SparseRowMatrix shear_operator;
};

[[nodiscard]] ProjectionTable build_projection_tables(const Discretization& disc);

/// Thickness-independent pieces of the stiffness: the bending block, the
/// shear block for a unit shear factor, and the load vector.
struct StiffnessOperator {
  SparseMatrix bending;  ///< K_ee in the full dof space
  SparseMatrix shear;    ///< [[K_ww, -K_wr], [-K_wr^T, K_rr]] / (lambda t^-2)
  Eigen::VectorXd load;  ///< f_w in the full dof space
  Eigen::Matrix3d moduli = Eigen::Matrix3d::Zero();
  DofMap dofs;
};

/// Symmetric global system K u = f with K = K_ee + lambda t^-2 * shear.
struct GlobalSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  DofMap dofs;
};

/// Standard-set mass matrix H_cd = int phi_c phi_d with the stiffness rule.
[[nodiscard]] SparseMatrix standard_mass_matrix(const Discretization& disc);

[[nodiscard]] StiffnessOperator assemble_operator(const Discretization& disc, const ProjectionTable& tables,
                                                  const BenchmarkProblem& problem);
[[nodiscard]] GlobalSystem assemble_system(const StiffnessOperator& op, const PlateMaterial& material);
[[nodiscard]] GlobalSystem assemble_system(const Discretization& disc, const ProjectionTable& tables,
                                           const BenchmarkProblem& problem);

/// Load vector f_w = int phi_a q with the six-point rule, in dof space.
[[nodiscard]] Eigen::VectorXd assemble_load(const Discretization& disc, const BenchmarkProblem& problem);

/// Nodal fields extracted from a full dof vector.
struct PlateSolution {
  Eigen::VectorXd dofs;
  Eigen::VectorXd w;                                ///< per standard node
  Eigen::Matrix<double, Eigen::Dynamic, 2> r;       ///< per enhanced node
};

[[nodiscard]] PlateSolution split_solution(const DofMap& map, Eigen::VectorXd dofs);

/// s_c = lambda t^-2 (pi_c[grad w^h] - pi_c[r^h]) at each standard node.
[[nodiscard]] Eigen::Matrix<double, Eigen::Dynamic, 2> recover_nodal_shear(const PlateSolution& solution,
                                                                           const ProjectionTable& tables,
                                                                           const PlateMaterial& material);

/// Upper triangle mirrored onto the lower one, so the result is exactly
/// symmetric.
[[nodiscard]] SparseMatrix mirror_upper(const SparseMatrix& m);

}  // namespace vanp
