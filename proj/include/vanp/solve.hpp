#pragma once

#include <map>
#include <vector>

#include <Eigen/Core>

#include "vanp/problems.hpp"
#include "vanp/projection.hpp"

namespace vanp {

/// Prescribed values g keyed by global dof.
using BoundaryValues = std::map<int, double>;

/// Free-dof system after eliminating the constrained dofs. The constrained
/// equations are kept so reactions can be recovered.
struct ReducedSystem {
  SparseMatrix matrix;           ///< K_ff, symmetric
  Eigen::VectorXd rhs;           ///< f_f - K_fc g
  std::vector<int> free;         ///< reduced index -> global dof
  std::vector<int> constrained;  ///< sorted global dofs
  Eigen::VectorXd prescribed;    ///< g, aligned with `constrained`
  SparseMatrix coupling;         ///< K_cf (constrained rows, free columns)
  SparseMatrix constrained_block;  ///< K_cc
  Eigen::VectorXd constrained_rhs;  ///< f_c
  int total_dofs = 0;
};

/// Values of w, r_x, r_y at every boundary standard node taken from the
/// problem's essential data.
[[nodiscard]] BoundaryValues prescribe_boundary(const TriangulationMesh& mesh, const DofMap& dofs,
                                                const BenchmarkProblem& problem);

/// Throws constraint-coverage when a constrained dof has no value.
[[nodiscard]] ReducedSystem apply_dirichlet(const GlobalSystem& system, const BoundaryValues& values);

/// Sparse Cholesky solve of the reduced system; returns the full dof vector
/// with the constrained entries set to g. Throws SolverError (with the
/// failing column) when the matrix is not positive definite, and also when
/// the residual check ||Ax - b|| <= 1e-10 (||A|| ||x|| + ||b||) fails.
[[nodiscard]] Eigen::VectorXd solve_spd(const ReducedSystem& reduced);

/// K_cf x_f + K_cc g - f_c for a full solution vector.
[[nodiscard]] Eigen::VectorXd reactions(const ReducedSystem& reduced, const Eigen::VectorXd& full);

}  // namespace vanp
