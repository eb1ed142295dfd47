#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vanp/problems.hpp"
#include "vanp/projection.hpp"

namespace vanp {

struct ErrorReport {
  double h = 0.0;
  double rel_L2 = 0.0;  ///< over (w, r_x, r_y)
  double rel_H1 = 0.0;  ///< seminorm over the six first derivatives
  std::optional<double> rel_s_nodal;  ///< empty when the exact shear vanishes
  int dofs = 0;
  double runtime_s = 0.0;
};

/// Rows sorted by decreasing h with least-squares log-log rates. Rates need
/// at least two rows; a missing nodal shear error in any row drops rate_s.
struct ConvergenceTable {
  std::vector<ErrorReport> rows;
  std::optional<double> rate_L2;
  std::optional<double> rate_H1;
  std::optional<double> rate_s;
  /// Successive-refinement rates, rows.size() - 1 entries (L2, H1).
  std::vector<std::array<double, 2>> pairwise;
};

[[nodiscard]] ConvergenceTable make_convergence_table(std::vector<ErrorReport> rows);

/// Relative L2 error on the six-point rule; relative H1 seminorm on the
/// stiffness points with the same derivatives the stiffness used; nodal
/// shear error at the standard nodes. Throws unsupported-problem when the
/// problem has no exact solution.
[[nodiscard]] ErrorReport compute_error_norms(const Discretization& disc, const ProjectionTable& tables,
                                              const PlateSolution& solution, const BenchmarkProblem& problem);

/// Least-squares slope of log(error) against log(h). Needs two or more
/// strictly positive pairs.
[[nodiscard]] double fit_rate(std::span<const double> h, std::span<const double> error);

struct FieldSample {
  Point x = Point::Zero();
  double w = 0.0;
  Eigen::Vector2d r = Eigen::Vector2d::Zero();
  Eigen::Vector2d s = Eigen::Vector2d::Zero();  ///< sum_c phi_c(x) s_c
};

/// Fields through the basis expansions with the solved coefficients. Points
/// outside the convex hull raise out-of-domain.
[[nodiscard]] std::vector<FieldSample> sample_field(const Discretization& disc, const ProjectionTable& tables,
                                                    const PlateSolution& solution, const PlateMaterial& material,
                                                    std::span<const Point> points);

}  // namespace vanp
