#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "vanp/mesh.hpp"

namespace vanp {

/// Isotropic plate material in the thickness-scaled formulation: bending
/// moduli carry no t^3 and the shear modulus enters as lambda * t^-2.
struct PlateMaterial {
  double young = 0.0;      ///< E_Y (psi)
  double poisson = 0.0;    ///< nu
  double kappa = 5.0 / 6.0;
  double thickness = 0.0;  ///< t
  double lambda_s = 0.0;   ///< kappa E_Y / (2 (1 + nu))
  double bending = 0.0;    ///< D = E_Y / (12 (1 - nu^2))
  Eigen::Matrix3d moduli = Eigen::Matrix3d::Zero();  ///< Voigt bending moduli C

  /// lambda * t^-2, the factor on every shear term.
  [[nodiscard]] double shear_factor() const noexcept { return lambda_s / (thickness * thickness); }
};

/// Validates 0 <= nu < 0.5 and positive E_Y, kappa, t.
[[nodiscard]] PlateMaterial make_material(double young, double poisson, double kappa, double thickness);

enum class ProblemKind { Patch, Circle, Square, Parallelogram };

[[nodiscard]] std::string_view to_string(ProblemKind kind) noexcept;
[[nodiscard]] ProblemKind parse_problem_kind(std::string_view name);

/// Exact fields at a point; grad_r(i, j) = d r_i / d x_j.
struct ExactFields {
  double w = 0.0;
  Eigen::Vector2d r = Eigen::Vector2d::Zero();
  Eigen::Vector2d grad_w = Eigen::Vector2d::Zero();
  Eigen::Matrix2d grad_r = Eigen::Matrix2d::Zero();
};

struct BenchmarkProblem {
  ProblemKind kind = ProblemKind::Patch;
  PlateMaterial material;
  std::function<double(const Point&)> load;
  /// Empty when no closed-form solution exists.
  std::function<ExactFields(const Point&)> exact;
  /// Parallelogram only: tabulated center deflection.
  std::optional<double> reference_deflection;
  /// Point at which the reference deflection is probed.
  Point probe = Point::Zero();
  /// Characteristic length L used for t/L.
  double length = 1.0;
  /// Parallelogram geometry.
  double side_a = 1.0, side_b = 1.0, skew_deg = 45.0;

  [[nodiscard]] bool has_exact() const noexcept { return static_cast<bool>(exact); }
  /// Essential data on the boundary: exact fields when known, else clamped.
  [[nodiscard]] double boundary_w(const Point& x) const;
  [[nodiscard]] Eigen::Vector2d boundary_r(const Point& x) const;
  /// s = lambda t^-2 (grad w - r) of the exact solution.
  [[nodiscard]] Eigen::Vector2d exact_shear(const Point& x) const;
};

inline constexpr double kBenchmarkYoung = 10.92e6;
inline constexpr double kBenchmarkPoisson = 0.3;
inline constexpr double kShearCorrection = 5.0 / 6.0;

/// w = 1 + x + y, r = (1, 1), q = 0 on the unit square.
[[nodiscard]] BenchmarkProblem patch_problem(const PlateMaterial& material);
[[nodiscard]] BenchmarkProblem patch_problem();
/// Clamped unit disk under q = 1.
[[nodiscard]] BenchmarkProblem circle_problem(const PlateMaterial& material);
/// Clamped unit square under the polynomial load with known solution.
[[nodiscard]] BenchmarkProblem square_problem(const PlateMaterial& material);
/// Clamped parallelogram a = 200, b = 100, unit thickness, q = 100.
[[nodiscard]] BenchmarkProblem parallelogram_problem(double skew_deg = 45.0);

/// Builds the problem of the given kind for thickness ratio t/L.
[[nodiscard]] BenchmarkProblem make_problem(ProblemKind kind, double t_over_l, double skew_deg = 45.0);

/// Integration mesh of the benchmark domain at `resolution` (cells per side
/// for square/parallelogram, refinement levels for the disk).
[[nodiscard]] TriangulationMesh make_benchmark_mesh(const BenchmarkProblem& problem, int resolution,
                                                    MeshPattern pattern = MeshPattern::Structured,
                                                    std::uint64_t seed = 7);

}  // namespace vanp
