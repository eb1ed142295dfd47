#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "vanp/analysis.hpp"
#include "vanp/error.hpp"
#include "vanp/mesh.hpp"
#include "vanp/problems.hpp"
#include "vanp/projection.hpp"

namespace vanp {

/// One batch run: a problem, a thickness list and a mesh sequence given
/// either as refinement levels or as mesh files.
struct RunConfig {
  ProblemKind problem = ProblemKind::Circle;
  std::vector<double> t_over_l{0.1, 0.01, 0.001, 1e-4};
  double gamma = 2.0;
  QuadratureScheme quadrature = QuadratureScheme::QC3;
  int levels = 3;
  std::vector<std::filesystem::path> meshes;  ///< overrides `levels` when non-empty
  MeshPattern pattern = MeshPattern::Structured;
  double skew_deg = 45.0;
  std::uint64_t seed = 7;
  std::filesystem::path out;  ///< CSV; a plot script is written next to it
  std::filesystem::path vtk;  ///< field snapshot on the finest mesh
  bool timing = false;        ///< record runtime_s (makes the CSV non-reproducible)

  /// Throws config-error on t/L outside (0, 1), levels < 1, gamma <= 0 or a
  /// skew angle outside (0, 90).
  void validate() const;
};

std::string_view to_string(MeshPattern pattern) noexcept;
[[nodiscard]] MeshPattern parse_mesh_pattern(std::string_view name);

/// Overwrites the fields present in a JSON object. Unknown keys and wrong
/// types raise config-error.
void apply_json(RunConfig& config, std::string_view json_text);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Generator resolution of refinement level `level` (>= 1): square and patch
/// n = 2^(level+1), disk refinements = level, parallelogram n = 8 level.
[[nodiscard]] int level_resolution(ProblemKind kind, int level);

struct StudyRow {
  ProblemKind problem = ProblemKind::Circle;
  double t_over_l = 0.0;
  double gamma = 0.0;
  QuadratureScheme quadrature = QuadratureScheme::QC3;
  int level = 0;
  double h = 0.0;
  int dofs = 0;
  std::optional<double> rel_L2, rel_H1, rel_s_nodal;  ///< empty without an exact solution
  double runtime_s = 0.0;
  double center_deflection = 0.0;  ///< w at the problem's probe point
};

/// Rates of one (quadrature, t/L) curve.
struct CurveSummary {
  QuadratureScheme quadrature = QuadratureScheme::QC3;
  double t_over_l = 0.0;
  std::optional<ConvergenceTable> table;  ///< empty without an exact solution
  bool converging = true;
  bool exact = false;  ///< every L2 error below 1e-6: reproduced to round-off
};

struct StudyResult {
  std::vector<StudyRow> rows;  ///< quadrature, then t/L, then level (config order)
  std::vector<CurveSummary> curves;
};

/// Thrown by run_study when a pipeline stage fails; carries the rows that
/// completed before the failure, in config order.
class StudyFailure : public Error {
 public:
  StudyFailure(const Error& cause, std::vector<StudyRow> completed)
      : Error(cause.kind(), cause.what(), Verbatim{}), completed_(std::move(completed)) {}
  [[nodiscard]] const std::vector<StudyRow>& completed() const noexcept { return completed_; }

 private:
  std::vector<StudyRow> completed_;
};

/// Field values of the last solve, sampled at the standard nodes.
struct FieldSnapshot {
  QuadratureScheme quadrature = QuadratureScheme::QC3;
  double t_over_l = 0.0;
  TriangulationMesh mesh;
  std::vector<FieldSample> samples;
};

using SnapshotSink = std::function<void(const FieldSnapshot&)>;

/// Mesh, basis, tables and operator are built once per mesh and reused for
/// every thickness. `schemes` defaults to the config's quadrature. The
/// sink, if set, receives the finest-mesh fields for every thickness.
[[nodiscard]] StudyResult run_study(const RunConfig& config, std::vector<QuadratureScheme> schemes = {},
                                    const SnapshotSink& snapshots = {});

/// QC3, ST6 and ST3 on identical meshes.
[[nodiscard]] StudyResult compare_quadratures(const RunConfig& config, const SnapshotSink& snapshots = {});

/// Rate summary per curve; flags curves whose fitted L2 or H1 rate is below
/// 0.5 or whose L2 errors do not decrease monotonically, unless the errors
/// are all at round-off level.
[[nodiscard]] std::vector<CurveSummary> summarize(const std::vector<StudyRow>& rows);

/// Shortest round-trip decimal.
[[nodiscard]] std::string format_double(double value);

inline constexpr std::string_view kCsvHeader =
    "problem,t_over_L,gamma,quadrature,level,h,dofs,rel_L2,rel_H1,rel_s_nodal,runtime_s";

void write_csv(std::ostream& out, const std::vector<StudyRow>& rows, bool timing);
void write_csv(const std::filesystem::path& path, const std::vector<StudyRow>& rows, bool timing);
void write_summary(std::ostream& out, const StudyResult& result);

/// Legacy ASCII VTK with POINT_DATA scalars w and vectors rotation, shear.
void write_vtk(std::ostream& out, const FieldSnapshot& snapshot);
void write_vtk(const std::filesystem::path& path, const FieldSnapshot& snapshot);

/// Matplotlib script drawing log-log error curves from `csv`.
void write_plot_script(const std::filesystem::path& path, const std::filesystem::path& csv);

}  // namespace vanp
