#include "vanp/driver.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "vanp/error.hpp"
#include "vanp/solve.hpp"

namespace vanp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t index_of(const std::vector<double>& values, double v) {
  return static_cast<std::size_t>(std::find(values.begin(), values.end(), v) - values.begin());
}

// Config order: quadrature (as requested), t/L (as listed), level.
void sort_rows(std::vector<StudyRow>& rows, const std::vector<QuadratureScheme>& schemes,
               const std::vector<double>& t_over_l) {
  auto key = [&](const StudyRow& r) {
    const auto q = static_cast<std::size_t>(std::find(schemes.begin(), schemes.end(), r.quadrature) - schemes.begin());
    return std::tuple(q, index_of(t_over_l, r.t_over_l), r.level);
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const StudyRow& a, const StudyRow& b) { return key(a) < key(b); });
}

template <typename T>
T json_get(const nlohmann::json& value, std::string_view key) {
  try {
    return value.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::ConfigError, "config key '" + std::string(key) + "' has the wrong type");
  }
}

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

void RunConfig::validate() const {
  if (t_over_l.empty()) throw Error(ErrorKind::ConfigError, "no t/L values given");
  for (double t : t_over_l) {
    if (!(t > 0.0 && t < 1.0)) throw Error(ErrorKind::ConfigError, "t/L = " + format_double(t) + " is outside (0, 1)");
  }
  if (meshes.empty() && levels < 1) throw Error(ErrorKind::ConfigError, "levels must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(ErrorKind::ConfigError, "gamma must be positive");
  if (!(skew_deg > 0.0 && skew_deg < 90.0)) throw Error(ErrorKind::ConfigError, "skew angle must lie in (0, 90)");
}

std::string_view to_string(MeshPattern pattern) noexcept {
  return pattern == MeshPattern::Structured ? "structured" : "unstructured";
}

MeshPattern parse_mesh_pattern(std::string_view name) {
  if (name == "structured") return MeshPattern::Structured;
  if (name == "unstructured") return MeshPattern::PerturbedUnstructured;
  throw Error(ErrorKind::ConfigError, "unknown mesh pattern '" + std::string(name) + "'");
}

void apply_json(RunConfig& config, std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::ConfigError, "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "problem") {
      config.problem = parse_problem_kind(json_get<std::string>(value, key));
    } else if (key == "t_over_l") {
      config.t_over_l = value.is_array() ? json_get<std::vector<double>>(value, key)
                                         : std::vector<double>{json_get<double>(value, key)};
    } else if (key == "gamma") {
      config.gamma = json_get<double>(value, key);
    } else if (key == "quadrature") {
      config.quadrature = parse_quadrature(json_get<std::string>(value, key));
    } else if (key == "levels") {
      config.levels = json_get<int>(value, key);
    } else if (key == "mesh") {
      const auto paths = value.is_array() ? json_get<std::vector<std::string>>(value, key)
                                          : std::vector<std::string>{json_get<std::string>(value, key)};
      config.meshes.assign(paths.begin(), paths.end());
    } else if (key == "mesh_pattern") {
      config.pattern = parse_mesh_pattern(json_get<std::string>(value, key));
    } else if (key == "skew_deg") {
      config.skew_deg = json_get<double>(value, key);
    } else if (key == "seed") {
      config.seed = json_get<std::uint64_t>(value, key);
    } else if (key == "out") {
      config.out = json_get<std::string>(value, key);
    } else if (key == "vtk") {
      config.vtk = json_get<std::string>(value, key);
    } else if (key == "timing") {
      config.timing = json_get<bool>(value, key);
    } else {
      throw Error(ErrorKind::ConfigError, "unknown config key '" + key + "'");
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig config;
  apply_json(config, buffer.str());
  return config;
}

int level_resolution(ProblemKind kind, int level) {
  if (level < 1) throw Error(ErrorKind::ConfigError, "levels start at 1");
  switch (kind) {
    case ProblemKind::Patch:
    case ProblemKind::Square:
      if (level > 12) throw Error(ErrorKind::ConfigError, "level too large");
      return 1 << (level + 1);
    case ProblemKind::Circle: return level;
    case ProblemKind::Parallelogram: return 8 * level;
  }
  throw Error(ErrorKind::ConfigError, "unknown problem kind");
}

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw Error(ErrorKind::InvalidArgument, "cannot format value");
  return std::string(buf.data(), end);
}

StudyResult run_study(const RunConfig& config, std::vector<QuadratureScheme> schemes, const SnapshotSink& snapshots) {
  config.validate();
  if (schemes.empty()) schemes.push_back(config.quadrature);
  const int num_meshes = config.meshes.empty() ? config.levels : static_cast<int>(config.meshes.size());

  std::vector<StudyRow> rows;
  try {
    for (int level = 1; level <= num_meshes; ++level) {
      const auto mesh_start = Clock::now();
      const auto base = make_problem(config.problem, config.t_over_l.front(), config.skew_deg);
      const TriangulationMesh mesh =
          config.meshes.empty()
              ? make_benchmark_mesh(base, level_resolution(config.problem, level), config.pattern, config.seed)
              : read_mesh(config.meshes[static_cast<std::size_t>(level - 1)]);
      const double mesh_time = seconds_since(mesh_start);

      for (const auto scheme : schemes) {
        const auto setup_start = Clock::now();
        MaxentConfig maxent;
        maxent.gamma = config.gamma;
        const Discretization disc(mesh, maxent, scheme);
        const auto tables = build_projection_tables(disc);
        const auto op = assemble_operator(disc, tables, base);
        const double setup_time = mesh_time + seconds_since(setup_start);

        for (const double t : config.t_over_l) {
          const auto solve_start = Clock::now();
          const auto problem = make_problem(config.problem, t, config.skew_deg);
          const auto system = assemble_system(op, problem.material);
          const auto reduced = apply_dirichlet(system, prescribe_boundary(disc.mesh(), disc.dofs(), problem));
          const auto solution = split_solution(disc.dofs(), solve_spd(reduced));

          StudyRow row;
          row.problem = config.problem;
          row.t_over_l = t;
          row.gamma = config.gamma;
          row.quadrature = scheme;
          row.level = level;
          row.h = disc.mesh().h();
          row.dofs = disc.dofs().size();
          if (problem.has_exact()) {
            const auto report = compute_error_norms(disc, tables, solution, problem);
            row.rel_L2 = report.rel_L2;
            row.rel_H1 = report.rel_H1;
            row.rel_s_nodal = report.rel_s_nodal;
          }
          const std::array<Point, 1> probe{problem.probe};
          row.center_deflection = sample_field(disc, tables, solution, problem.material, probe).front().w;
          row.runtime_s = setup_time + seconds_since(solve_start);
          rows.push_back(row);

          if (snapshots && level == num_meshes) {
            const auto points = disc.mesh().standard_points();
            FieldSnapshot snap{scheme, t, mesh, sample_field(disc, tables, solution, problem.material, points)};
            snapshots(snap);
          }
        }
      }
    }
  } catch (const Error& e) {
    sort_rows(rows, schemes, config.t_over_l);
    throw StudyFailure(e, std::move(rows));
  }

  sort_rows(rows, schemes, config.t_over_l);
  StudyResult result;
  result.curves = summarize(rows);
  result.rows = std::move(rows);
  return result;
}

StudyResult compare_quadratures(const RunConfig& config, const SnapshotSink& snapshots) {
  return run_study(config, {QuadratureScheme::QC3, QuadratureScheme::ST6, QuadratureScheme::ST3}, snapshots);
}

std::vector<CurveSummary> summarize(const std::vector<StudyRow>& rows) {
  std::vector<CurveSummary> out;
  std::size_t k = 0;
  while (k < rows.size()) {
    std::size_t end = k;
    while (end < rows.size() && rows[end].quadrature == rows[k].quadrature && rows[end].t_over_l == rows[k].t_over_l) {
      ++end;
    }
    CurveSummary curve;
    curve.quadrature = rows[k].quadrature;
    curve.t_over_l = rows[k].t_over_l;
    const bool exact = std::all_of(rows.begin() + static_cast<std::ptrdiff_t>(k), rows.begin() + static_cast<std::ptrdiff_t>(end),
                                   [](const StudyRow& r) { return r.rel_L2 && r.rel_H1; });
    if (exact) {
      std::vector<ErrorReport> reports;
      for (std::size_t i = k; i < end; ++i) {
        ErrorReport r;
        r.h = rows[i].h;
        r.rel_L2 = *rows[i].rel_L2;
        r.rel_H1 = *rows[i].rel_H1;
        r.rel_s_nodal = rows[i].rel_s_nodal;
        r.dofs = rows[i].dofs;
        r.runtime_s = rows[i].runtime_s;
        reports.push_back(r);
      }
      curve.table = make_convergence_table(std::move(reports));
      const auto& table = *curve.table;
      curve.exact = std::all_of(table.rows.begin(), table.rows.end(), [](const ErrorReport& r) { return r.rel_L2 < 1e-6; });
      if (curve.exact) {
        curve.converging = true;
      } else if (table.rate_L2 && table.rate_H1) {
        bool monotone = true;
        for (std::size_t i = 1; i < table.rows.size(); ++i) monotone = monotone && table.rows[i].rel_L2 < table.rows[i - 1].rel_L2;
        curve.converging = monotone && *table.rate_L2 >= 0.5 && *table.rate_H1 >= 0.5;
      }
    }
    out.push_back(std::move(curve));
    k = end;
  }
  return out;
}

void write_csv(std::ostream& out, const std::vector<StudyRow>& rows, bool timing) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << to_string(r.problem) << ',' << format_double(r.t_over_l) << ',' << format_double(r.gamma) << ','
        << to_string(r.quadrature) << ',' << r.level << ',' << format_double(r.h) << ',' << r.dofs << ','
        << optional_field(r.rel_L2) << ',' << optional_field(r.rel_H1) << ',' << optional_field(r.rel_s_nodal) << ','
        << (timing ? format_double(r.runtime_s) : std::string()) << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const std::vector<StudyRow>& rows, bool timing) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
  write_csv(out, rows, timing);
}

void write_summary(std::ostream& out, const StudyResult& result) {
  out << "# rates (least-squares fit of log error against log h)\n";
  for (const auto& curve : result.curves) {
    out << "quadrature=" << to_string(curve.quadrature) << " t_over_L=" << format_double(curve.t_over_l);
    if (!curve.table) {
      out << " center deflection:";
      std::optional<double> reference;
      for (const auto& r : result.rows) {
        if (r.quadrature == curve.quadrature && r.t_over_l == curve.t_over_l) {
          out << " L" << r.level << '=' << format_double(r.center_deflection);
          reference = make_problem(r.problem, r.t_over_l).reference_deflection;
        }
      }
      if (reference) out << " (reference " << format_double(*reference) << ')';
      out << '\n';
      continue;
    }
    const auto& t = *curve.table;
    auto rate = [](const std::optional<double>& v) { return v ? format_double(std::round(*v * 1000.0) / 1000.0) : "n/a"; };
    out << " rate_L2=" << rate(t.rate_L2) << " rate_H1=" << rate(t.rate_H1) << " rate_s=" << rate(t.rate_s);
    if (curve.exact) out << "  (exact to round-off)";
    if (!curve.converging) out << "  NOT CONVERGING";
    out << '\n';
  }
}

void write_vtk(std::ostream& out, const FieldSnapshot& snapshot) {
  const auto& mesh = snapshot.mesh;
  const int n = mesh.num_standard();
  if (static_cast<int>(snapshot.samples.size()) != n) {
    throw Error(ErrorKind::InvalidArgument, "snapshot needs one sample per standard node");
  }
  out << "# vtk DataFile Version 3.0\n";
  out << "plate fields t_over_L=" << format_double(snapshot.t_over_l) << " quadrature=" << to_string(snapshot.quadrature)
      << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << n << " double\n";
  for (int a = 0; a < n; ++a) {
    const Point& x = mesh.node(a).x;
    out << format_double(x.x()) << ' ' << format_double(x.y()) << " 0\n";
  }
  out << "CELLS " << mesh.num_cells() << ' ' << 4 * mesh.num_cells() << '\n';
  for (const auto& cell : mesh.cells()) {
    out << "3 " << cell.vertices[0] << ' ' << cell.vertices[1] << ' ' << cell.vertices[2] << '\n';
  }
  out << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (int c = 0; c < mesh.num_cells(); ++c) out << "5\n";
  out << "POINT_DATA " << n << "\nSCALARS w double 1\nLOOKUP_TABLE default\n";
  for (const auto& s : snapshot.samples) out << format_double(s.w) << '\n';
  out << "VECTORS rotation double\n";
  for (const auto& s : snapshot.samples) out << format_double(s.r.x()) << ' ' << format_double(s.r.y()) << " 0\n";
  out << "VECTORS shear double\n";
  for (const auto& s : snapshot.samples) out << format_double(s.s.x()) << ' ' << format_double(s.s.y()) << " 0\n";
}

void write_vtk(const std::filesystem::path& path, const FieldSnapshot& snapshot) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
  write_vtk(out, snapshot);
}

void write_plot_script(const std::filesystem::path& path, const std::filesystem::path& csv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write " + path.string());
  out << R"(#!/usr/bin/env python3
# Log-log error curves from a plate convergence CSV.
import csv
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

source = sys.argv[1] if len(sys.argv) > 1 else ")"
      << csv.filename().string() << R"("
curves = defaultdict(list)
with open(source, newline="") as f:
    for row in csv.DictReader(f):
        if not row["rel_L2"]:
            continue
        key = (row["quadrature"], row["gamma"], row["t_over_L"])
        curves[key].append((float(row["h"]), float(row["rel_L2"]), float(row["rel_H1"])))

fig, axes = plt.subplots(1, 2, figsize=(10, 4))
for (quad, gamma, t), pts in sorted(curves.items()):
    pts.sort()
    h = [p[0] for p in pts]
    label = f"{quad}, gamma={gamma}, t/L={t}"
    axes[0].loglog(h, [p[1] for p in pts], "o-", label=label)
    axes[1].loglog(h, [p[2] for p in pts], "o-", label=label)
for ax, name in zip(axes, ["relative L2 error", "relative H1 seminorm error"]):
    ax.set_xlabel("h")
    ax.set_ylabel(name)
    ax.grid(True, which="both", alpha=0.3)
axes[0].legend(fontsize=7)
fig.tight_layout()
target = source.rsplit(".", 1)[0] + ".png"
fig.savefig(target, dpi=150)
print(target)
)";
}

}  // namespace vanp
