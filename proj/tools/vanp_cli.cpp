// Batch driver: `vanp run ...` and `vanp compare ...`.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vanp/driver.hpp"
#include "vanp/error.hpp"

namespace {

constexpr int kConfigFailure = 2;
constexpr int kNumericalFailure = 3;

int exit_code(vanp::ErrorKind kind) {
  switch (kind) {
    case vanp::ErrorKind::ConfigError:
    case vanp::ErrorKind::InvalidArgument:
    case vanp::ErrorKind::FormatError:
    case vanp::ErrorKind::InvalidMesh:
    case vanp::ErrorKind::TopologyError:
    case vanp::ErrorKind::UnsupportedProblem: return kConfigFailure;
    default: return kNumericalFailure;
  }
}

void report_error(std::string_view kind, const std::string& message) {
  nlohmann::json err{{"error", kind}, {"message", message}};
  std::cerr << err.dump() << '\n';
}

struct Flags {
  std::string config, problem, t_over_l, quadrature, pattern, out, vtk;
  std::vector<std::string> meshes;
  double gamma = 0.0, skew = 0.0;
  int levels = 0;
  std::uint64_t seed = 0;
  bool timing = false;
};

void add_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "JSON config; flags override its values");
  cmd.add_option("--problem", f.problem, "patch | circle | square | parallelogram");
  cmd.add_option("--t-over-l", f.t_over_l, "comma-separated normalized thicknesses");
  cmd.add_option("--gamma", f.gamma, "maxent support parameter (default 2.0)");
  cmd.add_option("--quadrature", f.quadrature, "qc3 | st3 | st6 (default qc3)");
  cmd.add_option("--levels", f.levels, "number of refinement levels");
  cmd.add_option("--mesh", f.meshes, "mesh files (.node/.ele stems), coarse to fine")->delimiter(',');
  cmd.add_option("--mesh-pattern", f.pattern, "structured | unstructured");
  cmd.add_option("--skew-deg", f.skew, "parallelogram skew angle (default 45)");
  cmd.add_option("--seed", f.seed, "seed for perturbed meshes");
  cmd.add_option("--out", f.out, "CSV output path");
  cmd.add_option("--vtk", f.vtk, "VTK snapshot path for the finest mesh");
  cmd.add_flag("--timing", f.timing, "fill the runtime_s column");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw vanp::Error(vanp::ErrorKind::ConfigError, "bad t/L value '" + item + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

vanp::RunConfig build_config(const CLI::App& cmd, const Flags& f) {
  vanp::RunConfig c = f.config.empty() ? vanp::RunConfig{} : vanp::load_config(f.config);
  auto given = [&](const char* name) { return cmd.count(name) > 0; };
  if (given("--problem")) c.problem = vanp::parse_problem_kind(f.problem);
  if (given("--t-over-l")) c.t_over_l = parse_list(f.t_over_l);
  if (given("--gamma")) c.gamma = f.gamma;
  if (given("--quadrature")) c.quadrature = vanp::parse_quadrature(f.quadrature);
  if (given("--levels")) {
    c.levels = f.levels;
    c.meshes.clear();
  }
  if (given("--mesh")) c.meshes.assign(f.meshes.begin(), f.meshes.end());
  if (given("--mesh-pattern")) c.pattern = vanp::parse_mesh_pattern(f.pattern);
  if (given("--skew-deg")) c.skew_deg = f.skew;
  if (given("--seed")) c.seed = f.seed;
  if (given("--out")) c.out = f.out;
  if (given("--vtk")) c.vtk = f.vtk;
  if (given("--timing")) c.timing = f.timing;
  c.validate();
  return c;
}

std::filesystem::path snapshot_path(const vanp::RunConfig& c, const vanp::FieldSnapshot& s, bool compare) {
  if (c.t_over_l.size() == 1 && !compare) return c.vtk;
  auto stem = c.vtk.stem().string() + "_t" + vanp::format_double(s.t_over_l);
  if (compare) stem += "_" + std::string(vanp::to_string(s.quadrature));
  return c.vtk.parent_path() / (stem + (c.vtk.has_extension() ? c.vtk.extension().string() : ".vtk"));
}

void write_outputs(const vanp::RunConfig& c, const std::vector<vanp::StudyRow>& rows) {
  if (c.out.empty()) {
    vanp::write_csv(std::cout, rows, c.timing);
    return;
  }
  vanp::write_csv(c.out, rows, c.timing);
  vanp::write_plot_script(c.out.parent_path() / (c.out.stem().string() + "_plot.py"), c.out);
}

int execute(const vanp::RunConfig& c, bool compare) {
  vanp::SnapshotSink sink;
  if (!c.vtk.empty()) {
    sink = [&](const vanp::FieldSnapshot& s) { vanp::write_vtk(snapshot_path(c, s, compare), s); };
  }
  try {
    const auto result = compare ? vanp::compare_quadratures(c, sink) : vanp::run_study(c, {}, sink);
    write_outputs(c, result.rows);
    vanp::write_summary(std::cout, result);
    return 0;
  } catch (const vanp::StudyFailure& failure) {
    write_outputs(c, failure.completed());
    report_error(vanp::to_string(failure.kind()), failure.what());
    return exit_code(failure.kind());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meshfree Reissner-Mindlin plate solver (volume-averaged nodal projection)"};
  app.require_subcommand(1);
  Flags run_flags, compare_flags;
  auto* run = app.add_subcommand("run", "convergence study for one quadrature");
  auto* compare = app.add_subcommand("compare", "QC3, ST6 and ST3 on identical meshes");
  add_flags(*run, run_flags);
  add_flags(*compare, compare_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report_error("config-error", e.what());
    return kConfigFailure;
  }

  try {
    const bool is_compare = compare->parsed();
    const auto config = build_config(is_compare ? *compare : *run, is_compare ? compare_flags : run_flags);
    return execute(config, is_compare);
  } catch (const vanp::Error& e) {
    report_error(vanp::to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return kNumericalFailure;
  }
}
