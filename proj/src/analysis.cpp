#include "vanp/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "vanp/error.hpp"

namespace vanp {

ConvergenceTable make_convergence_table(std::vector<ErrorReport> rows) {
  ConvergenceTable table;
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.h > b.h; });
  table.rows = std::move(rows);
  if (table.rows.size() < 2) return table;

  std::vector<double> h, l2, h1, s;
  bool has_s = true;
  for (const auto& row : table.rows) {
    h.push_back(row.h);
    l2.push_back(row.rel_L2);
    h1.push_back(row.rel_H1);
    if (row.rel_s_nodal && *row.rel_s_nodal > 0.0) {
      s.push_back(*row.rel_s_nodal);
    } else {
      has_s = false;
    }
  }
  const auto positive = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double e) { return e > 0.0; });
  };
  if (positive(l2)) table.rate_L2 = fit_rate(h, l2);
  if (positive(h1)) table.rate_H1 = fit_rate(h, h1);
  if (has_s) table.rate_s = fit_rate(h, s);
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    const auto& a = table.rows[k - 1];
    const auto& b = table.rows[k];
    const double dh = std::log(a.h / b.h);
    table.pairwise.push_back({std::log(a.rel_L2 / b.rel_L2) / dh, std::log(a.rel_H1 / b.rel_H1) / dh});
  }
  return table;
}

double fit_rate(std::span<const double> h, std::span<const double> error) {
  if (h.size() != error.size() || h.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "rate fit needs at least two (h, error) pairs");
  }
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (!(h[k] > 0.0) || !(error[k] > 0.0)) throw Error(ErrorKind::InvalidArgument, "rate fit needs positive data");
    sx += std::log(h[k]);
    sy += std::log(error[k]);
  }
  const double n = static_cast<double>(h.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double dx = std::log(h[k]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(error[k]) - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::InvalidArgument, "rate fit needs distinct mesh sizes");
  return sxy / sxx;
}

ErrorReport compute_error_norms(const Discretization& disc, const ProjectionTable& tables,
                                const PlateSolution& solution, const BenchmarkProblem& problem) {
  if (!problem.has_exact()) {
    throw Error(ErrorKind::UnsupportedProblem, std::string(to_string(problem.kind)) + " has no exact solution");
  }
  const auto& mesh = disc.mesh();
  const DofMap& dofs = disc.dofs();
  if (solution.dofs.size() != dofs.size()) throw Error(ErrorKind::InvalidState, "solution does not match the mesh");

  double l2_num = 0.0, l2_den = 0.0, h1_num = 0.0, h1_den = 0.0;
  for (const auto& cell : mesh.cells()) {
    const auto rule = interior_rule(mesh, cell.id, TriRuleOrder::ST6);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Point& x = rule.points[q];
      const auto ex = problem.exact(x);
      const auto bs = evaluate_basis(x, disc.standard(), disc.config());
      const auto be = evaluate_basis(x, disc.enhanced(), disc.config());
      double w = 0.0;
      for (std::size_t a = 0; a < bs.contributors.size(); ++a) w += bs.phi[a] * solution.w(bs.contributors[a]);
      Eigen::Vector2d r = Eigen::Vector2d::Zero();
      for (std::size_t a = 0; a < be.contributors.size(); ++a) {
        r += be.phi[a] * solution.r.row(be.contributors[a]).transpose();
      }
      l2_num += rule.weights[q] * ((ex.w - w) * (ex.w - w) + (ex.r - r).squaredNorm());
      l2_den += rule.weights[q] * (ex.w * ex.w + ex.r.squaredNorm());
    }

    const auto& cb = disc.cells()[static_cast<std::size_t>(cell.id)];
    for (std::size_t q = 0; q < cb.rule.points.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      const auto ex = problem.exact(cb.rule.points[q]);
      Eigen::Vector2d gw = Eigen::Vector2d::Zero();
      for (std::size_t a = 0; a < cb.standard.ids.size(); ++a) {
        const auto ai = static_cast<Eigen::Index>(a);
        gw += solution.w(cb.standard.ids[a]) * Eigen::Vector2d(cb.standard.dx(qi, ai), cb.standard.dy(qi, ai));
      }
      Eigen::Matrix2d gr = Eigen::Matrix2d::Zero();
      for (std::size_t a = 0; a < cb.enhanced.ids.size(); ++a) {
        const auto ai = static_cast<Eigen::Index>(a);
        const Eigen::RowVector2d d(cb.enhanced.dx(qi, ai), cb.enhanced.dy(qi, ai));
        gr += solution.r.row(cb.enhanced.ids[a]).transpose() * d;
      }
      h1_num += cb.rule.weights[q] * ((ex.grad_w - gw).squaredNorm() + (ex.grad_r - gr).squaredNorm());
      h1_den += cb.rule.weights[q] * (ex.grad_w.squaredNorm() + ex.grad_r.squaredNorm());
    }
  }

  ErrorReport report;
  report.h = mesh.h();
  report.dofs = dofs.size();
  report.rel_L2 = l2_den > 0.0 ? std::sqrt(l2_num / l2_den) : std::sqrt(l2_num);
  report.rel_H1 = h1_den > 0.0 ? std::sqrt(h1_num / h1_den) : std::sqrt(h1_num);

  const auto s = recover_nodal_shear(solution, tables, problem.material);
  double s_num = 0.0, s_den = 0.0;
  for (int c = 0; c < mesh.num_standard(); ++c) {
    const Eigen::Vector2d exact = problem.exact_shear(mesh.node(c).x);
    s_num += (exact - s.row(c).transpose()).squaredNorm();
    s_den += exact.squaredNorm();
  }
  if (s_den > 0.0) report.rel_s_nodal = std::sqrt(s_num / s_den);
  return report;
}

std::vector<FieldSample> sample_field(const Discretization& disc, const ProjectionTable& tables,
                                      const PlateSolution& solution, const PlateMaterial& material,
                                      std::span<const Point> points) {
  const auto s = recover_nodal_shear(solution, tables, material);
  std::vector<FieldSample> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    FieldSample sample;
    sample.x = x;
    const auto bs = evaluate_basis(x, disc.standard(), disc.config());
    const auto be = evaluate_basis(x, disc.enhanced(), disc.config());
    for (std::size_t a = 0; a < bs.contributors.size(); ++a) {
      sample.w += bs.phi[a] * solution.w(bs.contributors[a]);
      sample.s += bs.phi[a] * s.row(bs.contributors[a]).transpose();
    }
    for (std::size_t a = 0; a < be.contributors.size(); ++a) {
      sample.r += be.phi[a] * solution.r.row(be.contributors[a]).transpose();
    }
    out.push_back(sample);
  }
  return out;
}

}  // namespace vanp
