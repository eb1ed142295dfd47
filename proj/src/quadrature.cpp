#include "vanp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>

#include "vanp/error.hpp"

namespace vanp {

namespace {

// Degree-4 six-point rule: two orbits of the form (a, a, 1-2a).
constexpr double kSt6WeightA = 0.223381589678011465944;
constexpr double kSt6CoordA = 0.445948490915964886319;
constexpr double kSt6WeightB = 0.109951743655321867389;
constexpr double kSt6CoordB = 0.091576213509770743460;

Point from_barycentric(const std::array<Point, 3>& v, double l0, double l1, double l2) {
  return l0 * v[0] + l1 * v[1] + l2 * v[2];
}

using EdgeMatrix = Eigen::Matrix<double, 3, 6>;

// Rows map edge values of phi to the boundary terms of the constraints for
// derivative direction j, with the polynomial base shifted by `origin`.
EdgeMatrix boundary_operator(const EdgeQuadRule& edges, int j, const Point& origin) {
  EdgeMatrix op;
  for (int k = 0; k < 3; ++k) {
    for (int g = 0; g < 2; ++g) {
      const auto kk = static_cast<std::size_t>(k);
      const auto gg = static_cast<std::size_t>(g);
      const double nv = edges.normals[kk](j) * edges.weights[kk][gg];
      const Point e = edges.points[kk][gg] - origin;
      op(0, 2 * k + g) = nv;
      op(1, 2 * k + g) = e.x() * nv;
      op(2, 2 * k + g) = e.y() * nv;
    }
  }
  return op;
}

Eigen::Matrix3d weight_matrix(const TriQuadRule& rule, const Point& origin) {
  Eigen::Matrix3d w;
  for (int h = 0; h < 3; ++h) {
    const auto hh = static_cast<std::size_t>(h);
    const Point p = rule.points[hh] - origin;
    w(0, h) = rule.weights[hh];
    w(1, h) = rule.weights[hh] * p.x();
    w(2, h) = rule.weights[hh] * p.y();
  }
  return w;
}

struct AlignedValues {
  std::vector<int> ids;
  Eigen::Matrix<double, 3, Eigen::Dynamic> interior;
  Eigen::Matrix<double, 6, Eigen::Dynamic> edge;
};

AlignedValues align(std::span<const BasisEval> interior_evals, std::span<const BasisEval> edge_evals) {
  AlignedValues out;
  for (const auto* set : {&interior_evals, &edge_evals}) {
    for (const auto& ev : *set) out.ids.insert(out.ids.end(), ev.contributors.begin(), ev.contributors.end());
  }
  std::sort(out.ids.begin(), out.ids.end());
  out.ids.erase(std::unique(out.ids.begin(), out.ids.end()), out.ids.end());
  const auto col = [&](int id) {
    return static_cast<Eigen::Index>(std::lower_bound(out.ids.begin(), out.ids.end(), id) - out.ids.begin());
  };
  const auto m = static_cast<Eigen::Index>(out.ids.size());
  out.interior.setZero(3, m);
  out.edge.setZero(6, m);
  for (int h = 0; h < 3; ++h) {
    const auto& ev = interior_evals[static_cast<std::size_t>(h)];
    for (std::size_t a = 0; a < ev.contributors.size(); ++a) out.interior(h, col(ev.contributors[a])) = ev.phi[a];
  }
  for (int q = 0; q < 6; ++q) {
    const auto& ev = edge_evals[static_cast<std::size_t>(q)];
    for (std::size_t a = 0; a < ev.contributors.size(); ++a) out.edge(q, col(ev.contributors[a])) = ev.phi[a];
  }
  return out;
}

}  // namespace

TriQuadRule interior_rule(const std::array<Point, 3>& v, TriRuleOrder order) {
  const double area = signed_area(v[0], v[1], v[2]);
  TriQuadRule rule;
  rule.order = order;
  if (order == TriRuleOrder::ST3) {
    constexpr double hi = 2.0 / 3.0, lo = 1.0 / 6.0;
    rule.points = {from_barycentric(v, hi, lo, lo), from_barycentric(v, lo, hi, lo), from_barycentric(v, lo, lo, hi)};
    rule.weights.assign(3, area / 3.0);
    return rule;
  }
  for (const auto& [weight, a] : {std::pair{kSt6WeightA, kSt6CoordA}, std::pair{kSt6WeightB, kSt6CoordB}}) {
    const double b = 1.0 - 2.0 * a;
    rule.points.push_back(from_barycentric(v, b, a, a));
    rule.points.push_back(from_barycentric(v, a, b, a));
    rule.points.push_back(from_barycentric(v, a, a, b));
    for (int i = 0; i < 3; ++i) rule.weights.push_back(weight * area);
  }
  return rule;
}

TriQuadRule interior_rule(const TriangulationMesh& mesh, int cell_id, TriRuleOrder order) {
  return interior_rule(mesh.cell_points(cell_id), order);
}

EdgeQuadRule edge_rule(const std::array<Point, 3>& v) {
  EdgeQuadRule rule;
  const double offset = 0.5 / std::sqrt(3.0);
  for (std::size_t k = 0; k < 3; ++k) {
    const Point& a = v[k];
    const Point& b = v[(k + 1) % 3];
    const Point d = b - a;
    const double length = d.norm();
    const Point mid = 0.5 * (a + b);
    rule.points[k] = {mid - offset * d, mid + offset * d};
    rule.weights[k] = {0.5 * length, 0.5 * length};
    // clockwise rotation of a counter-clockwise edge points outward
    rule.normals[k] = Point(d.y(), -d.x()) / length;
  }
  return rule;
}

EdgeQuadRule edge_rule(const TriangulationMesh& mesh, int cell_id) { return edge_rule(mesh.cell_points(cell_id)); }

CorrectedCellQuadrature qc3_correct(int cell_id, const TriQuadRule& interior, const EdgeQuadRule& edges,
                                    std::span<const BasisEval> interior_evals, std::span<const BasisEval> edge_evals) {
  if (interior.points.size() != 3 || interior_evals.size() != 3 || edge_evals.size() != 6) {
    throw Error(ErrorKind::InvalidArgument, "QC3 needs 3 interior and 6 edge evaluations");
  }
  auto values = align(interior_evals, edge_evals);

  // The base {1, x - xc, y - xc} spans the same space as {1, x, y}; shifting
  // to the centroid keeps W well scaled on cells far from the origin.
  const Point origin = (interior.points[0] + interior.points[1] + interior.points[2]) / 3.0;
  const Eigen::Matrix3d w = weight_matrix(interior, origin);
  const Eigen::PartialPivLU<Eigen::Matrix3d> lu(w);
  const double area = w.row(0).sum();
  if (!(std::abs(lu.determinant()) > 1e-14 * area * w.block<2, 3>(1, 0).squaredNorm())) {
    throw Error(ErrorKind::DegenerateRule, "singular QC3 weight matrix on cell " + std::to_string(cell_id));
  }

  const Eigen::RowVector3d weights = w.row(0);
  const Eigen::Matrix<double, 1, Eigen::Dynamic> volume_term = weights * values.interior;

  CorrectedCellQuadrature out;
  out.cell = cell_id;
  out.interior = interior;
  out.contributors = std::move(values.ids);
  out.phi = values.interior;
  for (int j = 0; j < 2; ++j) {
    Eigen::Matrix<double, 3, Eigen::Dynamic> rhs = boundary_operator(edges, j, origin) * values.edge;
    rhs.row(1 + j) -= volume_term;
    Eigen::Matrix<double, 3, Eigen::Dynamic> d = lu.solve(rhs);
    (j == 0 ? out.dphi_x : out.dphi_y) = std::move(d);
  }
  return out;
}

double qc3_constraint_residual(const CorrectedCellQuadrature& corrected, const EdgeQuadRule& edges,
                               std::span<const BasisEval> edge_evals) {
  // Rebuild the constraints in absolute coordinates, exactly as written.
  const Point origin = Point::Zero();
  std::vector<BasisEval> interior(3);
  for (int h = 0; h < 3; ++h) {
    auto& ev = interior[static_cast<std::size_t>(h)];
    ev.contributors = corrected.contributors;
    ev.phi.resize(corrected.contributors.size());
    for (std::size_t a = 0; a < ev.phi.size(); ++a) ev.phi[a] = corrected.phi(h, static_cast<Eigen::Index>(a));
  }
  const auto values = align(interior, edge_evals);
  const Eigen::Matrix3d w = weight_matrix(corrected.interior, origin);
  const double area = w.row(0).sum();
  double worst = 0.0;
  for (int j = 0; j < 2; ++j) {
    Eigen::Matrix<double, 3, Eigen::Dynamic> f = boundary_operator(edges, j, origin) * values.edge;
    f.row(1 + j) -= w.row(0) * values.interior;
    const auto& d = j == 0 ? corrected.dphi_x : corrected.dphi_y;
    // corrected.contributors == values.ids when built by qc3_correct
    const Eigen::Matrix<double, 3, Eigen::Dynamic> r = w * d - f;
    for (Eigen::Index a = 0; a < r.cols(); ++a) {
      const double scale = std::max(f.col(a).cwiseAbs().maxCoeff(), area);
      worst = std::max(worst, r.col(a).cwiseAbs().maxCoeff() / scale);
    }
  }
  return worst;
}

}  // namespace vanp
