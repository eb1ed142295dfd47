#include "vanp/projection.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "vanp/error.hpp"

namespace vanp {

namespace {

using Triplet = Eigen::Triplet<double, int>;

// Collects triplets and folds them into a sparse sum in bounded chunks, so
// large element loops do not hold every contribution in memory at once.
class TripletAccumulator {
 public:
  TripletAccumulator(int rows, int cols, std::size_t chunk = 4'000'000) : sum_(rows, cols), chunk_(chunk) {
    buffer_.reserve(std::min<std::size_t>(chunk, 1'000'000));
  }

  void add(int row, int col, double value) {
    buffer_.emplace_back(row, col, value);
    if (buffer_.size() >= chunk_) flush();
  }

  [[nodiscard]] SparseMatrix finish() {
    flush();
    sum_.makeCompressed();
    return std::move(sum_);
  }

 private:
  void flush() {
    if (buffer_.empty()) return;
    SparseMatrix part(sum_.rows(), sum_.cols());
    part.setFromTriplets(buffer_.begin(), buffer_.end());
    if (sum_.nonZeros() == 0) {
      sum_ = std::move(part);
    } else {
      sum_ += part;
    }
    buffer_.clear();
  }

  SparseMatrix sum_;
  std::size_t chunk_;
  std::vector<Triplet> buffer_;
};

TriangulationMesh ensure_enhanced(const TriangulationMesh& mesh) {
  return mesh.is_enhanced() ? mesh : enhance_with_barycenters(mesh);
}

CellSetBasis from_raw(std::span<const BasisEval> evals) {
  CellSetBasis out;
  for (const auto& ev : evals) out.ids.insert(out.ids.end(), ev.contributors.begin(), ev.contributors.end());
  std::sort(out.ids.begin(), out.ids.end());
  out.ids.erase(std::unique(out.ids.begin(), out.ids.end()), out.ids.end());
  const auto nq = static_cast<Eigen::Index>(evals.size());
  const auto m = static_cast<Eigen::Index>(out.ids.size());
  out.phi.setZero(nq, m);
  out.dx.setZero(nq, m);
  out.dy.setZero(nq, m);
  for (Eigen::Index q = 0; q < nq; ++q) {
    const auto& ev = evals[static_cast<std::size_t>(q)];
    for (std::size_t a = 0; a < ev.contributors.size(); ++a) {
      const Eigen::Index col = out.column(ev.contributors[a]);
      out.phi(q, col) = ev.phi[a];
      out.dx(q, col) = ev.grad_phi[a].x();
      out.dy(q, col) = ev.grad_phi[a].y();
    }
  }
  return out;
}

CellSetBasis cell_set_basis(const TriangulationMesh& mesh, int cell_id, const TriQuadRule& rule, const NodeSet& nodes,
                            const MaxentConfig& config, QuadratureScheme scheme) {
  std::vector<BasisEval> interior;
  interior.reserve(rule.points.size());
  for (const auto& p : rule.points) interior.push_back(evaluate_basis(p, nodes, config));
  if (scheme != QuadratureScheme::QC3) return from_raw(interior);

  const auto edges = edge_rule(mesh, cell_id);
  std::vector<BasisEval> edge_evals;
  edge_evals.reserve(6);
  for (const auto& edge : edges.points) {
    for (const auto& p : edge) edge_evals.push_back(evaluate_basis(p, nodes, config));
  }
  auto corrected = qc3_correct(cell_id, rule, edges, interior, edge_evals);
  CellSetBasis out;
  out.ids = std::move(corrected.contributors);
  out.phi = corrected.phi;
  out.dx = corrected.dphi_x;
  out.dy = corrected.dphi_y;
  return out;
}

}  // namespace

std::string_view to_string(QuadratureScheme scheme) noexcept {
  switch (scheme) {
    case QuadratureScheme::QC3: return "qc3";
    case QuadratureScheme::ST3: return "st3";
    case QuadratureScheme::ST6: return "st6";
  }
  return "unknown";
}

QuadratureScheme parse_quadrature(std::string_view name) {
  for (auto s : {QuadratureScheme::QC3, QuadratureScheme::ST3, QuadratureScheme::ST6}) {
    if (name == to_string(s)) return s;
  }
  throw Error(ErrorKind::ConfigError, "unknown quadrature '" + std::string(name) + "'");
}

DofMap make_dof_map(const TriangulationMesh& mesh) {
  if (!mesh.is_enhanced()) throw Error(ErrorKind::InvalidMesh, "dof map needs the enhanced mesh");
  DofMap map;
  map.num_standard = mesh.num_standard();
  map.num_enhanced = mesh.num_nodes();
  for (int b : mesh.boundary_nodes()) {
    map.constrained.push_back(map.w_dof(b));
    map.constrained.push_back(map.r_dof(b, 0));
    map.constrained.push_back(map.r_dof(b, 1));
  }
  std::sort(map.constrained.begin(), map.constrained.end());
  return map;
}

Eigen::Index CellSetBasis::column(int id) const {
  const auto it = std::lower_bound(ids.begin(), ids.end(), id);
  return it != ids.end() && *it == id ? static_cast<Eigen::Index>(it - ids.begin()) : -1;
}

Discretization::Discretization(const TriangulationMesh& mesh, const MaxentConfig& config, QuadratureScheme scheme)
    : mesh_(ensure_enhanced(mesh)),
      config_(config),
      scheme_(scheme),
      standard_(make_node_set(mesh_, NodeSetKind::Standard)),
      enhanced_(make_node_set(mesh_, NodeSetKind::Enhanced)),
      dofs_(make_dof_map(mesh_)) {
  config_.validate();
  const auto order = scheme_ == QuadratureScheme::ST6 ? TriRuleOrder::ST6 : TriRuleOrder::ST3;
  cells_.reserve(static_cast<std::size_t>(mesh_.num_cells()));
  for (const auto& cell : mesh_.cells()) {
    CellBasis cb;
    cb.rule = interior_rule(mesh_, cell.id, order);
    cb.standard = cell_set_basis(mesh_, cell.id, cb.rule, standard_, config_, scheme_);
    cb.enhanced = cell_set_basis(mesh_, cell.id, cb.rule, enhanced_, config_, scheme_);
    cells_.push_back(std::move(cb));
  }
}

ProjectionTable build_projection_tables(const Discretization& disc) {
  const auto& mesh = disc.mesh();
  const int ns = mesh.num_standard();
  const int ne = mesh.num_nodes();
  ProjectionTable table;
  table.scheme = disc.scheme();
  table.volume.assign(static_cast<std::size_t>(ns), 0.0);
  std::vector<Triplet> grad_triplets;
  std::vector<Triplet> value_triplets;

  for (const auto& cell : mesh.cells()) {
    const auto& cb = disc.cells()[static_cast<std::size_t>(cell.id)];
    const auto& std_basis = cb.standard;
    const auto& enh_basis = cb.enhanced;
    for (int c : cell.vertices) {
      const Eigen::Index col = std_basis.column(c);
      if (col < 0) continue;
      for (std::size_t q = 0; q < cb.rule.weights.size(); ++q) {
        const auto qi = static_cast<Eigen::Index>(q);
        const double weight = cb.rule.weights[q] * std_basis.phi(qi, col);
        if (weight == 0.0) continue;
        table.volume[static_cast<std::size_t>(c)] += weight;
        for (std::size_t a = 0; a < std_basis.ids.size(); ++a) {
          const auto ai = static_cast<Eigen::Index>(a);
          grad_triplets.emplace_back(2 * c, std_basis.ids[a], weight * std_basis.dx(qi, ai));
          grad_triplets.emplace_back(2 * c + 1, std_basis.ids[a], weight * std_basis.dy(qi, ai));
        }
        for (std::size_t a = 0; a < enh_basis.ids.size(); ++a) {
          value_triplets.emplace_back(c, enh_basis.ids[a], weight * enh_basis.phi(qi, static_cast<Eigen::Index>(a)));
        }
      }
    }
  }

  for (int c = 0; c < ns; ++c) {
    if (!(table.volume[static_cast<std::size_t>(c)] > 0.0)) {
      throw Error(ErrorKind::ProjectionDegeneracy, "non-positive nodal volume integral at node " + std::to_string(c));
    }
  }
  table.gradient.resize(2 * ns, ns);
  table.gradient.setFromTriplets(grad_triplets.begin(), grad_triplets.end());
  table.value.resize(ns, ne);
  table.value.setFromTriplets(value_triplets.begin(), value_triplets.end());
  for (int c = 0; c < ns; ++c) {
    const double inv = 1.0 / table.volume[static_cast<std::size_t>(c)];
    for (int j = 0; j < 2; ++j) {
      for (SparseRowMatrix::InnerIterator it(table.gradient, 2 * c + j); it; ++it) it.valueRef() *= inv;
    }
    for (SparseRowMatrix::InnerIterator it(table.value, c); it; ++it) it.valueRef() *= inv;
  }

  const DofMap& dofs = disc.dofs();
  std::vector<Triplet> shear;
  shear.reserve(static_cast<std::size_t>(table.gradient.nonZeros() + 2 * table.value.nonZeros()));
  for (int c = 0; c < ns; ++c) {
    for (int j = 0; j < 2; ++j) {
      for (SparseRowMatrix::InnerIterator it(table.gradient, 2 * c + j); it; ++it) {
        shear.emplace_back(2 * c + j, dofs.w_dof(static_cast<int>(it.col())), it.value());
      }
      for (SparseRowMatrix::InnerIterator it(table.value, c); it; ++it) {
        shear.emplace_back(2 * c + j, dofs.r_dof(static_cast<int>(it.col()), j), -it.value());
      }
    }
  }
  table.shear_operator.resize(2 * ns, dofs.size());
  table.shear_operator.setFromTriplets(shear.begin(), shear.end());
  return table;
}

SparseMatrix standard_mass_matrix(const Discretization& disc) {
  const int ns = disc.mesh().num_standard();
  TripletAccumulator acc(ns, ns);
  for (const auto& cb : disc.cells()) {
    const auto& basis = cb.standard;
    const auto m = static_cast<Eigen::Index>(basis.ids.size());
    for (std::size_t q = 0; q < cb.rule.weights.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      for (Eigen::Index a = 0; a < m; ++a) {
        const double wa = cb.rule.weights[q] * basis.phi(qi, a);
        if (wa == 0.0) continue;
        for (Eigen::Index b = 0; b < m; ++b) {
          const double v = wa * basis.phi(qi, b);
          if (v != 0.0) acc.add(basis.ids[static_cast<std::size_t>(a)], basis.ids[static_cast<std::size_t>(b)], v);
        }
      }
    }
  }
  return acc.finish();
}

SparseMatrix mirror_upper(const SparseMatrix& m) {
  SparseMatrix upper = m.triangularView<Eigen::Upper>();
  SparseMatrix strict = m.triangularView<Eigen::StrictlyUpper>();
  SparseMatrix lower = strict.transpose();
  SparseMatrix out = upper + lower;
  out.makeCompressed();
  return out;
}

Eigen::VectorXd assemble_load(const Discretization& disc, const BenchmarkProblem& problem) {
  const auto& mesh = disc.mesh();
  Eigen::VectorXd load = Eigen::VectorXd::Zero(disc.dofs().size());
  for (const auto& cell : mesh.cells()) {
    const auto rule = interior_rule(mesh, cell.id, TriRuleOrder::ST6);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double qv = problem.load(rule.points[q]);
      if (qv == 0.0) continue;
      const auto ev = evaluate_basis(rule.points[q], disc.standard(), disc.config());
      for (std::size_t a = 0; a < ev.contributors.size(); ++a) {
        load(disc.dofs().w_dof(ev.contributors[a])) += rule.weights[q] * ev.phi[a] * qv;
      }
    }
  }
  return load;
}

StiffnessOperator assemble_operator(const Discretization& disc, const ProjectionTable& tables,
                                    const BenchmarkProblem& problem) {
  const DofMap& dofs = disc.dofs();
  if (tables.scheme != disc.scheme() || tables.shear_operator.cols() != dofs.size() ||
      tables.shear_operator.rows() != 2 * dofs.num_standard) {
    throw Error(ErrorKind::InvalidState, "projection tables do not match the discretization");
  }
  StiffnessOperator op;
  op.dofs = dofs;
  op.moduli = problem.material.moduli;

  // Bending: sum over cells and points of w B^T C B on the enhanced set.
  TripletAccumulator bending(dofs.size(), dofs.size());
  Eigen::MatrixXd local;
  Eigen::MatrixXd b;
  for (const auto& cb : disc.cells()) {
    const auto& basis = cb.enhanced;
    const auto m = static_cast<Eigen::Index>(basis.ids.size());
    local.setZero(2 * m, 2 * m);
    b.setZero(3, 2 * m);
    for (std::size_t q = 0; q < cb.rule.weights.size(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      for (Eigen::Index a = 0; a < m; ++a) {
        b(0, 2 * a) = basis.dx(qi, a);
        b(1, 2 * a + 1) = basis.dy(qi, a);
        b(2, 2 * a) = basis.dy(qi, a);
        b(2, 2 * a + 1) = basis.dx(qi, a);
      }
      local.noalias() += cb.rule.weights[q] * (b.transpose() * (op.moduli * b));
    }
    for (Eigen::Index a = 0; a < 2 * m; ++a) {
      const int row = dofs.r_dof(basis.ids[static_cast<std::size_t>(a / 2)], static_cast<int>(a % 2));
      for (Eigen::Index c = 0; c < 2 * m; ++c) {
        const int col = dofs.r_dof(basis.ids[static_cast<std::size_t>(c / 2)], static_cast<int>(c % 2));
        if (col >= row && local(a, c) != 0.0) bending.add(row, col, local(a, c));
      }
    }
  }
  op.bending = mirror_upper(bending.finish());

  // Shear: the barred strain at a point is sum_c phi_c(x) P_c u, so the
  // quadrature sum collapses to P^T (H kron I2) P with the standard-set mass
  // matrix H built on the same points.
  const SparseMatrix mass = standard_mass_matrix(disc);
  std::vector<Triplet> kron;
  kron.reserve(static_cast<std::size_t>(2 * mass.nonZeros()));
  for (int k = 0; k < mass.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(mass, k); it; ++it) {
      kron.emplace_back(2 * static_cast<int>(it.row()), 2 * static_cast<int>(it.col()), it.value());
      kron.emplace_back(2 * static_cast<int>(it.row()) + 1, 2 * static_cast<int>(it.col()) + 1, it.value());
    }
  }
  SparseMatrix mass2(2 * mass.rows(), 2 * mass.cols());
  mass2.setFromTriplets(kron.begin(), kron.end());
  const SparseMatrix p = tables.shear_operator;
  const SparseMatrix hp = mass2 * p;
  const SparseMatrix pt = p.transpose();
  SparseMatrix shear = pt * hp;
  op.shear = mirror_upper(shear);

  op.load = assemble_load(disc, problem);
  return op;
}

GlobalSystem assemble_system(const StiffnessOperator& op, const PlateMaterial& material) {
  if (!op.moduli.isApprox(material.moduli, 1e-14)) {
    throw Error(ErrorKind::InvalidState, "stiffness operator was assembled for different bending moduli");
  }
  GlobalSystem sys;
  sys.dofs = op.dofs;
  sys.matrix = op.bending + material.shear_factor() * op.shear;
  sys.matrix.makeCompressed();
  sys.rhs = op.load;
  return sys;
}

GlobalSystem assemble_system(const Discretization& disc, const ProjectionTable& tables,
                             const BenchmarkProblem& problem) {
  return assemble_system(assemble_operator(disc, tables, problem), problem.material);
}

PlateSolution split_solution(const DofMap& map, Eigen::VectorXd dofs) {
  if (dofs.size() != map.size()) throw Error(ErrorKind::InvalidArgument, "solution size does not match the dof map");
  PlateSolution s;
  s.w = dofs.head(map.num_standard);
  s.r.resize(map.num_enhanced, 2);
  for (int a = 0; a < map.num_enhanced; ++a) {
    s.r(a, 0) = dofs(map.r_dof(a, 0));
    s.r(a, 1) = dofs(map.r_dof(a, 1));
  }
  s.dofs = std::move(dofs);
  return s;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> recover_nodal_shear(const PlateSolution& solution,
                                                             const ProjectionTable& tables,
                                                             const PlateMaterial& material) {
  if (tables.shear_operator.cols() != solution.dofs.size()) {
    throw Error(ErrorKind::InvalidState, "projection tables do not match the solution");
  }
  const Eigen::VectorXd strain = tables.shear_operator * solution.dofs;
  const auto ns = strain.size() / 2;
  Eigen::Matrix<double, Eigen::Dynamic, 2> s(ns, 2);
  for (Eigen::Index c = 0; c < ns; ++c) {
    s(c, 0) = material.shear_factor() * strain(2 * c);
    s(c, 1) = material.shear_factor() * strain(2 * c + 1);
  }
  return s;
}

}  // namespace vanp
