#include "vanp/solve.hpp"

#include <memory>
#include <string>

#include <suitesparse/cholmod.h>

#include "vanp/error.hpp"

namespace vanp {

namespace {

using Triplet = Eigen::Triplet<double, int>;

class CholmodSession {
 public:
  CholmodSession() { cholmod_start(&common_); }
  ~CholmodSession() {
    if (factor_ != nullptr) cholmod_free_factor(&factor_, &common_);
    cholmod_finish(&common_);
  }
  CholmodSession(const CholmodSession&) = delete;
  CholmodSession& operator=(const CholmodSession&) = delete;

  cholmod_common* common() noexcept { return &common_; }
  cholmod_factor*& factor() noexcept { return factor_; }

 private:
  cholmod_common common_{};
  cholmod_factor* factor_ = nullptr;
};

// Non-owning view of a compressed column-major matrix; CHOLMOD reads only
// the upper triangle (stype = 1).
cholmod_sparse view_upper(const SparseMatrix& a) {
  cholmod_sparse view{};
  view.nrow = static_cast<std::size_t>(a.rows());
  view.ncol = static_cast<std::size_t>(a.cols());
  view.nzmax = static_cast<std::size_t>(a.nonZeros());
  view.p = const_cast<int*>(a.outerIndexPtr());
  view.i = const_cast<int*>(a.innerIndexPtr());
  view.x = const_cast<double*>(a.valuePtr());
  view.stype = 1;
  view.itype = CHOLMOD_INT;
  view.xtype = CHOLMOD_REAL;
  view.dtype = CHOLMOD_DOUBLE;
  view.sorted = 1;
  view.packed = 1;
  return view;
}

constexpr int kRefinementSteps = 2;

// b - A x with long double accumulation.
Eigen::VectorXd extended_residual(const SparseMatrix& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  std::vector<long double> r(static_cast<std::size_t>(b.size()));
  for (Eigen::Index k = 0; k < b.size(); ++k) r[static_cast<std::size_t>(k)] = b(k);
  for (int col = 0; col < a.outerSize(); ++col) {
    const long double xc = x(col);
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      r[static_cast<std::size_t>(it.row())] -= static_cast<long double>(it.value()) * xc;
    }
  }
  Eigen::VectorXd out(b.size());
  for (Eigen::Index k = 0; k < b.size(); ++k) out(k) = static_cast<double>(r[static_cast<std::size_t>(k)]);
  return out;
}

}  // namespace

BoundaryValues prescribe_boundary(const TriangulationMesh& mesh, const DofMap& dofs, const BenchmarkProblem& problem) {
  BoundaryValues values;
  for (int b : mesh.boundary_nodes()) {
    const Point& x = mesh.node(b).x;
    const Eigen::Vector2d r = problem.boundary_r(x);
    values[dofs.w_dof(b)] = problem.boundary_w(x);
    values[dofs.r_dof(b, 0)] = r.x();
    values[dofs.r_dof(b, 1)] = r.y();
  }
  return values;
}

ReducedSystem apply_dirichlet(const GlobalSystem& system, const BoundaryValues& values) {
  const int n = system.dofs.size();
  if (system.matrix.rows() != n || system.matrix.cols() != n || system.rhs.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "system dimensions do not match its dof map");
  }
  ReducedSystem out;
  out.total_dofs = n;
  out.constrained = system.dofs.constrained;
  out.prescribed.resize(static_cast<Eigen::Index>(out.constrained.size()));

  // position in the reduced (free) or constrained numbering, encoded as
  // k >= 0 for free and -(k + 1) for constrained
  std::vector<int> slot(static_cast<std::size_t>(n), 0);
  for (std::size_t k = 0; k < out.constrained.size(); ++k) {
    const int dof = out.constrained[k];
    const auto it = values.find(dof);
    if (it == values.end()) {
      throw Error(ErrorKind::ConstraintCoverage, "no prescribed value for constrained dof " + std::to_string(dof));
    }
    out.prescribed(static_cast<Eigen::Index>(k)) = it->second;
    slot[static_cast<std::size_t>(dof)] = -static_cast<int>(k) - 1;
  }
  for (int dof = 0; dof < n; ++dof) {
    if (slot[static_cast<std::size_t>(dof)] < 0) continue;
    slot[static_cast<std::size_t>(dof)] = static_cast<int>(out.free.size());
    out.free.push_back(dof);
  }
  const auto nf = static_cast<int>(out.free.size());
  const auto nc = static_cast<int>(out.constrained.size());

  std::vector<Triplet> ff, cf, cc;
  ff.reserve(static_cast<std::size_t>(system.matrix.nonZeros()));
  // The lift -K_fc g cancels heavily for thin plates (shear terms ~ t^-2),
  // so it is accumulated in extended precision.
  std::vector<long double> lift(static_cast<std::size_t>(nf));
  out.rhs.resize(nf);
  out.constrained_rhs.resize(nc);
  for (int k = 0; k < nf; ++k) lift[static_cast<std::size_t>(k)] = system.rhs(out.free[static_cast<std::size_t>(k)]);
  for (int k = 0; k < nc; ++k) out.constrained_rhs(k) = system.rhs(out.constrained[static_cast<std::size_t>(k)]);

  for (int col = 0; col < n; ++col) {
    const int sc = slot[static_cast<std::size_t>(col)];
    for (SparseMatrix::InnerIterator it(system.matrix, col); it; ++it) {
      const int sr = slot[static_cast<std::size_t>(it.row())];
      if (sr >= 0 && sc >= 0) {
        ff.emplace_back(sr, sc, it.value());
      } else if (sr >= 0) {
        lift[static_cast<std::size_t>(sr)] -=
            static_cast<long double>(it.value()) * static_cast<long double>(out.prescribed(-sc - 1));
      } else if (sc >= 0) {
        cf.emplace_back(-sr - 1, sc, it.value());
      } else {
        cc.emplace_back(-sr - 1, -sc - 1, it.value());
      }
    }
  }
  for (int k = 0; k < nf; ++k) out.rhs(k) = static_cast<double>(lift[static_cast<std::size_t>(k)]);
  out.matrix.resize(nf, nf);
  out.matrix.setFromTriplets(ff.begin(), ff.end());
  out.coupling.resize(nc, nf);
  out.coupling.setFromTriplets(cf.begin(), cf.end());
  out.constrained_block.resize(nc, nc);
  out.constrained_block.setFromTriplets(cc.begin(), cc.end());
  return out;
}

Eigen::VectorXd solve_spd(const ReducedSystem& reduced) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(reduced.total_dofs);
  for (std::size_t k = 0; k < reduced.constrained.size(); ++k) {
    full(reduced.constrained[k]) = reduced.prescribed(static_cast<Eigen::Index>(k));
  }
  const auto n = reduced.matrix.rows();
  if (n == 0) return full;
  if (reduced.matrix.cols() != n || reduced.rhs.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "reduced system is not square");
  }

  SparseMatrix a = reduced.matrix;
  a.makeCompressed();
  cholmod_sparse view = view_upper(a);
  CholmodSession session;
  auto* common = session.common();
  // Supernodal LL' for every size: the simplicial default is LDL', which
  // does not stop at negative pivots.
  common->supernodal = CHOLMOD_SUPERNODAL;
  session.factor() = cholmod_analyze(&view, common);
  if (session.factor() == nullptr) throw SolverError("symbolic analysis failed", -1);
  cholmod_factorize(&view, session.factor(), common);
  if (common->status == CHOLMOD_NOT_POSDEF || session.factor()->minor < static_cast<std::size_t>(n)) {
    const auto pivot = static_cast<long>(session.factor()->minor);
    throw SolverError("matrix is not positive definite at column " + std::to_string(pivot), pivot);
  }
  if (common->status < CHOLMOD_OK) throw SolverError("factorization failed", -1);

  Eigen::VectorXd rhs = reduced.rhs;
  cholmod_dense b{};
  b.nrow = static_cast<std::size_t>(n);
  b.ncol = 1;
  b.nzmax = static_cast<std::size_t>(n);
  b.d = static_cast<std::size_t>(n);
  b.x = rhs.data();
  b.xtype = CHOLMOD_REAL;
  b.dtype = CHOLMOD_DOUBLE;
  cholmod_dense* x = cholmod_solve(CHOLMOD_A, session.factor(), &b, common);
  if (x == nullptr) throw SolverError("triangular solve failed", -1);
  Eigen::VectorXd xf = Eigen::Map<const Eigen::VectorXd>(static_cast<const double*>(x->x), n);
  cholmod_free_dense(&x, common);

  // Refinement with residuals accumulated in extended precision: the shear
  // block is O(t^-2) larger than the bending block, and the refinement
  // recovers most of the digits lost in the factorization.
  for (int step = 0; step < kRefinementSteps; ++step) {
    rhs = extended_residual(reduced.matrix, xf, reduced.rhs);
    b.x = rhs.data();
    x = cholmod_solve(CHOLMOD_A, session.factor(), &b, common);
    if (x == nullptr) throw SolverError("triangular solve failed", -1);
    xf += Eigen::Map<const Eigen::VectorXd>(static_cast<const double*>(x->x), n);
    cholmod_free_dense(&x, common);
  }

  const double residual = (reduced.matrix * xf - reduced.rhs).norm();
  const double bound = 1e-10 * (reduced.matrix.norm() * xf.norm() + reduced.rhs.norm());
  if (!(residual <= bound)) {
    throw SolverError("residual " + std::to_string(residual) + " exceeds " + std::to_string(bound), -1);
  }
  for (Eigen::Index k = 0; k < n; ++k) full(reduced.free[static_cast<std::size_t>(k)]) = xf(k);
  return full;
}

Eigen::VectorXd reactions(const ReducedSystem& reduced, const Eigen::VectorXd& full) {
  if (full.size() != reduced.total_dofs) throw Error(ErrorKind::InvalidArgument, "solution size mismatch");
  Eigen::VectorXd xf(static_cast<Eigen::Index>(reduced.free.size()));
  for (std::size_t k = 0; k < reduced.free.size(); ++k) xf(static_cast<Eigen::Index>(k)) = full(reduced.free[k]);
  return reduced.coupling * xf + reduced.constrained_block * reduced.prescribed - reduced.constrained_rhs;
}

}  // namespace vanp
