#include "vanp/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "vanp/error.hpp"

namespace vanp {

namespace {

template <int D>
using Vec = Eigen::Matrix<double, D, 1>;
template <int D>
using Mat = Eigen::Matrix<double, D, D>;

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

std::vector<int> convex_hull(std::span<const Point> pts, double tol) {
  std::vector<int> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& pa = pts[static_cast<std::size_t>(a)];
    const auto& pb = pts[static_cast<std::size_t>(b)];
    return pa.x() < pb.x() || (pa.x() == pb.x() && pa.y() < pb.y());
  });
  std::vector<int> hull(2 * order.size());
  std::size_t k = 0;
  const auto p = [&](int i) -> const Point& { return pts[static_cast<std::size_t>(i)]; };
  // Collinear points (within tol * edge length) are dropped.
  const auto keep_turn = [&](int o, int a, int b) {
    return cross(p(o), p(a), p(b)) > tol * (p(b) - p(o)).norm();
  };
  for (int i : order) {
    while (k >= 2 && !keep_turn(hull[k - 2], hull[k - 1], i)) --k;
    hull[k++] = i;
  }
  for (std::size_t t = order.size() - 1, lower = k + 1; t-- > 0;) {
    const int i = order[t];
    while (k >= lower && !keep_turn(hull[k - 2], hull[k - 1], i)) --k;
    hull[k++] = i;
  }
  hull.resize(k - 1);
  return hull;
}

template <int D>
struct DualResult {
  std::vector<double> phi;
  Vec<D> lambda = Vec<D>::Zero();
  Mat<D> hessian = Mat<D>::Zero();
  int iterations = 0;
};

// Minimizes ln Z over lambda for shifted, scaled coordinates c and scaled
// prior exponents beta. Returns phi at the optimum.
template <int D>
DualResult<D> solve_dual(const std::vector<Vec<D>>& c, const std::vector<double>& beta, const MaxentConfig& config) {
  const std::size_t m = c.size();
  DualResult<D> out;
  out.phi.resize(m);
  std::vector<double> expo(m);

  const auto evaluate = [&](const Vec<D>& lambda, std::vector<double>& phi, Vec<D>& g) {
    double emax = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < m; ++a) {
      expo[a] = -beta[a] * c[a].squaredNorm() - lambda.dot(c[a]);
      emax = std::max(emax, expo[a]);
    }
    double z = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      phi[a] = std::exp(expo[a] - emax);
      z += phi[a];
    }
    g.setZero();
    for (std::size_t a = 0; a < m; ++a) {
      phi[a] /= z;
      g += phi[a] * c[a];
    }
  };

  Vec<D> lambda = Vec<D>::Zero();
  Vec<D> g;
  evaluate(lambda, out.phi, g);
  double residual = g.norm();
  std::vector<double> trial_phi(m);
  int iter = 0;
  while (residual > config.newton_tol) {
    if (iter >= config.newton_max_iter) {
      throw NoConvergenceError("maxent Newton did not converge in " + std::to_string(iter) +
                                   " iterations (residual " + std::to_string(residual) + ")",
                               residual);
    }
    Mat<D> hess = Mat<D>::Zero();
    for (std::size_t a = 0; a < m; ++a) hess += out.phi[a] * c[a] * c[a].transpose();
    hess -= g * g.transpose();
    const double scale = hess.trace();
    if (!(hess.determinant() > 1e-14 * std::pow(scale, D))) {
      throw Error(ErrorKind::DegenerateGeometry, "singular maxent Hessian (collinear contributors)");
    }
    const Vec<D> step = hess.ldlt().solve(g);
    double alpha = 1.0;
    Vec<D> trial_g;
    bool accepted = false;
    for (int halving = 0; halving <= 20; ++halving) {
      const Vec<D> trial = lambda + alpha * step;
      evaluate(trial, trial_phi, trial_g);
      if (trial_g.norm() < residual) {
        lambda = trial;
        out.phi.swap(trial_phi);
        g = trial_g;
        residual = g.norm();
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++iter;
    if (!accepted) {
      throw NoConvergenceError("maxent line search stalled at residual " + std::to_string(residual), residual);
    }
  }
  Mat<D> hess = Mat<D>::Zero();
  for (std::size_t a = 0; a < m; ++a) hess += out.phi[a] * c[a] * c[a].transpose();
  hess -= g * g.transpose();
  // One undamped polishing step: convergence is quadratic here, so this takes
  // the reproducing conditions to roundoff, which the thin-plate shear terms
  // (scaled by t^-2) are sensitive to.
  if (residual > 0.0) {
    const Vec<D> trial = lambda + hess.ldlt().solve(g);
    Vec<D> trial_g;
    evaluate(trial, trial_phi, trial_g);
    if (trial_g.norm() < residual) {
      lambda = trial;
      out.phi.swap(trial_phi);
      g = trial_g;
      hess.setZero();
      for (std::size_t a = 0; a < m; ++a) hess += out.phi[a] * c[a] * c[a].transpose();
      hess -= g * g.transpose();
    }
  }
  out.lambda = lambda;
  out.hessian = hess;
  out.iterations = iter;
  return out;
}

// Gradient of phi_a for priors with node-dependent beta_a (scaled units):
//   grad phi_a = phi_a (J^-1 c_a + 2 beta_a c_a - 2 m - 2 M J^-1 c_a) / ell
// with m = sum beta_b phi_b c_b and M = sum beta_b phi_b c_b c_b^T. For a
// uniform beta this reduces to phi_a J^-1 c_a.
template <int D>
std::vector<Vec<D>> dual_gradients(const std::vector<Vec<D>>& c, const std::vector<double>& beta,
                                   const DualResult<D>& dual, double ell) {
  const std::size_t m = c.size();
  Vec<D> mvec = Vec<D>::Zero();
  Mat<D> mmat = Mat<D>::Zero();
  for (std::size_t a = 0; a < m; ++a) {
    mvec += beta[a] * dual.phi[a] * c[a];
    mmat += beta[a] * dual.phi[a] * c[a] * c[a].transpose();
  }
  const Mat<D> jinv = dual.hessian.inverse();
  const Mat<D> left = Mat<D>::Identity() - 2.0 * mmat;
  std::vector<Vec<D>> grad(m);
  for (std::size_t a = 0; a < m; ++a) {
    const Vec<D> jc = jinv * c[a];
    grad[a] = dual.phi[a] / ell * (left * jc + 2.0 * beta[a] * c[a] - 2.0 * mvec);
  }
  return grad;
}

bool affinely_spanning(std::span<const int> ids, const NodeSet& nodes) {
  if (ids.size() < 3) return false;
  Point mean = Point::Zero();
  for (int id : ids) mean += nodes.point(id);
  mean /= static_cast<double>(ids.size());
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (int id : ids) {
    const Point d = nodes.point(id) - mean;
    scatter += d * d.transpose();
  }
  const double tr = scatter.trace();
  return tr > 0.0 && scatter.determinant() > 1e-12 * tr * tr;
}

}  // namespace

void MaxentConfig::validate() const {
  if (!(gamma > 0.0)) throw Error(ErrorKind::InvalidArgument, "gamma must be positive");
  if (!(newton_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "newton_tol must be positive");
  if (newton_max_iter < 1) throw Error(ErrorKind::InvalidArgument, "newton_max_iter must be >= 1");
  if (!(prior_cutoff > 0.0 && prior_cutoff < 1.0)) throw Error(ErrorKind::InvalidArgument, "prior_cutoff must lie in (0,1)");
}

double MaxentConfig::support_factor() const { return std::sqrt(-std::log(prior_cutoff) / gamma); }

NodalSpacing compute_nodal_spacing(const TriangulationMesh& mesh, NodeSetKind kind) {
  if (kind == NodeSetKind::Enhanced && !mesh.is_enhanced()) {
    throw Error(ErrorKind::InvalidMesh, "enhanced spacing requires barycenter nodes");
  }
  const int count = kind == NodeSetKind::Standard ? mesh.num_standard() : mesh.num_nodes();
  NodalSpacing spacing;
  spacing.h_a.assign(static_cast<std::size_t>(count), 0.0);
  std::vector<int> neighbours;
  for (int a = 0; a < count; ++a) {
    neighbours.clear();
    const Point& xa = mesh.node(a).x;
    if (mesh.node(a).kind == NodeKind::Barycenter) {
      const auto& cell = mesh.cell(a - mesh.num_standard());
      neighbours.assign(cell.vertices.begin(), cell.vertices.end());
    } else {
      for (int c : mesh.incident_cells(a)) {
        for (int v : mesh.cell(c).vertices) {
          if (v != a) neighbours.push_back(v);
        }
        if (kind == NodeSetKind::Enhanced) neighbours.push_back(mesh.cell(c).barycenter);
      }
      std::sort(neighbours.begin(), neighbours.end());
      neighbours.erase(std::unique(neighbours.begin(), neighbours.end()), neighbours.end());
    }
    if (neighbours.empty()) throw Error(ErrorKind::InvalidMesh, "isolated node " + std::to_string(a));
    double sum = 0.0;
    for (int b : neighbours) sum += (mesh.node(b).x - xa).norm();
    spacing.h_a[static_cast<std::size_t>(a)] = sum / static_cast<double>(neighbours.size());
  }
  return spacing;
}

NodeSet::NodeSet(std::vector<Point> points, NodalSpacing spacing) : points_(std::move(points)), spacing_(std::move(spacing)) {
  if (points_.size() < 3) throw Error(ErrorKind::InvalidArgument, "node set needs at least 3 nodes");
  if (spacing_.h_a.size() != points_.size()) throw Error(ErrorKind::InvalidArgument, "spacing size mismatch");
  for (double h : spacing_.h_a) {
    if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "nodal spacing must be positive");
    max_spacing_ = std::max(max_spacing_, h);
  }
  Point lo = points_.front(), hi = points_.front();
  for (const auto& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double diameter = (hi - lo).norm();
  hull_tol_ = 1e-10 * diameter;
  hull_ = convex_hull(points_, hull_tol_);
  if (hull_.size() < 3) throw Error(ErrorKind::DegenerateGeometry, "node set is collinear");

  origin_ = lo;
  bucket_ = max_spacing_;
  nx_ = std::max(1, static_cast<int>(std::ceil((hi.x() - lo.x()) / bucket_)) + 1);
  ny_ = std::max(1, static_cast<int>(std::ceil((hi.y() - lo.y()) / bucket_)) + 1);
  const auto bucket_of = [&](const Point& p) {
    const int i = std::clamp(static_cast<int>((p.x() - origin_.x()) / bucket_), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>((p.y() - origin_.y()) / bucket_), 0, ny_ - 1);
    return j * nx_ + i;
  };
  bucket_offsets_.assign(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
  for (const auto& p : points_) ++bucket_offsets_[static_cast<std::size_t>(bucket_of(p)) + 1];
  for (std::size_t b = 1; b < bucket_offsets_.size(); ++b) bucket_offsets_[b] += bucket_offsets_[b - 1];
  bucket_nodes_.resize(points_.size());
  std::vector<int> fill(bucket_offsets_.begin(), bucket_offsets_.end() - 1);
  for (int id = 0; id < size(); ++id) {
    bucket_nodes_[static_cast<std::size_t>(fill[static_cast<std::size_t>(bucket_of(point(id)))]++)] = id;
  }
}

std::vector<int> NodeSet::within(const Point& x, double factor) const {
  const double reach = factor * max_spacing_;
  const int span = static_cast<int>(std::ceil(reach / bucket_));
  const int ci = static_cast<int>(std::floor((x.x() - origin_.x()) / bucket_));
  const int cj = static_cast<int>(std::floor((x.y() - origin_.y()) / bucket_));
  std::vector<int> ids;
  for (int j = std::max(0, cj - span); j <= std::min(ny_ - 1, cj + span); ++j) {
    for (int i = std::max(0, ci - span); i <= std::min(nx_ - 1, ci + span); ++i) {
      const auto b = static_cast<std::size_t>(j * nx_ + i);
      for (int k = bucket_offsets_[b]; k < bucket_offsets_[b + 1]; ++k) {
        const int id = bucket_nodes_[static_cast<std::size_t>(k)];
        const double r = factor * spacing(id);
        if ((point(id) - x).squaredNorm() <= r * r) ids.push_back(id);
      }
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

NodeSet make_node_set(const TriangulationMesh& mesh, NodeSetKind kind) {
  auto spacing = compute_nodal_spacing(mesh, kind);
  const int count = kind == NodeSetKind::Standard ? mesh.num_standard() : mesh.num_nodes();
  std::vector<Point> points;
  points.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) points.push_back(mesh.node(i).x);
  return NodeSet(std::move(points), std::move(spacing));
}

std::vector<int> contributing_nodes(const Point& x, const NodeSet& nodes, const MaxentConfig& config) {
  config.validate();
  auto ids = nodes.within(x, config.support_factor());
  if (!affinely_spanning(ids, nodes)) {
    throw Error(ErrorKind::SupportDeficiency, "fewer than 3 non-collinear contributing nodes at (" +
                                                  std::to_string(x.x()) + ", " + std::to_string(x.y()) +
                                                  "); lower prior_cutoff/gamma or refine the mesh");
  }
  return ids;
}

BasisEval evaluate_basis(const Point& x, const NodeSet& nodes, const MaxentConfig& config) {
  config.validate();
  BasisEval out;
  out.point = x;

  // Locate x relative to the hull: interior, on one face, or at a vertex.
  const auto hull = nodes.hull();
  const double tol = nodes.hull_tolerance();
  int face = -1;
  int faces_hit = 0;
  for (std::size_t k = 0; k < hull.size(); ++k) {
    const Point& p = nodes.point(hull[k]);
    const Point& q = nodes.point(hull[(k + 1) % hull.size()]);
    const Point edge = q - p;
    const Point outward = Point(edge.y(), -edge.x()) / edge.norm();
    const double dist = (x - p).dot(outward);
    if (dist > tol) {
      throw Error(ErrorKind::OutOfDomain, "point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) +
                                              ") lies outside the convex hull");
    }
    if (dist >= -tol) {
      if (face < 0) face = static_cast<int>(k);
      ++faces_hit;
    }
  }

  if (faces_hit >= 2) {
    int vertex = hull.front();
    for (int v : hull) {
      if ((nodes.point(v) - x).norm() < (nodes.point(vertex) - x).norm()) vertex = v;
    }
    out.contributors = {vertex};
    out.phi = {1.0};
    out.grad_phi = {Point::Zero()};
    out.on_boundary = true;
    return out;
  }

  const double factor = config.support_factor();
  if (faces_hit == 1) {
    const Point& p = nodes.point(hull[static_cast<std::size_t>(face)]);
    const Point& q = nodes.point(hull[(static_cast<std::size_t>(face) + 1) % hull.size()]);
    const double length = (q - p).norm();
    const Point tangent = (q - p) / length;
    const Point normal(-tangent.y(), tangent.x());
    std::vector<int> ids;
    for (int id : nodes.within(x, factor)) {
      const Point d = nodes.point(id) - p;
      const double along = d.dot(tangent);
      if (std::abs(d.dot(normal)) <= tol && along >= -tol && along <= length + tol) ids.push_back(id);
    }
    double ell = 0.0;
    for (int id : ids) ell += nodes.spacing(id);
    ell /= static_cast<double>(std::max<std::size_t>(ids.size(), 1));
    // The face is one-dimensional; x must be bracketed by face nodes.
    bool left = false, right = false;
    for (int id : ids) {
      const double s = (nodes.point(id) - x).dot(tangent);
      if (std::abs(s) <= tol) {
        out.contributors = {id};
        out.phi = {1.0};
        out.grad_phi = {Point::Zero()};
        out.on_boundary = true;
        return out;
      }
      left = left || s < 0.0;
      right = right || s > 0.0;
    }
    if (!left || !right) throw Error(ErrorKind::SupportDeficiency, "boundary point not bracketed by face nodes");
    std::vector<Vec<1>> c(ids.size());
    std::vector<double> beta(ids.size());
    for (std::size_t a = 0; a < ids.size(); ++a) {
      c[a](0) = (nodes.point(ids[a]) - x).dot(tangent) / ell;
      const double ratio = ell / nodes.spacing(ids[a]);
      beta[a] = config.gamma * ratio * ratio;
    }
    const auto dual = solve_dual<1>(c, beta, config);
    const auto grad = dual_gradients<1>(c, beta, dual, ell);
    out.contributors = std::move(ids);
    out.phi = dual.phi;
    out.grad_phi.resize(out.contributors.size());
    for (std::size_t a = 0; a < grad.size(); ++a) out.grad_phi[a] = grad[a](0) * tangent;
    out.lambda = dual.lambda(0) / ell * tangent;
    out.iterations = dual.iterations;
    out.on_boundary = true;
    return out;
  }

  auto ids = contributing_nodes(x, nodes, config);
  double ell = 0.0;
  for (int id : ids) ell += nodes.spacing(id);
  ell /= static_cast<double>(ids.size());
  std::vector<Vec<2>> c(ids.size());
  std::vector<double> beta(ids.size());
  for (std::size_t a = 0; a < ids.size(); ++a) {
    c[a] = (nodes.point(ids[a]) - x) / ell;
    const double ratio = ell / nodes.spacing(ids[a]);
    beta[a] = config.gamma * ratio * ratio;
  }
  const auto dual = solve_dual<2>(c, beta, config);
  const auto grad = dual_gradients<2>(c, beta, dual, ell);
  out.contributors = std::move(ids);
  out.phi = dual.phi;
  out.grad_phi.assign(grad.begin(), grad.end());
  out.lambda = dual.lambda / ell;
  out.iterations = dual.iterations;
  return out;
}

}  // namespace vanp
