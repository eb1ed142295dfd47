#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "vanp/error.hpp"
#include "vanp/maxent.hpp"
#include "vanp/mesh.hpp"

using namespace vanp;

namespace {

std::map<int, double> as_map(const BasisEval& e) {
  std::map<int, double> m;
  for (std::size_t a = 0; a < e.contributors.size(); ++a) m[e.contributors[a]] = e.phi[a];
  return m;
}

struct Case {
  const char* name;
  TriangulationMesh mesh;
};

std::vector<Case> property_meshes() {
  std::vector<Case> out;
  out.push_back({"square4", enhance_with_barycenters(generate_square_mesh(4, MeshPattern::Structured))});
  out.push_back({"square6u", enhance_with_barycenters(generate_square_mesh(6, MeshPattern::PerturbedUnstructured, 5))});
  out.push_back({"disk2", enhance_with_barycenters(generate_disk_mesh(2))});
  return out;
}

// Random points well inside each mesh (centroid-weighted draws in random cells).
std::vector<Point> random_interior_points(const TriangulationMesh& mesh, int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pick(0, mesh.num_cells() - 1);
  std::uniform_real_distribution<double> u(0.1, 0.8);
  std::vector<Point> out;
  while (static_cast<int>(out.size()) < count) {
    const auto pts = mesh.cell_points(pick(rng));
    double l1 = u(rng), l2 = u(rng);
    if (l1 + l2 > 0.9) continue;
    out.push_back(pts[0] + l1 * (pts[1] - pts[0]) + l2 * (pts[2] - pts[0]));
  }
  return out;
}

}  // namespace

TEST(Spacing, SquareCornerOnDiagonal) {
  const auto mesh = generate_square_mesh(1, MeshPattern::Structured);
  const auto spacing = compute_nodal_spacing(mesh, NodeSetKind::Standard);
  for (int i = 0; i < 4; ++i) {
    const Point& x = mesh.node(i).x;
    if (std::abs(x.x() - x.y()) < 1e-12) {
      EXPECT_NEAR(spacing.h_a[static_cast<std::size_t>(i)], (2.0 + std::sqrt(2.0)) / 3.0, 1e-14);
    }
  }
}

TEST(Spacing, EquilateralBarycenter) {
  const double s = 2.0;
  const TriangulationMesh mesh = enhance_with_barycenters(
      TriangulationMesh({Point(0, 0), Point(s, 0), Point(s / 2, s * std::sqrt(3.0) / 2)}, {{0, 1, 2}}));
  const auto spacing = compute_nodal_spacing(mesh, NodeSetKind::Enhanced);
  EXPECT_NEAR(spacing.h_a[3], s / std::sqrt(3.0), 1e-14);
}

TEST(Spacing, HalvesUnderRefinement) {
  const auto coarse = generate_square_mesh(4, MeshPattern::Structured);
  const auto fine = generate_square_mesh(8, MeshPattern::Structured);
  const auto hc = compute_nodal_spacing(coarse, NodeSetKind::Standard);
  const auto hf = compute_nodal_spacing(fine, NodeSetKind::Standard);
  for (int i = 0; i < coarse.num_standard(); ++i) {
    if (coarse.is_boundary(i)) continue;
    const Point& x = coarse.node(i).x;
    for (int j = 0; j < fine.num_standard(); ++j) {
      if ((fine.node(j).x - x).norm() < 1e-12) {
        EXPECT_NEAR(hf.h_a[static_cast<std::size_t>(j)], 0.5 * hc.h_a[static_cast<std::size_t>(i)], 1e-12);
      }
    }
  }
}

TEST(Support, NodeContributesAtItself) {
  const auto mesh = enhance_with_barycenters(generate_square_mesh(3, MeshPattern::Structured));
  const auto nodes = make_node_set(mesh, NodeSetKind::Enhanced);
  for (int a = 0; a < nodes.size(); ++a) {
    const auto list = contributing_nodes(nodes.point(a), nodes, MaxentConfig{});
    EXPECT_TRUE(std::binary_search(list.begin(), list.end(), a));
  }
}

TEST(Support, CutoffRadius) {
  MaxentConfig config;
  config.gamma = 2.0;
  config.prior_cutoff = 1e-8;
  EXPECT_NEAR(config.support_factor(), std::sqrt(std::log(1e8) / 2.0), 1e-14);
  EXPECT_NEAR(config.support_factor(), 3.035, 1e-3);
}

TEST(Support, LargerGammaShrinksSupport) {
  const auto mesh = enhance_with_barycenters(generate_square_mesh(5, MeshPattern::PerturbedUnstructured, 2));
  const auto nodes = make_node_set(mesh, NodeSetKind::Standard);
  MaxentConfig wide, narrow;
  wide.gamma = 1.5;
  narrow.gamma = 3.0;
  for (const Point& x : {Point(0.5, 0.5), Point(0.13, 0.71), Point(0.9, 0.2)}) {
    const auto big = contributing_nodes(x, nodes, wide);
    const auto small = contributing_nodes(x, nodes, narrow);
    EXPECT_TRUE(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    EXPECT_LT(small.size(), big.size());
  }
}

TEST(Basis, HullVertexIsIndicator) {
  const auto mesh = enhance_with_barycenters(generate_square_mesh(4, MeshPattern::Structured));
  for (auto kind : {NodeSetKind::Standard, NodeSetKind::Enhanced}) {
    const auto nodes = make_node_set(mesh, kind);
    for (int v : nodes.hull()) {
      const auto e = evaluate_basis(nodes.point(v), nodes, MaxentConfig{});
      for (const auto& [id, phi] : as_map(e)) EXPECT_NEAR(phi, id == v ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(Basis, HullEdgeUsesOnlyFaceNodes) {
  const auto mesh = enhance_with_barycenters(generate_square_mesh(4, MeshPattern::Structured));
  const auto nodes = make_node_set(mesh, NodeSetKind::Enhanced);
  const auto e = evaluate_basis(Point(0.3, 0.0), nodes, MaxentConfig{});
  EXPECT_TRUE(e.on_boundary);
  double sum = 0.0, first = 0.0;
  for (std::size_t a = 0; a < e.contributors.size(); ++a) {
    if (e.phi[a] == 0.0) continue;
    EXPECT_NEAR(nodes.point(e.contributors[a]).y(), 0.0, 1e-14);
    sum += e.phi[a];
    first += e.phi[a] * nodes.point(e.contributors[a]).x();
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NEAR(first, 0.3, 1e-10);
}

TEST(Basis, OutsideHullIsRejected) {
  const auto mesh = enhance_with_barycenters(generate_square_mesh(2, MeshPattern::Structured));
  const auto nodes = make_node_set(mesh, NodeSetKind::Standard);
  try {
    (void)evaluate_basis(Point(1.5, 0.5), nodes, MaxentConfig{});
    FAIL() << "expected out-of-domain";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfDomain);
  }
}

TEST(Basis, RejectsInvalidConfig) {
  MaxentConfig config;
  config.gamma = -1.0;
  EXPECT_THROW(config.validate(), Error);
}

// Partition of unity, linear reproduction and gradients against central
// differences at 20 random points per mesh, for both node sets and the
// three support parameters used in the benchmarks.
TEST(BasisProperties, ConsistencyAndGradients) {
  for (const auto& c : property_meshes()) {
    for (auto kind : {NodeSetKind::Standard, NodeSetKind::Enhanced}) {
      const auto nodes = make_node_set(c.mesh, kind);
      for (double gamma : {1.5, 2.0, 3.0}) {
        MaxentConfig config;
        config.gamma = gamma;
        unsigned seed = 17;
        for (const Point& x : random_interior_points(c.mesh, 20, seed++)) {
          const auto e = evaluate_basis(x, nodes, config);
          double sum = 0.0;
          Point first = Point::Zero();
          Point grad_sum = Point::Zero();
          Eigen::Matrix2d grad_first = Eigen::Matrix2d::Zero();
          for (std::size_t a = 0; a < e.contributors.size(); ++a) {
            EXPECT_GE(e.phi[a], 0.0);
            sum += e.phi[a];
            first += e.phi[a] * nodes.point(e.contributors[a]);
            grad_sum += e.grad_phi[a];
            grad_first += nodes.point(e.contributors[a]) * e.grad_phi[a].transpose();
          }
          EXPECT_NEAR(sum, 1.0, 1e-12) << c.name;
          EXPECT_LT((first - x).norm(), 1e-10) << c.name;
          EXPECT_LT(grad_sum.norm(), 1e-8) << c.name;
          EXPECT_LT((grad_first - Eigen::Matrix2d::Identity()).norm(), 1e-8) << c.name;

          // finite differences over the union of contributors
          const double h = nodes.spacing(e.contributors.front());
          const double step = 1e-6 * h;
          double worst = 0.0;
          for (int j = 0; j < 2; ++j) {
            Point xp = x, xm = x;
            xp(j) += step;
            xm(j) -= step;
            auto fp = as_map(evaluate_basis(xp, nodes, config));
            auto fm = as_map(evaluate_basis(xm, nodes, config));
            for (std::size_t a = 0; a < e.contributors.size(); ++a) {
              const int id = e.contributors[a];
              const double fd = (fp[id] - fm[id]) / (2.0 * step);
              worst = std::max(worst, std::abs(fd - e.grad_phi[a](j)));
            }
          }
          EXPECT_LE(worst, 1e-5) << c.name << " gamma " << gamma << " at " << x.transpose();
        }
      }
    }
  }
}
