#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "vanp/analysis.hpp"
#include "vanp/error.hpp"
#include "vanp/solve.hpp"

using namespace vanp;

namespace {

// Nodal coefficients set to the exact fields at the nodes.
PlateSolution inject_exact(const Discretization& disc, const BenchmarkProblem& p, double scale = 1.0) {
  const auto& dofs = disc.dofs();
  Eigen::VectorXd u(dofs.size());
  for (int a = 0; a < dofs.num_standard; ++a) u(dofs.w_dof(a)) = scale * p.exact(disc.mesh().node(a).x).w;
  for (int a = 0; a < dofs.num_enhanced; ++a) {
    const auto r = p.exact(disc.mesh().node(a).x).r;
    u(dofs.r_dof(a, 0)) = scale * r.x();
    u(dofs.r_dof(a, 1)) = scale * r.y();
  }
  return split_solution(dofs, u);
}

}  // namespace

TEST(FitRate, Examples) {
  const std::vector<double> h{1.0, 0.5, 0.25}, e{1.0, 0.25, 0.0625};
  EXPECT_NEAR(fit_rate(h, e), 2.0, 1e-12);
  const std::vector<double> h2{1.0, 0.5}, e2{1.0, 0.5};
  EXPECT_NEAR(fit_rate(h2, e2), 1.0, 1e-12);
}

TEST(FitRate, MatchesNormalEquations) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::vector<double> h, e;
  double hk = 1.0, ek = 1.0;
  for (int k = 0; k < 6; ++k) {
    h.push_back(hk);
    e.push_back(ek);
    hk *= 0.5 * u(rng);
    ek *= 0.3 * u(rng);
  }
  Eigen::MatrixXd a(6, 2);
  Eigen::VectorXd y(6);
  for (int k = 0; k < 6; ++k) {
    a(k, 0) = 1.0;
    a(k, 1) = std::log(h[static_cast<std::size_t>(k)]);
    y(k) = std::log(e[static_cast<std::size_t>(k)]);
  }
  const Eigen::Vector2d beta = (a.transpose() * a).ldlt().solve(a.transpose() * y);
  EXPECT_NEAR(fit_rate(h, e), beta(1), 1e-10);
}

TEST(FitRate, InvalidInputs) {
  const std::vector<double> one{1.0};
  EXPECT_THROW((void)fit_rate(one, one), Error);
  const std::vector<double> h{1.0, 0.5}, bad{1.0, 0.0};
  try {
    (void)fit_rate(h, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
  const std::vector<double> same{0.5, 0.5};
  EXPECT_THROW((void)fit_rate(same, h), Error);
}

TEST(ConvergenceTable, SortsAndFits) {
  std::vector<ErrorReport> rows;
  for (double h : {0.25, 1.0, 0.5}) {
    ErrorReport r;
    r.h = h;
    r.rel_L2 = h * h;
    r.rel_H1 = h;
    r.rel_s_nodal = 2.0 * h * h;
    rows.push_back(r);
  }
  const auto table = make_convergence_table(rows);
  ASSERT_EQ(table.rows.size(), 3u);
  EXPECT_EQ(table.rows.front().h, 1.0);
  EXPECT_NEAR(*table.rate_L2, 2.0, 1e-12);
  EXPECT_NEAR(*table.rate_H1, 1.0, 1e-12);
  EXPECT_NEAR(*table.rate_s, 2.0, 1e-12);
  ASSERT_EQ(table.pairwise.size(), 2u);
  EXPECT_NEAR(table.pairwise[1][0], 2.0, 1e-12);

  rows[0].rel_s_nodal.reset();
  EXPECT_FALSE(make_convergence_table(rows).rate_s.has_value());
  EXPECT_FALSE(make_convergence_table({rows[0]}).rate_L2.has_value());
}

TEST(ErrorNorms, ExactCoefficientsOnPatch) {
  const auto p = make_problem(ProblemKind::Patch, 0.01);
  const Discretization disc(generate_square_mesh(4, MeshPattern::PerturbedUnstructured, 1), MaxentConfig{});
  const auto tables = build_projection_tables(disc);
  const auto err = compute_error_norms(disc, tables, inject_exact(disc, p), p);
  EXPECT_LE(err.rel_L2, 1e-12);
  EXPECT_LE(err.rel_H1, 1e-12);
  EXPECT_FALSE(err.rel_s_nodal.has_value());
  EXPECT_EQ(err.dofs, disc.dofs().size());
  EXPECT_DOUBLE_EQ(err.h, disc.mesh().h());
}

TEST(ErrorNorms, InterpolantConvergesOnCircle) {
  const auto p = make_problem(ProblemKind::Circle, 0.1);
  std::vector<double> l2;
  for (int level : {1, 2, 3}) {
    const Discretization disc(generate_disk_mesh(level), MaxentConfig{});
    const auto tables = build_projection_tables(disc);
    l2.push_back(compute_error_norms(disc, tables, inject_exact(disc, p), p).rel_L2);
  }
  EXPECT_LT(l2[1], l2[0]);
  EXPECT_LT(l2[2], l2[1]);
}

TEST(ErrorNorms, QuotientsInvariantUnderCommonScaling) {
  const auto p = make_problem(ProblemKind::Square, 0.1);
  auto scaled = p;
  scaled.exact = [base = p.exact](const Point& x) {
    auto f = base(x);
    f.w *= 7.0;
    f.r *= 7.0;
    f.grad_w *= 7.0;
    f.grad_r *= 7.0;
    return f;
  };
  const Discretization disc(generate_square_mesh(4, MeshPattern::Structured), MaxentConfig{});
  const auto tables = build_projection_tables(disc);
  // any discrete field works; use a perturbed interpolant
  auto sol = inject_exact(disc, p);
  sol.dofs *= 1.1;
  sol = split_solution(disc.dofs(), sol.dofs);
  auto sol7 = split_solution(disc.dofs(), 7.0 * sol.dofs);
  const auto a = compute_error_norms(disc, tables, sol, p);
  const auto b = compute_error_norms(disc, tables, sol7, scaled);
  EXPECT_NEAR(a.rel_L2, b.rel_L2, 1e-12);
  EXPECT_NEAR(a.rel_H1, b.rel_H1, 1e-12);
  EXPECT_NEAR(*a.rel_s_nodal, *b.rel_s_nodal, 1e-12);
}

TEST(ErrorNorms, RejectsProblemsWithoutExactSolution) {
  const auto p = make_problem(ProblemKind::Parallelogram, 0.01);
  const Discretization disc(generate_parallelogram_mesh(200, 100, 45, 2), MaxentConfig{});
  const auto tables = build_projection_tables(disc);
  const auto sol = split_solution(disc.dofs(), Eigen::VectorXd::Zero(disc.dofs().size()));
  try {
    (void)compute_error_norms(disc, tables, sol, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedProblem);
  }
}

TEST(SampleField, PatchSolution) {
  const auto p = make_problem(ProblemKind::Patch, 0.1);
  const Discretization disc(generate_square_mesh(4, MeshPattern::Structured), MaxentConfig{});
  const auto tables = build_projection_tables(disc);
  const auto sol = split_solution(
      disc.dofs(), solve_spd(apply_dirichlet(assemble_system(disc, tables, p), prescribe_boundary(disc.mesh(), disc.dofs(), p))));
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts{Point(0, 0), Point(1, 0.5)};
  for (int k = 0; k < 10; ++k) pts.emplace_back(u(rng), u(rng));
  const auto samples = sample_field(disc, tables, sol, p.material, pts);
  for (const auto& s : samples) {
    EXPECT_NEAR(s.w, 1.0 + s.x.x() + s.x.y(), 1e-9);
    EXPECT_NEAR(s.r.x(), 1.0, 1e-9);
    EXPECT_NEAR(s.r.y(), 1.0, 1e-9);
  }
  const std::vector<Point> outside{Point(1.2, 0.5)};
  try {
    (void)sample_field(disc, tables, sol, p.material, outside);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfDomain);
  }
}

TEST(SampleField, InterpolatesOnlyAtHullVertices) {
  const auto p = make_problem(ProblemKind::Square, 0.1);
  const Discretization disc(generate_square_mesh(4, MeshPattern::Structured), MaxentConfig{});
  const auto tables = build_projection_tables(disc);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(disc.dofs().size());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = d(rng);
  const auto sol = split_solution(disc.dofs(), u);
  const int corner = 0;  // (0, 0)
  const int interior = 12;  // (0.5, 0.5) in the 5 x 5 grid
  ASSERT_TRUE(disc.mesh().node(interior).x.isApprox(Point(0.5, 0.5)));
  const std::vector<Point> pts{disc.mesh().node(corner).x, disc.mesh().node(interior).x};
  const auto s = sample_field(disc, tables, sol, p.material, pts);
  EXPECT_NEAR(s[0].w, u(corner), 1e-12);
  EXPECT_GT(std::abs(s[1].w - u(interior)), 1e-6);
}
