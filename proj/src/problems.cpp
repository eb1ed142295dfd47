#include "vanp/problems.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vanp/error.hpp"

namespace vanp {

PlateMaterial make_material(double young, double poisson, double kappa, double thickness) {
  if (!(young > 0.0)) throw Error(ErrorKind::InvalidArgument, "Young's modulus must be positive");
  if (!(poisson >= 0.0 && poisson < 0.5)) throw Error(ErrorKind::InvalidArgument, "Poisson's ratio must lie in [0, 0.5)");
  if (!(kappa > 0.0)) throw Error(ErrorKind::InvalidArgument, "shear correction factor must be positive");
  if (!(thickness > 0.0)) throw Error(ErrorKind::InvalidArgument, "thickness must be positive");
  PlateMaterial m;
  m.young = young;
  m.poisson = poisson;
  m.kappa = kappa;
  m.thickness = thickness;
  m.lambda_s = kappa * young / (2.0 * (1.0 + poisson));
  m.bending = young / (12.0 * (1.0 - poisson * poisson));
  m.moduli << 1.0, poisson, 0.0,  //
      poisson, 1.0, 0.0,          //
      0.0, 0.0, 0.5 * (1.0 - poisson);
  m.moduli *= m.bending;
  return m;
}

std::string_view to_string(ProblemKind kind) noexcept {
  switch (kind) {
    case ProblemKind::Patch: return "patch";
    case ProblemKind::Circle: return "circle";
    case ProblemKind::Square: return "square";
    case ProblemKind::Parallelogram: return "parallelogram";
  }
  return "unknown";
}

ProblemKind parse_problem_kind(std::string_view name) {
  for (auto kind : {ProblemKind::Patch, ProblemKind::Circle, ProblemKind::Square, ProblemKind::Parallelogram}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorKind::ConfigError, "unknown problem '" + std::string(name) + "'");
}

double BenchmarkProblem::boundary_w(const Point& x) const { return has_exact() ? exact(x).w : 0.0; }

Eigen::Vector2d BenchmarkProblem::boundary_r(const Point& x) const {
  return has_exact() ? exact(x).r : Eigen::Vector2d::Zero();
}

Eigen::Vector2d BenchmarkProblem::exact_shear(const Point& x) const {
  if (!has_exact()) throw Error(ErrorKind::UnsupportedProblem, "problem has no exact solution");
  const auto f = exact(x);
  return material.shear_factor() * (f.grad_w - f.r);
}

BenchmarkProblem patch_problem(const PlateMaterial& material) {
  BenchmarkProblem p;
  p.kind = ProblemKind::Patch;
  p.material = material;
  p.load = [](const Point&) { return 0.0; };
  p.exact = [](const Point& x) {
    ExactFields f;
    f.w = 1.0 + x.x() + x.y();
    f.r = Eigen::Vector2d(1.0, 1.0);
    f.grad_w = Eigen::Vector2d(1.0, 1.0);
    return f;
  };
  p.probe = Point(0.5, 0.5);
  return p;
}

BenchmarkProblem patch_problem() {
  return patch_problem(make_material(kBenchmarkYoung, kBenchmarkPoisson, kShearCorrection, 0.1));
}

BenchmarkProblem circle_problem(const PlateMaterial& material) {
  BenchmarkProblem p;
  p.kind = ProblemKind::Circle;
  p.material = material;
  p.load = [](const Point&) { return 1.0; };
  const double d = material.bending;
  const double shear_term = material.thickness * material.thickness / material.lambda_s;  // lambda^-1 t^2
  p.exact = [d, shear_term](const Point& x) {
    const double rho2 = x.squaredNorm();
    ExactFields f;
    f.w = rho2 * rho2 / (64.0 * d) - rho2 * (shear_term / 4.0 + 1.0 / (32.0 * d)) + shear_term / 4.0 + 1.0 / (64.0 * d);
    f.r = x * (rho2 - 1.0) / (16.0 * d);
    f.grad_w = x * (rho2 / (16.0 * d) - shear_term / 2.0 - 1.0 / (16.0 * d));
    f.grad_r << rho2 - 1.0 + 2.0 * x.x() * x.x(), 2.0 * x.x() * x.y(),  //
        2.0 * x.x() * x.y(), rho2 - 1.0 + 2.0 * x.y() * x.y();
    f.grad_r /= 16.0 * d;
    return f;
  };
  p.probe = Point::Zero();
  return p;
}

BenchmarkProblem square_problem(const PlateMaterial& material) {
  BenchmarkProblem p;
  p.kind = ProblemKind::Square;
  p.material = material;
  const double d = material.bending;
  p.load = [d](const Point& pt) {
    const double x = pt.x(), y = pt.y();
    const double xx = x * (x - 1.0), yy = y * (y - 1.0);
    const double px = 5.0 * x * x - 5.0 * x + 1.0, py = 5.0 * y * y - 5.0 * y + 1.0;
    return d * (12.0 * yy * px * (2.0 * yy * yy + xx * py) + 12.0 * xx * py * (2.0 * xx * xx + yy * px));
  };
  // The rotations carry the sign that makes grad w - r vanish in the thin
  // limit, matching s = lambda t^-2 (grad w - r) and the load above.
  const double k = 2.0 * material.thickness * material.thickness / (5.0 * (1.0 - material.poisson));
  p.exact = [k](const Point& pt) {
    const double x = pt.x(), y = pt.y();
    const double xx = x * (x - 1.0), yy = y * (y - 1.0);
    const double dx = 2.0 * x - 1.0, dy = 2.0 * y - 1.0;  // d(xx)/dx, d(yy)/dy
    const double px = 5.0 * x * x - 5.0 * x + 1.0, py = 5.0 * y * y - 5.0 * y + 1.0;
    const double dpx = 10.0 * x - 5.0, dpy = 10.0 * y - 5.0;
    const double xx2 = xx * xx, yy2 = yy * yy, xx3 = xx2 * xx, yy3 = yy2 * yy;
    ExactFields f;
    f.w = xx3 * yy3 / 3.0 - k * (yy3 * xx * px + xx3 * yy * py);
    f.r = Eigen::Vector2d(yy3 * xx2 * dx, xx3 * yy2 * dy);
    f.grad_w = Eigen::Vector2d(xx2 * dx * yy3 - k * (yy3 * (dx * px + xx * dpx) + 3.0 * xx2 * dx * yy * py),
                               xx3 * yy2 * dy - k * (3.0 * yy2 * dy * xx * px + xx3 * (dy * py + yy * dpy)));
    f.grad_r << yy3 * (2.0 * xx * dx * dx + 2.0 * xx2), 3.0 * yy2 * dy * xx2 * dx,  //
        3.0 * xx2 * dx * yy2 * dy, xx3 * (2.0 * yy * dy * dy + 2.0 * yy2);
    return f;
  };
  p.probe = Point(0.5, 0.5);
  return p;
}

BenchmarkProblem parallelogram_problem(double skew_deg) {
  BenchmarkProblem p;
  p.kind = ProblemKind::Parallelogram;
  p.material = make_material(kBenchmarkYoung, kBenchmarkPoisson, kShearCorrection, 1.0);
  p.load = [](const Point&) { return 100.0; };
  p.reference_deflection = 6.52000;
  p.side_a = 200.0;
  p.side_b = 100.0;
  p.skew_deg = skew_deg;
  p.length = p.side_b;
  const double theta = skew_deg * std::numbers::pi / 180.0;
  p.probe = 0.5 * Point(p.side_a + p.side_b * std::cos(theta), p.side_b * std::sin(theta));
  return p;
}

BenchmarkProblem make_problem(ProblemKind kind, double t_over_l, double skew_deg) {
  if (!(t_over_l > 0.0 && t_over_l < 1.0)) throw Error(ErrorKind::ConfigError, "t/L must lie in (0, 1)");
  switch (kind) {
    case ProblemKind::Patch:
      return patch_problem(make_material(kBenchmarkYoung, kBenchmarkPoisson, kShearCorrection, t_over_l));
    case ProblemKind::Circle:
      return circle_problem(make_material(kBenchmarkYoung, kBenchmarkPoisson, kShearCorrection, t_over_l));
    case ProblemKind::Square:
      return square_problem(make_material(kBenchmarkYoung, kBenchmarkPoisson, kShearCorrection, t_over_l));
    case ProblemKind::Parallelogram: {
      auto p = parallelogram_problem(skew_deg);
      p.material = make_material(kBenchmarkYoung, kBenchmarkPoisson, kShearCorrection, t_over_l * p.length);
      return p;
    }
  }
  throw Error(ErrorKind::ConfigError, "unknown problem kind");
}

TriangulationMesh make_benchmark_mesh(const BenchmarkProblem& problem, int resolution, MeshPattern pattern,
                                      std::uint64_t seed) {
  switch (problem.kind) {
    case ProblemKind::Patch:
    case ProblemKind::Square: return generate_square_mesh(resolution, pattern, seed);
    case ProblemKind::Circle: return generate_disk_mesh(resolution);
    case ProblemKind::Parallelogram:
      return generate_parallelogram_mesh(problem.side_a, problem.side_b, problem.skew_deg, resolution);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown problem kind");
}

}  // namespace vanp
