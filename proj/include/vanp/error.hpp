#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vanp {

enum class ErrorKind {
  InvalidArgument,
  InvalidState,
  InvalidMesh,
  FormatError,
  TopologyError,
  SupportDeficiency,
  NoConvergence,
  DegenerateGeometry,
  DegenerateRule,
  ProjectionDegeneracy,
  ConstraintCoverage,
  SolverError,
  UnsupportedProblem,
  OutOfDomain,
  ConfigError,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidState: return "invalid-state";
    case ErrorKind::InvalidMesh: return "invalid-mesh";
    case ErrorKind::FormatError: return "format-error";
    case ErrorKind::TopologyError: return "topology-error";
    case ErrorKind::SupportDeficiency: return "support-deficiency";
    case ErrorKind::NoConvergence: return "no-convergence";
    case ErrorKind::DegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::DegenerateRule: return "degenerate-rule";
    case ErrorKind::ProjectionDegeneracy: return "projection-degeneracy";
    case ErrorKind::ConstraintCoverage: return "constraint-coverage";
    case ErrorKind::SolverError: return "solver-error";
    case ErrorKind::UnsupportedProblem: return "unsupported-problem";
    case ErrorKind::OutOfDomain: return "out-of-domain";
    case ErrorKind::ConfigError: return "config-error";
  }
  return "unknown";
}

/// Library-wide exception. `kind()` is the machine-readable category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 protected:
  struct Verbatim {};
  /// Keeps `what` as is (already prefixed).
  Error(ErrorKind kind, const std::string& what, Verbatim) : std::runtime_error(what), kind_(kind) {}

 private:
  ErrorKind kind_;
};

/// Newton failure in the maxent dual; carries the last residual norm.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& message, double residual)
      : Error(ErrorKind::NoConvergence, message), residual_(residual) {}
  [[nodiscard]] double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Cholesky breakdown; carries the failing pivot (column) index.
class SolverError : public Error {
 public:
  SolverError(const std::string& message, long pivot)
      : Error(ErrorKind::SolverError, message), pivot_(pivot) {}
  [[nodiscard]] long pivot() const noexcept { return pivot_; }

 private:
  long pivot_;
};

}  // namespace vanp
