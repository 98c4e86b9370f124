#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sdfit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

struct SolverOptions {
  int max_iterations = 200;
  double gtol = 1e-10;
  double xtol = 1e-10;
  double ftol = 1e-10;
  double initial_damping = 1e-3;
  double damping_factor = 10.0;
};

struct LeastSquaresProblem {
  ResidualFn residual;
  JacobianFn jacobian;  // empty -> central differences
  Vector initial;
  Vector lower_bounds;  // empty -> unbounded; -inf entries allowed
  SolverOptions options;
};

enum class Termination { gtol, xtol, ftol, max_iter };

std::string_view to_string(Termination t) noexcept;

struct SolveResult {
  Vector parameters;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
  int accepted_steps = 0;
  Termination reason = Termination::max_iter;
  /// Cost at the initial point followed by the cost after every accepted step.
  std::vector<double> cost_history;
};

/// Levenberg-Marquardt with Marquardt diagonal scaling and projection onto
/// the lower bounds after every trial step.
SolveResult solve(const LeastSquaresProblem& problem);

/// Process-wide counters; every accepted step is checked against the cost
/// it replaced.
struct SolverDiagnostics {
  std::uint64_t solves = 0;
  std::uint64_t accepted_steps = 0;
  std::uint64_t descent_violations = 0;
};

SolverDiagnostics solver_diagnostics() noexcept;

/// Central differences with per-parameter step scale * max(|p_j|, 1).
Matrix numeric_jacobian(const ResidualFn& residual, const Vector& p, double scale = 1e-6);

}  // namespace sdfit
