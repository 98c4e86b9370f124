#include "sdfit/lm_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "sdfit/error.hpp"

namespace sdfit {

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::gtol: return "gtol";
    case Termination::xtol: return "xtol";
    case Termination::ftol: return "ftol";
    case Termination::max_iter: return "max_iter";
  }
  return "unknown";
}

Matrix numeric_jacobian(const ResidualFn& residual, const Vector& p, double scale) {
  const Vector r0 = residual(p);
  if (!r0.allFinite()) throw Error(Errc::numerical_error, "non-finite residual at the expansion point");
  Matrix jac(r0.size(), p.size());
  Vector probe = p;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double h = scale * std::max(std::abs(p[j]), 1.0);
    probe[j] = p[j] + h;
    const Vector up = residual(probe);
    probe[j] = p[j] - h;
    const Vector down = residual(probe);
    probe[j] = p[j];
    if (up.size() != r0.size() || down.size() != r0.size()) {
      throw Error(Errc::invalid_problem, "residual size changes with the parameters");
    }
    if (!up.allFinite() || !down.allFinite()) {
      throw Error(Errc::numerical_error, "non-finite residual inside the difference stencil");
    }
    jac.col(j) = (up - down) / (2.0 * h);
  }
  return jac;
}

namespace {

std::atomic<std::uint64_t> g_solves{0};
std::atomic<std::uint64_t> g_accepted{0};
std::atomic<std::uint64_t> g_violations{0};

class Projector {
 public:
  explicit Projector(const Vector& lower) : lower_(lower) {}

  void apply(Vector& p) const {
    if (lower_.size() == 0) return;
    p = p.cwiseMax(lower_);
  }

  // Gradient components that push an active bound outward cannot be reduced
  // and do not count against stationarity.
  Vector projected_gradient(const Vector& p, const Vector& g) const {
    if (lower_.size() == 0) return g;
    Vector out = g;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (p[i] <= lower_[i] && g[i] > 0.0) out[i] = 0.0;
    }
    return out;
  }

 private:
  Vector lower_;
};

}  // namespace

SolverDiagnostics solver_diagnostics() noexcept {
  return {g_solves.load(), g_accepted.load(), g_violations.load()};
}

SolveResult solve(const LeastSquaresProblem& problem) {
  const auto& opt = problem.options;
  const Eigen::Index n = problem.initial.size();
  if (!problem.residual) throw Error(Errc::invalid_problem, "missing residual function");
  if (n == 0) throw Error(Errc::invalid_problem, "no parameters");
  if (problem.lower_bounds.size() != 0 && problem.lower_bounds.size() != n) {
    throw Error(Errc::invalid_problem, "lower bound count does not match parameter count");
  }
  if (problem.lower_bounds.size() != 0 && (problem.initial.array() < problem.lower_bounds.array()).any()) {
    throw Error(Errc::invalid_problem, "initial guess violates the lower bounds");
  }
  if (!problem.initial.allFinite()) throw Error(Errc::numerical_error, "non-finite initial guess");

  const Projector projector(problem.lower_bounds);
  const auto jacobian_at = [&](const Vector& p) {
    return problem.jacobian ? problem.jacobian(p) : numeric_jacobian(problem.residual, p);
  };

  SolveResult result;
  Vector p = problem.initial;
  Vector r = problem.residual(p);
  if (r.size() == 0) throw Error(Errc::invalid_problem, "no residuals");
  if (!r.allFinite()) throw Error(Errc::numerical_error, "non-finite residual at the initial guess");
  Matrix jac = jacobian_at(p);
  if (jac.rows() != r.size() || jac.cols() != n) {
    throw Error(Errc::invalid_problem, "Jacobian is " + std::to_string(jac.rows()) + "x" +
                                           std::to_string(jac.cols()) + ", expected " +
                                           std::to_string(r.size()) + "x" + std::to_string(n));
  }
  if (!jac.allFinite()) throw Error(Errc::numerical_error, "non-finite Jacobian at the initial guess");

  double cost = r.squaredNorm();
  result.cost_history.push_back(cost);

  // Marquardt scaling; the scale only grows so the damping stays meaningful
  // when a column temporarily vanishes (e.g. amplitude at zero).
  Vector scale = jac.colwise().squaredNorm().transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(scale[i] > 0.0)) scale[i] = 1.0;
  }
  double damping = opt.initial_damping;

  result.reason = Termination::max_iter;
  while (result.iterations < opt.max_iterations) {
    const Vector g = jac.transpose() * r;
    if (cost == 0.0 || projector.projected_gradient(p, g).lpNorm<Eigen::Infinity>() <= opt.gtol) {
      result.reason = Termination::gtol;
      break;
    }
    ++result.iterations;

    const Matrix jtj = jac.transpose() * jac;
    Matrix lhs = jtj;
    lhs.diagonal() += damping * scale;
    const Vector step = lhs.ldlt().solve(-g);

    Vector trial = p + step;
    projector.apply(trial);
    const Vector actual_step = trial - p;
    if (actual_step.norm() <= opt.xtol * (p.norm() + opt.xtol)) {
      result.reason = Termination::xtol;
      break;
    }

    const Vector r_trial = problem.residual(trial);
    const double trial_cost = r_trial.allFinite() ? r_trial.squaredNorm() : HUGE_VAL;
    if (trial_cost < cost) {
      const double relative_decrease = (cost - trial_cost) / cost;
      p = trial;
      r = r_trial;
      cost = trial_cost;
      ++result.accepted_steps;
      ++g_accepted;
      if (!(cost <= result.cost_history.back())) ++g_violations;
      result.cost_history.push_back(cost);
      jac = jacobian_at(p);
      if (!jac.allFinite()) throw Error(Errc::numerical_error, "non-finite Jacobian during iteration");
      scale = scale.cwiseMax(jac.colwise().squaredNorm().transpose());
      damping = std::max(damping / opt.damping_factor, 1e-15);
      if (relative_decrease < opt.ftol) {
        result.reason = Termination::ftol;
        break;
      }
    } else {
      damping *= opt.damping_factor;
      if (damping > 1e16) {
        result.reason = Termination::xtol;
        break;
      }
    }
  }

  ++g_solves;
  result.parameters = p;
  result.cost = cost;
  return result;
}

}  // namespace sdfit
