#pragma once

// Damped Gauss-Newton (Levenberg-Marquardt) for bound-constrained least squares
//   min_x 0.5 * |r(x)|^2,  x >= lower,
// with Marquardt diagonal scaling, damping x2 on rejected and /3 on accepted steps,
// and projection of each trial point onto the bound.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace nldeco {

struct LmOptions {
  int max_iterations = 500;
  double initial_damping = 1e-3;
  double max_damping = 1e16;
  double relative_tolerance = 1e-14;  // on objective decrease and step size
  double absolute_objective = 1e-30;
};

struct LmResult {
  Eigen::VectorXd x;
  double objective = 0.0;  // 0.5 * |r|^2
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // one entry per accepted step, starting at x0
  Eigen::MatrixXd jacobian;               // at the returned x
};

/// residual(x) -> Eigen::VectorXd, jacobian(x) -> Eigen::MatrixXd (rows: residuals).
template <class Residual, class Jacobian>
LmResult levenberg_marquardt(Eigen::VectorXd x, const Residual& residual, const Jacobian& jacobian,
                             double lower_bound, const LmOptions& options = {}) {
  x = x.cwiseMax(lower_bound);
  Eigen::VectorXd r = residual(x);
  Eigen::MatrixXd j = jacobian(x);
  double objective = 0.5 * r.squaredNorm();
  double damping = options.initial_damping;

  LmResult result;
  result.objective_history.push_back(objective);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    if (objective <= options.absolute_objective) {
      result.converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd gradient = j.transpose() * r;
    const Eigen::VectorXd scale = jtj.diagonal().cwiseMax(1e-300);

    bool accepted = false;
    while (damping <= options.max_damping) {
      Eigen::MatrixXd system = jtj;
      system.diagonal() += damping * scale;
      const Eigen::VectorXd step = system.ldlt().solve(-gradient);
      const Eigen::VectorXd trial = (x + step).cwiseMax(lower_bound);
      const Eigen::VectorXd trial_r = residual(trial);
      const double trial_objective = 0.5 * trial_r.squaredNorm();
      if (std::isfinite(trial_objective) && trial_objective < objective) {
        const double decrease = objective - trial_objective;
        const double moved = (trial - x).norm();
        x = trial;
        r = trial_r;
        objective = trial_objective;
        j = jacobian(x);
        damping = std::max(damping / 3.0, 1e-300);
        result.objective_history.push_back(objective);
        accepted = true;
        if (decrease <= options.relative_tolerance * objective ||
            moved <= options.relative_tolerance * (x.norm() + options.relative_tolerance)) {
          result.converged = true;
        }
        break;
      }
      damping *= 2.0;
    }
    if (!accepted) {
      // No descent direction left at machine precision: x is stationary.
      result.converged = true;
      break;
    }
    if (result.converged) break;
  }

  result.x = x;
  result.objective = objective;
  result.jacobian = j;
  return result;
}

}  // namespace nldeco
