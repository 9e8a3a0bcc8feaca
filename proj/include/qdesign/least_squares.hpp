#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace qdesign::numeric {

using ResidualFn = std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)>;
using JacobianFn = std::function<void(const Eigen::VectorXd& x, Eigen::MatrixXd& j)>;

struct LeastSquaresProblem {
  std::size_t residual_count = 0;
  ResidualFn residuals;
  JacobianFn jacobian;  // optional; central differences otherwise
};

struct LmOptions {
  std::size_t max_iterations = 200;
  double gradient_tol = 1e-12;  // on max |J^T r| / (1 + cost)
  double step_tol = 1e-12;      // relative step size
  double cost_tol = 1e-15;      // relative cost reduction
  double initial_lambda = 1e-3;
  double fd_step = 1e-6;        // relative finite-difference step
};

struct LmResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residuals;
  double cost = 0.0;  // 0.5 * |r|^2
  Eigen::MatrixXd covariance;
  Eigen::VectorXd std_errors;
  Eigen::Index jacobian_rank = 0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::string stop_reason;
  std::vector<double> cost_history;  // one entry per accepted step, starting value first
};

Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                                 std::size_t residual_count, double rel_step = 1e-6);

/// Levenberg-Marquardt with Marquardt diagonal scaling. Rejected steps leave
/// x unchanged, so the cost never increases. Covariance is
/// s^2 (J^T J)^+ with s^2 = 2 cost / (n - p).
LmResult levenberg_marquardt(const LeastSquaresProblem& problem, Eigen::VectorXd x0,
                             const LmOptions& options = {});

}  // namespace qdesign::numeric
