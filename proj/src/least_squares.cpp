#include "qdesign/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qdesign/errors.hpp"

namespace qdesign::numeric {

Eigen::MatrixXd numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& x,
                                 std::size_t residual_count, double rel_step) {
  const auto m = static_cast<Eigen::Index>(residual_count);
  Eigen::MatrixXd jac(m, x.size());
  Eigen::VectorXd up(m), down(m);
  Eigen::VectorXd probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = rel_step * std::max(std::abs(x(k)), 1.0);
    probe(k) = x(k) + h;
    f(probe, up);
    probe(k) = x(k) - h;
    f(probe, down);
    probe(k) = x(k);
    jac.col(k) = (up - down) / (2.0 * h);
  }
  return jac;
}

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

LmResult levenberg_marquardt(const LeastSquaresProblem& problem, Eigen::VectorXd x0,
                             const LmOptions& options) {
  const auto m = static_cast<Eigen::Index>(problem.residual_count);
  const Eigen::Index p = x0.size();
  if (m == 0 || p == 0) throw DomainError("least squares: empty problem");

  auto jacobian = [&](const Eigen::VectorXd& x, Eigen::MatrixXd& j) {
    if (problem.jacobian) {
      j.resize(m, p);
      problem.jacobian(x, j);
    } else {
      j = numeric_jacobian(problem.residuals, x, problem.residual_count, options.fd_step);
    }
  };

  LmResult out;
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd r(m);
  problem.residuals(x, r);
  if (!all_finite(r)) throw DomainError("least squares: non-finite residuals at the seed");
  double cost = 0.5 * r.squaredNorm();
  out.cost_history.push_back(cost);

  Eigen::MatrixXd j;
  jacobian(x, j);
  Eigen::MatrixXd jtj = j.transpose() * j;
  Eigen::VectorXd grad = j.transpose() * r;
  double lambda = options.initial_lambda;
  double nu = 2.0;
  Eigen::VectorXd r_new(m);

  for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations) {
    out.gradient_norm = grad.lpNorm<Eigen::Infinity>();
    if (out.gradient_norm <= options.gradient_tol * (1.0 + cost)) {
      out.converged = true;
      out.stop_reason = "gradient";
      break;
    }
    Eigen::VectorXd scale = jtj.diagonal();
    const double floor = std::max(scale.maxCoeff(), 1e-300) * 1e-12;
    for (Eigen::Index k = 0; k < p; ++k) scale(k) = std::max(scale(k), floor);

    Eigen::MatrixXd a = jtj;
    a.diagonal() += lambda * scale;
    Eigen::VectorXd step = a.ldlt().solve(-grad);
    if (!all_finite(step)) {
      lambda *= nu;
      nu *= 2.0;
      continue;
    }
    const double step_norm = step.norm();
    if (step_norm <= options.step_tol * (x.norm() + options.step_tol)) {
      out.converged = true;
      out.stop_reason = "step";
      break;
    }
    const Eigen::VectorXd x_new = x + step;
    problem.residuals(x_new, r_new);
    const double cost_new = all_finite(r_new) ? 0.5 * r_new.squaredNorm()
                                              : std::numeric_limits<double>::infinity();
    // Predicted reduction of the local quadratic model.
    const double predicted = -step.dot(grad) - 0.5 * step.dot(jtj * step);
    const double rho = predicted > 0.0 ? (cost - cost_new) / predicted : -1.0;
    if (cost_new < cost && rho > 1e-4) {
      const double reduction = (cost - cost_new) / std::max(cost, 1e-300);
      x = x_new;
      r = r_new;
      cost = cost_new;
      out.cost_history.push_back(cost);
      jacobian(x, j);
      jtj = j.transpose() * j;
      grad = j.transpose() * r;
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (reduction < options.cost_tol || cost == 0.0) {
        out.converged = true;
        out.stop_reason = "cost";
        ++out.iterations;
        break;
      }
    } else {
      lambda *= nu;
      nu *= 2.0;
      if (lambda > 1e30) {
        out.converged = out.gradient_norm <= 1e-6 * (1.0 + cost);
        out.stop_reason = "damping";
        break;
      }
    }
  }
  if (out.stop_reason.empty()) out.stop_reason = "max_iterations";

  out.x = x;
  out.residuals = r;
  out.cost = cost;
  out.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jtj);
  cod.setThreshold(1e-12);
  out.jacobian_rank = Eigen::FullPivLU<Eigen::MatrixXd>(j).setThreshold(1e-10).rank();
  const double dof = static_cast<double>(std::max<Eigen::Index>(m - p, 1));
  out.covariance = (2.0 * cost / dof) * cod.pseudoInverse();
  out.std_errors = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

}  // namespace qdesign::numeric
