#include <doctest.h>

#include <cmath>
#include <random>

#include "qdesign/least_squares.hpp"

using namespace qdesign::numeric;

TEST_SUITE("least_squares") {
  TEST_CASE("Rosenbrock as a residual problem") {
    LeastSquaresProblem prob;
    prob.residual_count = 2;
    prob.residuals = [](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
      r.resize(2);
      r(0) = 10.0 * (x(1) - x(0) * x(0));
      r(1) = 1.0 - x(0);
    };
    auto res = levenberg_marquardt(prob, Eigen::Vector2d(-1.2, 1.0));
    CHECK(res.converged);
    CHECK(res.x(0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(res.x(1) == doctest::Approx(1.0).epsilon(1e-8));
    for (std::size_t i = 1; i < res.cost_history.size(); ++i)
      CHECK(res.cost_history[i] <= res.cost_history[i - 1]);
  }

  TEST_CASE("linear regression covariance matches the normal equations") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.1);
    const int n = 40;
    Eigen::VectorXd t(n), y(n);
    for (int i = 0; i < n; ++i) {
      t(i) = i * 0.25;
      y(i) = 2.0 + 0.5 * t(i) + noise(rng);
    }
    LeastSquaresProblem prob;
    prob.residual_count = n;
    prob.residuals = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
      r = (x(0) + x(1) * t.array()).matrix() - y;
    };
    auto res = levenberg_marquardt(prob, Eigen::Vector2d(0.0, 0.0));
    Eigen::MatrixXd a(n, 2);
    a.col(0).setOnes();
    a.col(1) = t;
    const Eigen::Vector2d beta = (a.transpose() * a).ldlt().solve(a.transpose() * y);
    CHECK(res.x(0) == doctest::Approx(beta(0)).epsilon(1e-9));
    CHECK(res.x(1) == doctest::Approx(beta(1)).epsilon(1e-9));
    const double s2 = (a * beta - y).squaredNorm() / (n - 2);
    const Eigen::Matrix2d cov = s2 * (a.transpose() * a).inverse();
    CHECK(res.std_errors(0) == doctest::Approx(std::sqrt(cov(0, 0))).epsilon(1e-6));
    CHECK(res.std_errors(1) == doctest::Approx(std::sqrt(cov(1, 1))).epsilon(1e-6));
  }

  TEST_CASE("analytic and numeric Jacobians agree") {
    auto f = [](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
      r.resize(3);
      r << std::sin(x(0)) * x(1), std::exp(x(1)), x(0) * x(0);
    };
    Eigen::Vector2d x(0.3, -0.4);
    auto j = numeric_jacobian(f, x, 3);
    CHECK(j(0, 0) == doctest::Approx(std::cos(0.3) * -0.4).epsilon(1e-8));
    CHECK(j(0, 1) == doctest::Approx(std::sin(0.3)).epsilon(1e-8));
    CHECK(j(1, 1) == doctest::Approx(std::exp(-0.4)).epsilon(1e-8));
    CHECK(j(2, 0) == doctest::Approx(0.6).epsilon(1e-8));
  }

  TEST_CASE("rank-deficient problems report their rank") {
    LeastSquaresProblem prob;
    prob.residual_count = 3;
    prob.residuals = [](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
      r.resize(3);
      const double s = x(0) + x(1);
      r << s - 1.0, 2 * s - 2.0, 3 * s - 3.0;
    };
    auto res = levenberg_marquardt(prob, Eigen::Vector2d(0.0, 0.0));
    CHECK(res.jacobian_rank == 1);
    CHECK(res.x(0) + res.x(1) == doctest::Approx(1.0).epsilon(1e-9));
  }
}
