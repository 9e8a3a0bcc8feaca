#include "qdesign/verification/oracles.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "qdesign/constants.hpp"

namespace qdesign::oracle {

using namespace qdesign::constants;

namespace {

std::vector<double> grid_levels_at(double e_c, double ej_tilde, double el_tilde,
                                   std::size_t points, double half_width,
                                   std::size_t count) {
  const auto n = static_cast<Eigen::Index>(points);
  const double h = 2.0 * half_width / static_cast<double>(points + 1);
  Eigen::VectorXd diag(n);
  Eigen::VectorXd off = Eigen::VectorXd::Constant(n - 1, -4.0 * e_c / (h * h));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double phi = -half_width + h * static_cast<double>(i + 1);
    diag(i) = 8.0 * e_c / (h * h) - ej_tilde * std::cos(phi) + el_tilde * phi * phi;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  std::vector<double> out;
  for (std::size_t k = 1; k <= count; ++k)
    out.push_back(solver.eigenvalues()(static_cast<Eigen::Index>(k)) -
                  solver.eigenvalues()(0));
  return out;
}

}  // namespace

std::vector<double> grid_levels(double e_c, double ej_tilde, double el_tilde,
                                std::size_t count) {
  const double w = 0.5 * ej_tilde + el_tilde;
  const double half_width = 16.0 * std::pow(e_c / w, 0.25);
  const auto coarse = grid_levels_at(e_c, ej_tilde, el_tilde, 2999, half_width, count);
  const auto fine = grid_levels_at(e_c, ej_tilde, el_tilde, 5999, half_width, count);
  std::vector<double> out;
  for (std::size_t k = 0; k < count; ++k)
    out.push_back((4.0 * fine[k] - coarse[k]) / 3.0);
  return out;
}

double coaxial_loops_mutual(double radius_a, double radius_b, double axial) {
  const double mu0_ph_per_um = mu0 * 1e6;  // H/m -> pH/um
  const double k2 = 4.0 * radius_a * radius_b /
                    ((radius_a + radius_b) * (radius_a + radius_b) + axial * axial);
  const double k = std::sqrt(k2);
  return mu0_ph_per_um * std::sqrt(radius_a * radius_b) *
         ((2.0 / k - k) * std::comp_ellint_1(k) - 2.0 / k * std::comp_ellint_2(k));
}

MonteCarloEstimate tlf_rate_monte_carlo(const loss::TlfModel& model,
                                        double omega_q, std::size_t samples,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double gamma = two_pi * model.gamma2;
  const double w_max = two_pi * model.omega_tlf_max;
  const double coupling = model.d0 * elementary_charge * angstrom * model.e_field / hbar;
  const double n_defects =
      model.rho0 * (model.volume * 1e18) * (model.omega_tlf_max * 1e-9);
  const double t_lo = std::tan(0.5 * model.theta_min);

  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    double p;
    do {
      p = std::pow(model.p_min, 1.0 - uniform(rng));  // density ~ 1/p
    } while (uniform(rng) > std::sqrt(1.0 - p * p));
    double theta;
    do {
      theta = 2.0 * std::atan(std::pow(t_lo, 1.0 - uniform(rng)));  // ~ 1/sin
    } while (uniform(rng) > std::pow(std::cos(theta), model.alpha));
    const double w = w_max * std::pow(uniform(rng), 1.0 / (model.alpha + 1.0));
    const double s = std::sin(theta);
    const double value = p * p * coupling * coupling * s * s * gamma /
                         (gamma * gamma + (w - omega_q) * (w - omega_q));
    const double delta = value - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (value - mean);
  }
  const double variance = m2 / static_cast<double>(samples - 1);
  return {n_defects * mean,
          n_defects * std::sqrt(variance / static_cast<double>(samples))};
}

}  // namespace qdesign::oracle
