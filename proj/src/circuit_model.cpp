#include "qdesign/circuit_model.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "qdesign/constants.hpp"
#include "qdesign/errors.hpp"

namespace qdesign::circuit {

using namespace qdesign::constants;

std::vector<std::string> CircuitParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0))
      throw DomainError(std::string("circuit: ") + name + " must be positive");
  };
  positive(e_c, "e_c");
  positive(e_j0, "e_j0");
  positive(e_l, "e_l");
  positive(c_total_ff, "c_total");
  if (!(d >= 0.0 && d < 1.0))
    throw DomainError("circuit: d must lie in [0, 1)");
  if (!std::isfinite(n_g) || !std::isfinite(flux_offset))
    throw DomainError("circuit: n_g and flux_offset must be finite");
  if (e_j0 / e_c < 1.0)
    throw DomainError("circuit: e_j0/e_c < 1 is outside the model's validity");
  std::vector<std::string> warnings;
  if (e_j0 / e_c < 20.0) {
    std::ostringstream msg;
    msg << "e_j0/e_c = " << e_j0 / e_c
        << " is below 20; the perturbative level formula is unreliable";
    warnings.push_back(msg.str());
  }
  return warnings;
}

EffectiveEnergies effective_energies(double e_j, double e_l) {
  if (!(e_j > 0.0) || !(e_l > 0.0))
    throw DomainError("effective_energies: E_J and E_L must be positive");
  const double s = 6.0 * e_j + 2.0 * e_l;
  const double s2 = s * s;
  return {e_j * 6.0 * e_l * e_l / s2, e_l * 9.0 * e_j * e_j / s2,
          e_l / (3.0 * e_j)};
}

EffectiveEnergies effective_energies(const CircuitParams& params, double e_j) {
  return effective_energies(e_j, params.e_l);
}

double ej_of_flux(double e_j0, double d, double flux) {
  // |cos x| sqrt(1 + d^2 tan^2 x) written without the tan singularity.
  const double x = pi * flux;
  const double c = std::cos(x);
  const double s = std::sin(x);
  return e_j0 * std::sqrt(c * c + d * d * s * s);
}

double ej_of_flux(const CircuitParams& params, double flux) {
  return ej_of_flux(params.e_j0, params.d, flux);
}

double level_energy(double e_c, double ej_tilde, double el_tilde, int m) {
  const double w = 0.5 * ej_tilde + el_tilde;
  const double a = ej_tilde * e_c / (4.0 * w);
  return 4.0 * std::sqrt(e_c * w) * m - a * (m * m + m);
}

LevelSpectrum transmon_levels(double e_c, const EffectiveEnergies& eff,
                              std::size_t m_max) {
  if (m_max < 1) throw DomainError("transmon_levels: m_max must be >= 1");
  if (!(e_c > 0.0)) throw DomainError("transmon_levels: E_C must be positive");
  const double w = 0.5 * eff.ej_tilde + eff.el_tilde;
  if (!(w > 0.0))
    throw DomainError("transmon_levels: EJ~/2 + EL~ must be positive");
  LevelSpectrum out;
  double previous = 0.0;
  for (std::size_t m = 1; m <= m_max; ++m) {
    const double e = level_energy(e_c, eff.ej_tilde, eff.el_tilde,
                                  static_cast<int>(m));
    if (!(e > previous))
      throw DomainError(
          "transmon_levels: levels not increasing; outside transmon regime");
    out.energies.push_back(e);
    previous = e;
  }
  out.anharmonicity_abs = -2.0 * eff.ej_tilde * e_c / (4.0 * w);
  out.anharmonicity_rel = out.anharmonicity_abs / out.energies.front();
  return out;
}

LevelSpectrum transmon_levels(const CircuitParams& params, double e_j,
                              std::size_t m_max) {
  return transmon_levels(params.e_c, effective_energies(params, e_j), m_max);
}

namespace {

template <typename Matrix>
std::vector<double> lowest_levels(const Matrix& h, std::size_t count) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("diagonalize: eigensolver failed", 0.0);
  const auto& ev = solver.eigenvalues();
  std::vector<double> levels;
  for (std::size_t k = 1; k <= count; ++k) levels.push_back(ev(k) - ev(0));
  return levels;
}

}  // namespace

std::vector<double> oscillator_levels(double e_c, double n_g, double ej_tilde,
                                      double el_tilde, std::size_t basis_size,
                                      std::size_t count) {
  const auto n = static_cast<Eigen::Index>(basis_size);
  if (basis_size < count + 2)
    throw DomainError("diagonalize: basis too small for requested levels");
  const double w = 0.5 * ej_tilde + el_tilde;
  if (!(w > 0.0) || !(e_c > 0.0) || ej_tilde < 0.0 || el_tilde < 0.0)
    throw DomainError("diagonalize: invalid effective energies");
  const double x0 = std::pow(e_c / w, 0.25);

  // Exact truncations of n^2 and phi^2; phi itself only feeds cos(phi).
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    h(k, k) = 4.0 * e_c * (2.0 * kk + 1.0) / (4.0 * x0 * x0) +
              el_tilde * x0 * x0 * (2.0 * kk + 1.0);
    if (k + 2 < n) {
      const double r = std::sqrt((kk + 1.0) * (kk + 2.0));
      const double v = -4.0 * e_c * r / (4.0 * x0 * x0) + el_tilde * x0 * x0 * r;
      h(k, k + 2) = v;
      h(k + 2, k) = v;
    }
  }
  if (ej_tilde != 0.0) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (Eigen::Index k = 0; k + 1 < n; ++k)
      sub(k) = x0 * std::sqrt(static_cast<double>(k + 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> phi;
    phi.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const Eigen::VectorXd c = phi.eigenvalues().array().cos();
    const Eigen::MatrixXd& v = phi.eigenvectors();
    h.noalias() -= ej_tilde * (v * c.asDiagonal() * v.transpose());
  }
  if (n_g == 0.0) return lowest_levels(h, count);

  // (n - n_g)^2 = n^2 - 2 n_g n + n_g^2 with n = i (a^dag - a) / (2 x0).
  Eigen::MatrixXcd hc = h.cast<std::complex<double>>();
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double amp = std::sqrt(static_cast<double>(k + 1)) / (2.0 * x0);
    const std::complex<double> up(0.0, amp);  // <k+1|n|k>
    hc(k + 1, k) += -8.0 * e_c * n_g * up;
    hc(k, k + 1) += -8.0 * e_c * n_g * std::conj(up);
  }
  return lowest_levels(hc, count);
}

LevelSpectrum diagonalize(double e_c, double n_g, const EffectiveEnergies& eff,
                          std::size_t m_max, const DiagonalizeOptions& options) {
  if (m_max < 1) throw DomainError("diagonalize: m_max must be >= 1");
  const std::size_t count = std::max<std::size_t>(m_max, 2);
  std::size_t size = std::max(options.basis_size, 3 * count);
  std::vector<double> coarse =
      oscillator_levels(e_c, n_g, eff.ej_tilde, eff.el_tilde, size, count);
  double residual = 0.0;
  while (2 * size <= options.max_basis_size) {
    size *= 2;
    std::vector<double> fine =
        oscillator_levels(e_c, n_g, eff.ej_tilde, eff.el_tilde, size, count);
    residual = std::max(std::abs(fine[0] - coarse[0]),
                        std::abs(fine[1] - coarse[1]));
    coarse = std::move(fine);
    if (residual < options.tolerance) {
      LevelSpectrum out;
      out.energies.assign(coarse.begin(), coarse.begin() + m_max);
      out.anharmonicity_abs = coarse[1] - 2.0 * coarse[0];
      out.anharmonicity_rel = out.anharmonicity_abs / coarse[0];
      out.basis_size = size;
      return out;
    }
  }
  std::ostringstream msg;
  msg << "diagonalize: not converged at basis size " << size
      << ", last change " << residual << " GHz";
  throw ConvergenceError(msg.str(), residual);
}

LevelSpectrum diagonalize(const CircuitParams& params, double e_j,
                          std::size_t m_max, const DiagonalizeOptions& options) {
  return diagonalize(params.e_c, params.n_g, effective_energies(params, e_j),
                     m_max, options);
}

double bias_to_flux(const CircuitParams& params, double m_bias_ph,
                    double i_bias_ma) {
  if (!(m_bias_ph > 0.0)) throw DomainError("bias: m_bias must be positive");
  // pH * mA = 1e-15 Wb
  return m_bias_ph * i_bias_ma * 1e-15 / (2.0 * flux_quantum) +
         params.flux_offset;
}

double current_period_ma(double m_bias_ph) {
  if (!(m_bias_ph > 0.0)) throw DomainError("bias: m_bias must be positive");
  return 2.0 * flux_quantum / (m_bias_ph * 1e-15);
}

double frequency_vs_bias(const CircuitParams& params, double m_bias_ph,
                         double i_bias_ma) {
  const double flux = bias_to_flux(params, m_bias_ph, i_bias_ma);
  const EffectiveEnergies eff =
      effective_energies(params, ej_of_flux(params, flux));
  return level_energy(params.e_c, eff.ej_tilde, eff.el_tilde, 1);
}

namespace units {

double ej_from_critical_current(double i_c_na) {
  return reduced_flux_quantum * i_c_na * 1e-9 / planck * 1e-9;
}
double critical_current_from_ej(double e_j_ghz) {
  return e_j_ghz * 1e9 * planck / reduced_flux_quantum * 1e9;
}
double el_from_inductance(double l_g_nh) {
  return reduced_flux_quantum * reduced_flux_quantum / (2.0 * l_g_nh * 1e-9) /
         planck * 1e-9;
}
double inductance_from_el(double e_l_ghz) {
  return reduced_flux_quantum * reduced_flux_quantum /
         (2.0 * e_l_ghz * 1e9 * planck) * 1e9;
}
double ec_from_capacitance(double c_ff) {
  return elementary_charge * elementary_charge / (2.0 * c_ff * 1e-15) /
         planck * 1e-9;
}
double capacitance_from_ec(double e_c_ghz) {
  return elementary_charge * elementary_charge /
         (2.0 * e_c_ghz * 1e9 * planck) * 1e15;
}
double josephson_inductance(double e_j_ghz) {
  return reduced_flux_quantum * reduced_flux_quantum /
         (e_j_ghz * 1e9 * planck) * 1e9;
}

}  // namespace units

}  // namespace qdesign::circuit
