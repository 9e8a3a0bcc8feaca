#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace qdesign::circuit {

// Energies are ordinary frequencies E/h in GHz throughout this module.
struct CircuitParams {
  double e_c = 0.24;
  double e_j0 = 45.0;   // both junctions together, at the sweet spot
  double e_l = 128.0;   // E_L = (hbar/2e)^2 / (2 L_g), L = 4 L_g
  double d = 0.32;      // junction asymmetry
  double c_total_ff = 81.0;
  double n_g = 0.0;
  double flux_offset = 0.0;  // in units of Phi0

  /// Throws DomainError on hard violations; returns soft warnings
  /// (E_J0/E_C below the transmon regime).
  std::vector<std::string> validate() const;
};

struct EffectiveEnergies {
  double ej_tilde = 0.0;
  double el_tilde = 0.0;
  double c_param = 0.0;  // E_L / (3 E_J)
};

struct LevelSpectrum {
  std::vector<double> energies;  // E_0m for m = 1..m_max, ground referenced
  double anharmonicity_abs = 0.0;
  double anharmonicity_rel = 0.0;  // anharmonicity_abs / E_01 (negative)
  std::size_t basis_size = 0;      // 0 for the closed-form formula
};

EffectiveEnergies effective_energies(const CircuitParams& params, double e_j);
EffectiveEnergies effective_energies(double e_j, double e_l);

/// Josephson energy of the asymmetric SQUID at reduced flux `flux` (Phi/Phi0).
/// `flux` is the total flux, i.e. any offset is already included.
double ej_of_flux(const CircuitParams& params, double flux);
double ej_of_flux(double e_j0, double d, double flux);

/// Closed-form E_0m for a single m; no validation.
double level_energy(double e_c, double ej_tilde, double el_tilde, int m);

/// Perturbative levels.
LevelSpectrum transmon_levels(const CircuitParams& params, double e_j,
                              std::size_t m_max = 3);
LevelSpectrum transmon_levels(double e_c, const EffectiveEnergies& eff,
                              std::size_t m_max = 3);

struct DiagonalizeOptions {
  std::size_t basis_size = 60;
  std::size_t max_basis_size = 480;
  double tolerance = 1e-6;  // GHz, i.e. 1 kHz
};

/// Numeric levels of 4E_C(n - n_g)^2 - EJ~ cos(phi) + EL~ phi^2 in the
/// oscillator basis of the quadratic part. The basis is doubled until E_01
/// and E_02 move by less than `tolerance`; ConvergenceError otherwise.
LevelSpectrum diagonalize(const CircuitParams& params, double e_j,
                          std::size_t m_max = 3,
                          const DiagonalizeOptions& options = {});
LevelSpectrum diagonalize(double e_c, double n_g, const EffectiveEnergies& eff,
                          std::size_t m_max = 3,
                          const DiagonalizeOptions& options = {});

/// Lowest `count` eigenvalues at one fixed basis size, ground referenced
/// (the ground level itself is dropped).
std::vector<double> oscillator_levels(double e_c, double n_g, double ej_tilde,
                                      double el_tilde, std::size_t basis_size,
                                      std::size_t count);

/// Reduced loop flux for a bias current: m_bias * i / (2 Phi0) + flux_offset.
/// The SQUID sees half the gradiometric flux asymmetry, so the qubit
/// frequency repeats every 2 Phi0 / m_bias.
double bias_to_flux(const CircuitParams& params, double m_bias_ph,
                    double i_bias_ma);
double current_period_ma(double m_bias_ph);

/// E_01 in GHz at a bias current (perturbative).
double frequency_vs_bias(const CircuitParams& params, double m_bias_ph,
                         double i_bias_ma);

namespace units {
double ej_from_critical_current(double i_c_na);   // nA -> GHz
double critical_current_from_ej(double e_j_ghz);  // GHz -> nA
double el_from_inductance(double l_g_nh);         // nH -> GHz
double inductance_from_el(double e_l_ghz);        // GHz -> nH
double ec_from_capacitance(double c_ff);          // fF -> GHz
double capacitance_from_ec(double e_c_ghz);       // GHz -> fF
double josephson_inductance(double e_j_ghz);      // GHz -> nH
}  // namespace units

}  // namespace qdesign::circuit
