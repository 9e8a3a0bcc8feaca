#pragma once

#include <optional>
#include <string>
#include <vector>

namespace qdesign::loss {

// Rates are in 1/s. Angular frequencies in rad/s, g in ordinary Hz.
struct PurcellInputs {
  double omega_q = 0.0;
  double omega_r = 0.0;
  double q_loaded = 0.0;
  double g = 0.0;             // g/2pi, Hz
  double m_bias_ph = 0.0;
  double l_total_nh = 0.0;
  double c_coupling_ff = 0.0;
  double c_total_ff = 0.0;
  double z0 = 50.0;

  void validate() const;
  double detuning() const;  // |omega_q - omega_r|, rad/s
};

struct TlfModel {
  double rho0 = 400.0;         // 1/(um^3 GHz)
  double d0 = 1.6;             // e*Angstrom
  double e_field = 2.3;        // V/m
  double volume = 50e-18;      // m^3
  double alpha = 0.3;
  double gamma2 = 10e6;        // Hz (gamma2/2pi)
  double omega_tlf_max = 15e9; // Hz (omega_max/2pi)
  double p_min = 1e-6;
  double theta_min = 0.2;      // rad
  double rel_tol = 1e-4;

  void validate() const;
  double defect_count() const;           // N = rho0 V f_max
  double dipole_normalization() const;   // A
  double frequency_normalization() const;  // B_omega, 1/(rad/s)^(alpha+1)
  double angle_normalization() const;    // B_theta
};

double purcell_single_mode(const PurcellInputs& in);
double purcell_inductive(const PurcellInputs& in);
double purcell_capacitive(const PurcellInputs& in);

/// Mean relaxation rate from an incoherent TLF ensemble, by nested adaptive
/// quadrature (theta innermost, then omega split around omega_q, then p).
double tlf_rate(const TlfModel& model, double omega_q);

double effective_loss_tangent(double fill_factor, double material_tangent);
double loss_tangent_rate(double delta_eff, double omega_q);

struct BudgetRow {
  std::string key;
  std::string label;
  double rate = 0.0;         // 1/s
  double lifetime_us = 0.0;  // 1/rate
};

struct NamedRate {
  std::string name;
  double rate = 0.0;
};

struct LossBudget {
  std::optional<double> purcell_single_mode;
  std::optional<double> purcell_inductive;
  std::optional<double> purcell_capacitive;
  std::optional<double> tlf;
  std::optional<double> radiative;
  std::vector<NamedRate> other;

  /// Sum of the Purcell channels that are present; empty if none are.
  std::optional<double> purcell_total() const;
  double gamma_sigma() const;
  /// Rows in presentation order: sm, ind, cap, Purcell total, TLF,
  /// radiation, other channels, reciprocal sum.
  std::vector<BudgetRow> rows() const;
};

double lifetime_us(double rate);
double rate_from_lifetime_us(double t_us);

/// Rounds to `digits` significant figures.
double round_significant(double value, int digits);

LossBudget budget(const PurcellInputs& in, const TlfModel& model,
                  double radiative_rate, const std::vector<NamedRate>& extras = {});

}  // namespace qdesign::loss
