#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qdesign/circuit_model.hpp"
#include "qdesign/least_squares.hpp"

namespace qdesign::fit {

// Multiphoton peak positions, all in GHz: E_01, E_02/2, E_03/3.
struct MultiphotonSet {
  double f01 = 0.0;
  double f02_half = 0.0;
  double f03_third = 0.0;

  void validate() const;
};

MultiphotonSet multiphoton_from_energies(double e_c, double e_j, double e_l);

struct SweetSpotOptions {
  double e_j_seed = 45.0;
  double e_l_seed = 128.0;
  double tolerance = 1e-6;  // GHz per equation
  // Return the least-squares point instead of throwing when the three
  // equations have no common root (the usual case for measured peaks).
  bool least_squares = false;
  std::size_t max_iterations = 200;
};

struct SweetSpotSolution {
  double e_c = 0.0;
  double e_j = 0.0;
  double e_l = 0.0;
  bool e_l_fixed = false;
  std::array<double, 3> residuals{};  // model - measured, GHz
  double max_residual = 0.0;
  bool exact = false;                 // every residual below tolerance
  std::size_t iterations = 0;
};

/// Solves the m = 1, 2, 3 level equations at the sweet spot. E_C stays at
/// `e_c` (the equations only fix two combinations of the three energies);
/// E_J and E_L are solved, or only E_J when `e_l_fixed` is given.
SweetSpotSolution solve_sweet_spot(const MultiphotonSet& mp, double e_c,
                                   std::optional<double> e_l_fixed = {},
                                   const SweetSpotOptions& options = {});

struct SpectroscopyPoint {
  double bias_ma = 0.0;
  double freq_ghz = 0.0;
  double weight = 1.0;
  int order = 1;  // m-photon line; the model is E_0m / m
};

struct SpectroscopyDataset {
  std::vector<SpectroscopyPoint> points;

  void validate(std::size_t free_parameters = 4) const;
};

// Natural fit coordinates, in this order.
enum class FitParam { e_j0 = 0, d, m_bias, flux_offset, e_c, e_l };
inline constexpr std::size_t fit_param_count = 6;
const char* fit_param_name(FitParam p);

struct FrozenMask {
  std::array<bool, fit_param_count> frozen{false, false, false, false, true, true};

  bool is_frozen(FitParam p) const { return frozen[static_cast<std::size_t>(p)]; }
  void set(FitParam p, bool value) { frozen[static_cast<std::size_t>(p)] = value; }
  std::size_t free_count() const;
};

struct FluxFitSeed {
  circuit::CircuitParams params;
  double m_bias_ph = 2.3;
};

struct FluxFitOptions {
  bool critical_current_coordinates = false;  // fit I_c,tot instead of E_J0
  bool analytic_jacobian = true;
  numeric::LmOptions lm{};
};

struct FitResult {
  circuit::CircuitParams params;
  double m_bias_ph = 0.0;
  double residual_rms = 0.0;  // GHz, unweighted
  std::array<std::optional<double>, fit_param_count> std_errors{};
  std::size_t iterations = 0;
  bool converged = false;
  bool d_at_bound = false;
  std::vector<double> cost_history;
  FrozenMask frozen;
  FluxFitSeed seed;
  bool critical_current_coordinates = false;
};

/// Model transition frequency E_0m/m in GHz at a bias current.
double model_frequency(const circuit::CircuitParams& params, double m_bias_ph,
                       double i_bias_ma, int order = 1);

/// Gradient of model_frequency with respect to (e_j0, d, m_bias,
/// flux_offset, e_c, e_l).
std::array<double, fit_param_count> model_gradient(const circuit::CircuitParams& params,
                                                   double m_bias_ph, double i_bias_ma,
                                                   int order = 1);

FitResult fit_flux_spectrum(const SpectroscopyDataset& data, const FluxFitSeed& seed,
                            const FrozenMask& frozen, const FluxFitOptions& options = {});

struct JointFitResult {
  SweetSpotSolution sweet_spot;
  FitResult flux;
  std::size_t rounds = 0;
  bool converged = false;
};

/// Alternates the sweet-spot solve (E_C frozen, E_L from the last flux fit)
/// and the flux fit (E_C frozen, seeded with E_J0 from the solve) until E_J
/// and E_L both change by less than `rel_change`.
JointFitResult fit_joint(const MultiphotonSet& mp, const SpectroscopyDataset& data,
                         const FluxFitSeed& seed, std::size_t max_rounds = 10,
                         double rel_change = 1e-3);

}  // namespace qdesign::fit
