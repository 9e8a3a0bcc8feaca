#pragma once

// Reference computations that share no numerical code with the library:
// they exist so that tests and the acceptance suite compare against an
// independent evaluation.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qdesign/loss_budget.hpp"

namespace qdesign::oracle {

/// Lowest `count` excitation energies of -4E_C d^2/dphi^2 - EJ cos phi +
/// EL phi^2 on a uniform phase grid (three-point Laplacian, Richardson
/// extrapolated over two grids).
std::vector<double> grid_levels(double e_c, double ej_tilde, double el_tilde,
                                std::size_t count);

/// Mutual inductance of two coaxial circular filaments (radii in um,
/// axial distance in um) in pH, from complete elliptic integrals.
double coaxial_loops_mutual(double radius_a, double radius_b, double axial);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Direct-sampling estimate of the TLF relaxation rate (1/s): dipoles,
/// angles and frequencies are drawn from the truncated distributions by
/// rejection sampling and the coupling is averaged.
MonteCarloEstimate tlf_rate_monte_carlo(const loss::TlfModel& model,
                                        double omega_q, std::size_t samples,
                                        std::uint64_t seed);

}  // namespace qdesign::oracle
