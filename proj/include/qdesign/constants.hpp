#pragma once

#include <numbers>

namespace qdesign::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA values (SI). Flux quantum as used throughout the toolkit.
inline constexpr double planck = 6.62607015e-34;           // J s
inline constexpr double hbar = planck / two_pi;            // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double flux_quantum = 2.067833848e-15;    // Wb
inline constexpr double mu0 = 1.25663706212e-6;            // H/m
inline constexpr double angstrom = 1e-10;                  // m

// hbar/2e in Wb.
inline constexpr double reduced_flux_quantum = hbar / (2.0 * elementary_charge);

}  // namespace qdesign::constants
