#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdesign/circuit_model.hpp"
#include "qdesign/dynamics.hpp"
#include "qdesign/loss_budget.hpp"
#include "qdesign/spectro_fit.hpp"

namespace qdesign::config {

// Config files are JSON. Dimensional values are strings carrying a unit,
// e.g. "0.24 GHz" or "2.3 pH"; dimensionless values are plain numbers.
// Every block and key is optional, unknown keys are errors.

enum class Quantity {
  frequency,    // -> Hz
  time,         // -> us
  inductance,   // -> pH
  capacitance,  // -> fF
  resistance,   // -> Ohm
  length,       // -> um
  volume,       // -> m^3
  field,        // -> V/m
  dipole,       // -> e*Angstrom
  tlf_density,  // -> 1/(um^3 GHz)
  current,      // -> mA
  flux,         // -> Phi0
  angle,        // -> rad
  freq_per_current,  // -> MHz/uA
};

/// Parses "<number> <unit>" into the canonical unit of `q`. `path` prefixes
/// error messages.
double parse_quantity(const std::string& text, Quantity q, const std::string& path);

struct BudgetConfig {
  double radiative_t1_us = 100.0;
  std::vector<loss::NamedRate> extras;  // rates in 1/s
};

struct CouplingConfig {
  double l_total_nh = 6.3;
  double beta = 0.1;
  double g_ref_hz = 100e6;
  double separation_um = 150.0;  // edge-to-edge gap between outer rings
  double rotation_rad = 0.0;
  double placement_rad = 1.5707963267948966;  // junction axes normal to the center line
};

struct DynamicsConfig {
  dynamics::QubitNoiseParams noise;
  dynamics::ZControlCalibration calibration;
  double pi_ns = 20.0;
  double eta_ua = 32.0;
  std::size_t shots = 10000;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  dynamics::Readout readout = dynamics::Readout::expectation;
};

struct FitConfig {
  double m_bias_seed_ph = 2.3;
  std::optional<fit::MultiphotonSet> multiphoton;
  std::optional<double> e_l_anchor;  // GHz
};

struct OutputConfig {
  std::string directory = ".";  // relative to the working directory
  std::string format = "csv";  // csv | json, for data files
};

struct ToolkitConfig {
  circuit::CircuitParams circuit;
  loss::PurcellInputs purcell;
  loss::TlfModel tlf;
  BudgetConfig budget;
  std::string geometry_file;  // absolute; empty uses the built-in reference geometry
  CouplingConfig coupling;
  DynamicsConfig dynamics;
  FitConfig fit;
  OutputConfig output;
  std::string source;  // file it was read from, empty for defaults
  std::vector<std::string> warnings;

  ToolkitConfig();
};

/// Relative input file references resolve against `base_dir`.
ToolkitConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
ToolkitConfig load_config(const std::string& path);

/// Explicit path, else $QDESIGN_CONFIG, else built-in defaults.
ToolkitConfig resolve_config(const std::optional<std::string>& explicit_path);

}  // namespace qdesign::config
