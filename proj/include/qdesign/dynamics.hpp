#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdesign/errors.hpp"

namespace qdesign::dynamics {

// Times in the pulse layer are in ns; T1/T2 in us. Ground state is
// <sigma_z> = +1.
struct QubitNoiseParams {
  double t1_us = 9.1;
  double t2_us = 10.0;
  double sigma_hz = 100.66e3;  // quasi-static detuning spread; T2* ~ 2 us with T2 = 10 us

  void validate() const;  // positive (infinity allowed), t2 <= 2 t1, sigma >= 0
};

struct ZControlCalibration {
  double df_deta_mhz_per_ua = 65.0 / 32.0;
  double max_shift_mhz = 200.0;  // linear range

  void validate() const;
};

enum class Axis { idle, x, y, z, readout };
const char* axis_name(Axis a);
Axis axis_from_name(const std::string& name);

struct Segment {
  Axis axis = Axis::idle;
  double duration_ns = 0.0;
  double amplitude = 0.0;  // x/y: Rabi rate in Hz; z: eta in uA
};

struct PulseSequence {
  std::vector<Segment> segments;

  /// Durations >= 0 and exactly one readout, placed last.
  void validate(const ZControlCalibration& cal) const;
  double duration_ns() const;

  PulseSequence& idle(double ns);
  PulseSequence& rotate(Axis axis, double ns, double rate_hz);
  PulseSequence& z(double ns, double eta_ua);
  PulseSequence& readout();
};

/// Rectangular pulse of `angle` radians lasting `ns`.
Segment rotation(Axis axis, double angle, double ns);

enum class Readout { expectation, projective };

struct EvolveOptions {
  std::size_t shots = 1000;
  std::uint64_t seed = 1;
  std::size_t threads = 0;  // 0: hardware concurrency
  Readout readout = Readout::expectation;
  double max_substep_ns = 1.0;
};

struct EvolveResult {
  double sigma_z = 1.0;            // shot average at the readout
  double max_bloch_norm = 0.0;     // over every shot and substep
};

/// Shot-averaged Bloch evolution. Each shot draws one Gaussian detuning
/// offset from its own RNG stream, seeded from (seed, shot index), and shots
/// are reduced in index order, so the result does not depend on `threads`.
EvolveResult evolve(const PulseSequence& seq, const QubitNoiseParams& noise,
                    const ZControlCalibration& cal, const EvolveOptions& options);

struct Trace {
  std::vector<double> time_ns;
  std::vector<double> sigma_z;
};

/// Sequence family evaluated at each time; shot i uses the same random
/// stream at every point.
template <typename Builder>
Trace sweep(Builder&& build, const std::vector<double>& times_ns,
            const QubitNoiseParams& noise, const ZControlCalibration& cal,
            const EvolveOptions& options) {
  Trace t;
  for (double time : times_ns) {
    t.time_ns.push_back(time);
    t.sigma_z.push_back(evolve(build(time), noise, cal, options).sigma_z);
  }
  return t;
}

std::vector<double> linspace(double start, double stop, std::size_t count);

struct PresetOptions {
  double pi_ns = 20.0;
  double eta_ua = 32.0;
  std::size_t points = 0;     // 0: preset default
  double max_delay_ns = 0.0;  // 0: preset default
};

enum class Preset { t1, ramsey, echo, zpulse };
Preset preset_from_name(const std::string& name);
const char* preset_name(Preset p);

/// Sequence of a preset at delay `delay_ns`.
PulseSequence preset_sequence(Preset p, double delay_ns, const PresetOptions& options);
std::vector<double> preset_delays(Preset p, const PresetOptions& options);

enum class DecayModel { exponential, damped_cosine };

struct DecayFit {
  DecayModel model = DecayModel::exponential;
  double amplitude = 0.0;
  double tau_ns = 0.0;
  double offset = 0.0;
  double frequency_hz = 0.0;  // damped cosine only
  double phase = 0.0;
  double tau_se_ns = 0.0;
  double frequency_se_hz = 0.0;
  double amplitude_se = 0.0;
  double residual_rms = 0.0;
  bool converged = false;
};

/// Raised when a trace has no significant decaying component.
class NoDecayError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

/// Least-squares fit of A exp(-t/tau) + B, or
/// A exp(-t/tau) cos(2 pi f t + phi) + B. Needs >= 8 points.
DecayFit extract_decay(const Trace& trace, DecayModel model);

/// Dominant nonzero DFT frequency of a uniformly sampled trace (mean
/// removed). Returns 0 when no component exceeds `min_amplitude`.
double dft_peak_hz(const Trace& trace, double min_amplitude = 1e-3);

struct ZPrecessionResult {
  Trace trace;
  double fringe_dft_hz = 0.0;
  double bin_hz = 0.0;
  std::optional<DecayFit> fit;  // damped cosine seeded by the DFT peak
};

/// pi/2 - Z(eta, dt) - pi/2 over dt in [dt_start, dt_stop].
ZPrecessionResult simulate_z_precession(double eta_ua, double dt_start_ns, double dt_stop_ns,
                                        std::size_t points, const ZControlCalibration& cal,
                                        const QubitNoiseParams& noise,
                                        const EvolveOptions& options, double pi_ns = 20.0);

/// CSV with header time_ns,sigma_z; values printed with %.17g.
void write_trace_csv(std::ostream& out, const Trace& trace);

nlohmann::json to_json(const PulseSequence& seq);
PulseSequence sequence_from_json(const nlohmann::json& j);

}  // namespace qdesign::dynamics
