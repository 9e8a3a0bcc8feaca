#include "qdesign/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "qdesign/least_squares.hpp"

namespace qdesign::dynamics {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

using Bloch = std::array<double, 3>;

double norm(const Bloch& r) { return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Damping {
  double inv_t1_ns;
  double inv_t2_ns;

  void apply(Bloch& r, double t_ns) const {
    const double e2 = std::exp(-t_ns * inv_t2_ns);
    const double e1 = std::exp(-t_ns * inv_t1_ns);
    r[0] *= e2;
    r[1] *= e2;
    r[2] = 1.0 + (r[2] - 1.0) * e1;
  }
};

// dr/dt = w x r, rotation by |w| t about w.
void rotate(Bloch& r, const Bloch& w, double t_ns) {
  const double mag = norm(w);
  const double angle = mag * t_ns;
  if (angle == 0.0) return;
  const Bloch n{w[0] / mag, w[1] / mag, w[2] / mag};
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double dot = n[0] * r[0] + n[1] * r[1] + n[2] * r[2];
  const Bloch cross{n[1] * r[2] - n[2] * r[1], n[2] * r[0] - n[0] * r[2],
                    n[0] * r[1] - n[1] * r[0]};
  for (int i = 0; i < 3; ++i) r[i] = r[i] * c + cross[i] * s + n[i] * dot * (1.0 - c);
}

struct ShotOutcome {
  double sigma_z;
  double max_norm;
};

ShotOutcome run_shot(const PulseSequence& seq, const QubitNoiseParams& noise,
                     const ZControlCalibration& cal, const EvolveOptions& options,
                     std::uint64_t shot) {
  std::mt19937_64 rng(splitmix64(options.seed + shot));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double detuning = two_pi * noise.sigma_hz * 1e-9 * gauss(rng);  // rad/ns
  const Damping damping{1.0 / (noise.t1_us * 1e3), 1.0 / (noise.t2_us * 1e3)};

  Bloch r{0.0, 0.0, 1.0};
  double max_norm = 1.0;
  for (const Segment& s : seq.segments) {
    switch (s.axis) {
      case Axis::readout:
        break;
      case Axis::idle:
      case Axis::z: {
        double delta = detuning;
        if (s.axis == Axis::z) delta += two_pi * cal.df_deta_mhz_per_ua * s.amplitude * 1e-3;
        rotate(r, {0.0, 0.0, delta}, s.duration_ns);
        damping.apply(r, s.duration_ns);
        max_norm = std::max(max_norm, norm(r));
        break;
      }
      case Axis::x:
      case Axis::y: {
        const double omega = two_pi * s.amplitude * 1e-9;
        const Bloch w = s.axis == Axis::x ? Bloch{omega, 0.0, detuning}
                                          : Bloch{0.0, omega, detuning};
        const auto steps = static_cast<std::size_t>(
            std::max(1.0, std::ceil(s.duration_ns / options.max_substep_ns)));
        const double h = s.duration_ns / static_cast<double>(steps);
        for (std::size_t k = 0; k < steps; ++k) {
          damping.apply(r, 0.5 * h);
          rotate(r, w, h);
          damping.apply(r, 0.5 * h);
          max_norm = std::max(max_norm, norm(r));
        }
        break;
      }
    }
  }

  double z = r[2];
  if (options.readout == Readout::projective) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    z = u(rng) < 0.5 * (1.0 + r[2]) ? 1.0 : -1.0;
  }
  return {z, max_norm};
}

bool uniform_grid(const std::vector<double>& t) {
  if (t.size() < 2) return false;
  const double dt = t[1] - t[0];
  if (!(dt > 0.0)) return false;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(t[i]))) return false;
  }
  return true;
}

std::complex<double> dft_at(const std::vector<double>& y, double mean, double cycles_per_sample) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t n = 0; n < y.size(); ++n) {
    const double arg = -two_pi * cycles_per_sample * static_cast<double>(n);
    acc += (y[n] - mean) * std::complex<double>(std::cos(arg), std::sin(arg));
  }
  return acc;
}

double mean_of(const std::vector<double>& y) {
  double s = 0.0;
  for (double v : y) s += v;
  return s / static_cast<double>(y.size());
}

}  // namespace

void QubitNoiseParams::validate() const {
  if (!(t1_us > 0.0) || !(t2_us > 0.0)) throw DomainError("T1 and T2 must be positive");
  if (t2_us > 2.0 * t1_us) throw DomainError("T2 exceeds 2*T1");
  if (!(sigma_hz >= 0.0) || !std::isfinite(sigma_hz))
    throw DomainError("quasi-static detuning sigma must be finite and >= 0");
}

void ZControlCalibration::validate() const {
  if (!(df_deta_mhz_per_ua > 0.0) || !std::isfinite(df_deta_mhz_per_ua))
    throw DomainError("df_deta must be positive");
  if (!(max_shift_mhz > 0.0)) throw DomainError("calibrated Z range must be positive");
}

const char* axis_name(Axis a) {
  switch (a) {
    case Axis::idle: return "idle";
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
    case Axis::readout: return "readout";
  }
  return "?";
}

Axis axis_from_name(const std::string& name) {
  for (Axis a : {Axis::idle, Axis::x, Axis::y, Axis::z, Axis::readout}) {
    if (name == axis_name(a)) return a;
  }
  throw DomainError("unknown segment axis '" + name + "'");
}

void PulseSequence::validate(const ZControlCalibration& cal) const {
  std::size_t readouts = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (!(s.duration_ns >= 0.0) || !std::isfinite(s.duration_ns))
      throw DomainError("segment " + std::to_string(i) + ": duration must be >= 0");
    if (!std::isfinite(s.amplitude))
      throw DomainError("segment " + std::to_string(i) + ": amplitude must be finite");
    if (s.axis == Axis::z &&
        std::abs(cal.df_deta_mhz_per_ua * s.amplitude) > cal.max_shift_mhz)
      throw DomainError("segment " + std::to_string(i) + ": Z shift outside calibrated range");
    if (s.axis == Axis::readout) ++readouts;
  }
  if (readouts != 1) throw DomainError("sequence needs exactly one readout marker");
  if (segments.back().axis != Axis::readout) throw DomainError("readout marker must be last");
}

double PulseSequence::duration_ns() const {
  double t = 0.0;
  for (const Segment& s : segments) t += s.duration_ns;
  return t;
}

PulseSequence& PulseSequence::idle(double ns) {
  segments.push_back({Axis::idle, ns, 0.0});
  return *this;
}

PulseSequence& PulseSequence::rotate(Axis axis, double ns, double rate_hz) {
  if (axis != Axis::x && axis != Axis::y) throw DomainError("drive axis must be x or y");
  segments.push_back({axis, ns, rate_hz});
  return *this;
}

PulseSequence& PulseSequence::z(double ns, double eta_ua) {
  segments.push_back({Axis::z, ns, eta_ua});
  return *this;
}

PulseSequence& PulseSequence::readout() {
  segments.push_back({Axis::readout, 0.0, 0.0});
  return *this;
}

Segment rotation(Axis axis, double angle, double ns) {
  if (!(ns > 0.0)) throw DomainError("rotation pulse duration must be positive");
  return {axis, ns, angle / (two_pi * ns * 1e-9)};
}

EvolveResult evolve(const PulseSequence& seq, const QubitNoiseParams& noise,
                    const ZControlCalibration& cal, const EvolveOptions& options) {
  noise.validate();
  cal.validate();
  seq.validate(cal);
  if (options.shots == 0) throw DomainError("shot count must be positive");
  if (!(options.max_substep_ns > 0.0)) throw DomainError("substep must be positive");

  std::vector<ShotOutcome> outcomes(options.shots);
  std::size_t threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  threads = std::clamp<std::size_t>(threads, 1, options.shots);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) outcomes[i] = run_shot(seq, noise, cal, options, i);
  };
  if (threads == 1) {
    work(0, options.shots);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (options.shots + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(options.shots, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  EvolveResult result;
  double sum = 0.0;
  for (const ShotOutcome& o : outcomes) {
    sum += o.sigma_z;
    result.max_bloch_norm = std::max(result.max_bloch_norm, o.max_norm);
  }
  result.sigma_z = sum / static_cast<double>(options.shots);
  return result;
}

std::vector<double> linspace(double start, double stop, std::size_t count) {
  if (count < 2) throw DomainError("linspace needs at least two points");
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i)
    v[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
  return v;
}

const char* preset_name(Preset p) {
  switch (p) {
    case Preset::t1: return "t1";
    case Preset::ramsey: return "ramsey";
    case Preset::echo: return "echo";
    case Preset::zpulse: return "zpulse";
  }
  return "?";
}

Preset preset_from_name(const std::string& name) {
  for (Preset p : {Preset::t1, Preset::ramsey, Preset::echo, Preset::zpulse}) {
    if (name == preset_name(p)) return p;
  }
  throw DomainError("unknown preset '" + name + "'");
}

PulseSequence preset_sequence(Preset p, double delay_ns, const PresetOptions& options) {
  const double pi = std::numbers::pi;
  const Segment x_pi = rotation(Axis::x, pi, options.pi_ns);
  const Segment x_half = rotation(Axis::x, pi / 2.0, options.pi_ns / 2.0);
  PulseSequence s;
  switch (p) {
    case Preset::t1:
      s.segments.push_back(x_pi);
      s.idle(delay_ns);
      break;
    case Preset::ramsey:
      s.segments.push_back(x_half);
      s.idle(delay_ns);
      s.segments.push_back(x_half);
      break;
    case Preset::echo:
      s.segments.push_back(x_half);
      s.idle(delay_ns / 2.0);
      s.segments.push_back(x_pi);
      s.idle(delay_ns / 2.0);
      s.segments.push_back(x_half);
      break;
    case Preset::zpulse:
      s.segments.push_back(x_half);
      s.z(delay_ns, options.eta_ua);
      s.segments.push_back(x_half);
      break;
  }
  s.readout();
  return s;
}

std::vector<double> preset_delays(Preset p, const PresetOptions& options) {
  double max_ns = 0.0;
  std::size_t points = 0;
  switch (p) {
    case Preset::t1: max_ns = 45000.0; points = 91; break;
    case Preset::ramsey: max_ns = 8000.0; points = 81; break;
    case Preset::echo: max_ns = 45000.0; points = 91; break;
    case Preset::zpulse: max_ns = 500.0; points = 501; break;
  }
  if (options.max_delay_ns > 0.0) max_ns = options.max_delay_ns;
  if (options.points > 0) points = options.points;
  return linspace(0.0, max_ns, points);
}

double dft_peak_hz(const Trace& trace, double min_amplitude) {
  const auto& y = trace.sigma_z;
  if (y.size() != trace.time_ns.size()) throw DomainError("trace columns differ in length");
  if (!uniform_grid(trace.time_ns)) throw DomainError("DFT needs a uniform time grid");
  const std::size_t n = y.size();
  const double mean = mean_of(y);
  const double nd = static_cast<double>(n);
  std::size_t best_k = 0;
  double best_amp = 0.0;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double amp = 2.0 * std::abs(dft_at(y, mean, static_cast<double>(k) / nd)) / nd;
    if (amp > best_amp) {
      best_amp = amp;
      best_k = k;
    }
  }
  if (best_amp < min_amplitude) return 0.0;
  const double dt_s = (trace.time_ns[1] - trace.time_ns[0]) * 1e-9;
  return static_cast<double>(best_k) / (nd * dt_s);
}

DecayFit extract_decay(const Trace& trace, DecayModel model) {
  const auto& y = trace.sigma_z;
  const auto& t_ns = trace.time_ns;
  if (y.size() != t_ns.size()) throw DomainError("trace columns differ in length");
  if (y.size() < 8) throw DomainError("decay fit needs at least 8 points");
  const std::size_t n = y.size();
  std::vector<double> t(n);  // us
  for (std::size_t i = 0; i < n; ++i) t[i] = t_ns[i] * 1e-3;
  const double span = t.back() - t.front();
  if (!(span > 0.0)) throw DomainError("trace must span a positive time");

  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double scale = std::max({1.0, std::abs(*lo), std::abs(*hi)});
  if (*hi - *lo <= 1e-9 * scale) throw NoDecayError("no decay detected: trace is constant", 0.0);

  const std::size_t tail = std::max<std::size_t>(1, n / 10);
  double tail_mean = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) tail_mean += y[i];
  tail_mean /= static_cast<double>(tail);

  DecayFit fit;
  fit.model = model;
  numeric::LeastSquaresProblem problem;
  problem.residual_count = n;
  Eigen::VectorXd x0;

  if (model == DecayModel::exponential) {
    const double a0 = y.front() - tail_mean;
    double tau0 = span / 3.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(y[i] - tail_mean) < std::abs(a0) / std::numbers::e) {
        tau0 = std::max(t[i] - t.front(), span / static_cast<double>(n));
        break;
      }
    }
    x0.resize(3);
    x0 << a0, std::log(tau0), tail_mean;
    problem.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
      const double tau = std::exp(p[1]);
      for (std::size_t i = 0; i < n; ++i)
        r[static_cast<Eigen::Index>(i)] = p[0] * std::exp(-(t[i] - t.front()) / tau) + p[2] - y[i];
    };
    problem.jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& j) {
      const double tau = std::exp(p[1]);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const double u = (t[i] - t.front()) / tau;
        const double e = std::exp(-u);
        j(row, 0) = e;
        j(row, 1) = p[0] * e * u;
        j(row, 2) = 1.0;
      }
    };
  } else {
    if (!uniform_grid(t_ns)) throw DomainError("damped-cosine fit needs a uniform time grid");
    const double dt = t[1] - t[0];
    const double mean = mean_of(y);
    const double nd = static_cast<double>(n);
    // Coarse DFT peak, then a zero-padded scan over +-1 bin.
    double best_c = 0.0, best_amp = 0.0;
    for (std::size_t k = 1; k <= n / 2; ++k) {
      const double c = static_cast<double>(k) / nd;
      const double amp = std::abs(dft_at(y, mean, c));
      if (amp > best_amp) {
        best_amp = amp;
        best_c = c;
      }
    }
    if (best_c == 0.0) throw NoDecayError("no oscillation detected", 0.0);
    const double coarse = best_c;
    for (int s = -40; s <= 40; ++s) {
      const double c = coarse + static_cast<double>(s) / (40.0 * nd);
      if (c <= 0.0 || c >= 0.5) continue;
      const double amp = std::abs(dft_at(y, mean, c));
      if (amp > best_amp) {
        best_amp = amp;
        best_c = c;
      }
    }
    const std::complex<double> peak = dft_at(y, mean, best_c);
    const double f0 = best_c / dt;  // MHz
    x0.resize(5);
    x0 << 2.0 * std::abs(peak) / nd, std::log(span), f0, std::arg(peak), mean;
    problem.residuals = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
      const double tau = std::exp(p[1]);
      for (std::size_t i = 0; i < n; ++i) {
        const double u = t[i] - t.front();
        r[static_cast<Eigen::Index>(i)] =
            p[0] * std::exp(-u / tau) * std::cos(two_pi * p[2] * u + p[3]) + p[4] - y[i];
      }
    };
    problem.jacobian = [&](const Eigen::VectorXd& p, Eigen::MatrixXd& j) {
      const double tau = std::exp(p[1]);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const double u = t[i] - t.front();
        const double e = std::exp(-u / tau);
        const double arg = two_pi * p[2] * u + p[3];
        const double c = std::cos(arg), s = std::sin(arg);
        j(row, 0) = e * c;
        j(row, 1) = p[0] * e * c * u / tau;
        j(row, 2) = -p[0] * e * s * two_pi * u;
        j(row, 3) = -p[0] * e * s;
        j(row, 4) = 1.0;
      }
    };
  }

  numeric::LmOptions lm;
  lm.max_iterations = 500;
  const numeric::LmResult res = numeric::levenberg_marquardt(problem, x0, lm);
  const Eigen::VectorXd& p = res.x;
  fit.converged = res.converged;
  fit.amplitude = p[0];
  fit.amplitude_se = res.std_errors[0];
  fit.tau_ns = std::exp(p[1]) * 1e3;
  fit.tau_se_ns = fit.tau_ns * res.std_errors[1];
  fit.residual_rms = std::sqrt(2.0 * res.cost / static_cast<double>(n));
  if (model == DecayModel::exponential) {
    fit.offset = p[2];
  } else {
    fit.frequency_hz = p[2] * 1e6;
    fit.frequency_se_hz = res.std_errors[2] * 1e6;
    fit.phase = std::remainder(p[3], two_pi);
    fit.offset = p[4];
    if (fit.amplitude < 0.0) {
      fit.amplitude = -fit.amplitude;
      fit.phase = std::remainder(fit.phase + std::numbers::pi, two_pi);
    }
  }

  if (!res.converged) throw ConvergenceError("decay fit did not converge: " + res.stop_reason,
                                             fit.residual_rms);
  const bool insignificant = !(std::abs(fit.amplitude) > 3.0 * fit.amplitude_se);
  const bool too_slow = !(fit.tau_ns < 1e3 * span * 1e3);
  if (insignificant || too_slow || !std::isfinite(fit.tau_se_ns))
    throw NoDecayError("no decay detected", fit.residual_rms);
  return fit;
}

ZPrecessionResult simulate_z_precession(double eta_ua, double dt_start_ns, double dt_stop_ns,
                                        std::size_t points, const ZControlCalibration& cal,
                                        const QubitNoiseParams& noise,
                                        const EvolveOptions& options, double pi_ns) {
  cal.validate();
  if (!(dt_stop_ns > dt_start_ns) || dt_start_ns < 0.0)
    throw DomainError("Z precession needs 0 <= dt_start < dt_stop");
  PresetOptions preset;
  preset.pi_ns = pi_ns;
  preset.eta_ua = eta_ua;
  ZPrecessionResult out;
  out.trace = sweep([&](double dt) { return preset_sequence(Preset::zpulse, dt, preset); },
                    linspace(dt_start_ns, dt_stop_ns, points), noise, cal, options);
  const double dt_s = (out.trace.time_ns[1] - out.trace.time_ns[0]) * 1e-9;
  out.bin_hz = 1.0 / (static_cast<double>(points) * dt_s);
  out.fringe_dft_hz = dft_peak_hz(out.trace);
  if (out.fringe_dft_hz > 0.0) {
    try {
      out.fit = extract_decay(out.trace, DecayModel::damped_cosine);
    } catch (const ConvergenceError&) {
      out.fit.reset();
    }
  }
  return out;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << "time_ns,sigma_z\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.time_ns.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", trace.time_ns[i], trace.sigma_z[i]);
    out << buf;
  }
}

nlohmann::json to_json(const PulseSequence& seq) {
  nlohmann::json segs = nlohmann::json::array();
  for (const Segment& s : seq.segments) {
    nlohmann::json j{{"axis", axis_name(s.axis)}};
    if (s.axis != Axis::readout) j["duration_ns"] = s.duration_ns;
    if (s.axis == Axis::x || s.axis == Axis::y) j["rate_MHz"] = s.amplitude * 1e-6;
    if (s.axis == Axis::z) j["eta_uA"] = s.amplitude;
    segs.push_back(std::move(j));
  }
  return {{"format", "qdesign-sequence"}, {"version", 1}, {"segments", segs}};
}

PulseSequence sequence_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& path, const std::string& what) {
    throw ParseError(path + ": " + what);
  };
  if (!j.is_object()) fail("sequence", "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "format" && key != "version" && key != "segments") fail(key, "unknown key");
  }
  if (j.value("format", "") != "qdesign-sequence") fail("format", "expected 'qdesign-sequence'");
  if (!j.contains("version") || j["version"] != 1) fail("version", "expected 1");
  if (!j.contains("segments") || !j["segments"].is_array()) fail("segments", "expected an array");

  PulseSequence seq;
  for (std::size_t i = 0; i < j["segments"].size(); ++i) {
    const auto& s = j["segments"][i];
    const std::string path = "segments[" + std::to_string(i) + "]";
    if (!s.is_object() || !s.contains("axis") || !s["axis"].is_string())
      fail(path, "needs a string 'axis'");
    Segment seg;
    try {
      seg.axis = axis_from_name(s["axis"].get<std::string>());
    } catch (const DomainError& e) {
      fail(path + ".axis", e.what());
    }
    std::string amp_key;
    if (seg.axis == Axis::x || seg.axis == Axis::y) amp_key = "rate_MHz";
    if (seg.axis == Axis::z) amp_key = "eta_uA";
    for (const auto& [key, value] : s.items()) {
      if (key == "axis") continue;
      if (key == "duration_ns" && seg.axis != Axis::readout) {
        if (!value.is_number()) fail(path + ".duration_ns", "expected a number");
        seg.duration_ns = value.get<double>();
      } else if (!amp_key.empty() && key == amp_key) {
        if (!value.is_number()) fail(path + "." + key, "expected a number");
        seg.amplitude = value.get<double>() * (amp_key == "rate_MHz" ? 1e6 : 1.0);
      } else {
        fail(path + "." + key, "unknown key");
      }
    }
    seq.segments.push_back(seg);
  }
  return seq;
}

}  // namespace qdesign::dynamics
