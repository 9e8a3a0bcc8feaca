#include "qdesign/verification/acceptance.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "qdesign/circuit_model.hpp"
#include "qdesign/dynamics.hpp"
#include "qdesign/geometry_io.hpp"
#include "qdesign/loss_budget.hpp"
#include "qdesign/magnetics.hpp"
#include "qdesign/spectro_fit.hpp"
#include "qdesign/verification/oracles.hpp"

namespace qdesign::verification {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

class Recorder {
 public:
  Recorder(int id, std::string title) { r_.id = id; r_.title = std::move(title); }

  void check(bool pass, std::string text) { r_.checks.push_back({pass, std::move(text)}); }

  void rel(const std::string& name, double value, double target, double tol,
           const std::string& unit = "") {
    const bool ok = std::abs(value / target - 1.0) <= tol;
    check(ok, name + fmt("=%.4g", value) + unit + fmt(" (target %.4g", target) + unit +
                  fmt(" +-%g%%)", tol * 100));
  }

  void info(std::string text) { r_.info.push_back(std::move(text)); }

  CriterionResult& result() { return r_; }

 private:
  CriterionResult r_;
};

loss::PurcellInputs table_inputs() {
  loss::PurcellInputs in;
  in.omega_q = two_pi * 6.85e9;
  in.omega_r = two_pi * 8.79e9;
  in.q_loaded = 2100;
  in.g = 55e6;
  in.m_bias_ph = 2.3;
  in.l_total_nh = 6.3;
  in.c_coupling_ff = 0.1;
  in.c_total_ff = 81;
  in.z0 = 50;
  return in;
}

void purcell_single(Recorder& r) {
  const auto in = table_inputs();
  r.rel("detuning", in.detuning() / two_pi * 1e-9, 1.94, 0.001, " GHz");
  r.rel("T1_sm", loss::lifetime_us(loss::purcell_single_mode(in)), 47, 0.02, " us");
}

void purcell_inductive(Recorder& r) {
  r.rel("T1_ind", loss::lifetime_us(loss::purcell_inductive(table_inputs())), 32, 0.02, " us");
}

void purcell_capacitive(Recorder& r) {
  r.rel("T1_cap", loss::lifetime_us(loss::purcell_capacitive(table_inputs())), 87, 0.15, " us");
}

void purcell_total(Recorder& r) {
  const auto in = table_inputs();
  loss::LossBudget b;
  b.purcell_single_mode = loss::purcell_single_mode(in);
  b.purcell_inductive = loss::purcell_inductive(in);
  b.purcell_capacitive = loss::purcell_capacitive(in);
  r.rel("T1_purcell", loss::lifetime_us(*b.purcell_total()), 16, 0.05, " us");

  loss::LossBudget given;
  given.purcell_single_mode = loss::rate_from_lifetime_us(47);
  given.purcell_inductive = loss::rate_from_lifetime_us(32);
  given.purcell_capacitive = loss::rate_from_lifetime_us(87);
  given.tlf = loss::rate_from_lifetime_us(26);
  given.radiative = loss::rate_from_lifetime_us(100);
  r.rel("T1_sigma", loss::lifetime_us(given.gamma_sigma()), 8.9, 0.05, " us");
}

void tlf(Recorder& r) {
  const loss::TlfModel model;
  const double wq = two_pi * 6.85e9;
  const double rate = loss::tlf_rate(model, wq);
  const double t = loss::lifetime_us(rate);
  r.check(t >= 13.0 && t <= 52.0, fmt("T1_TLF=%.3g us (26 us within x2)", t));

  const auto mc = oracle::tlf_rate_monte_carlo(model, wq, 4'000'000, 2015);
  const double z = (rate - mc.mean) / mc.standard_error;
  r.check(std::abs(z) <= 3.0, fmt("quadrature vs Monte Carlo %.2f sigma (<=3)", z));

  auto scaled = model;
  scaled.rho0 *= 2.5;
  const double ratio = loss::tlf_rate(scaled, wq) / rate;
  r.check(std::abs(ratio / 2.5 - 1.0) <= 1e-6, fmt("rho0 linearity error %.1e (<=1e-6)", ratio / 2.5 - 1.0));
}

void participation(Recorder& r) {
  const double delta = loss::effective_loss_tangent(2.8e-4, 3e-3);
  r.rel("delta_eff", delta, 8.4e-7, 1e-9);
  r.rel("T1_delta", loss::lifetime_us(loss::loss_tangent_rate(8.4e-7, two_pi * 6.85e9)), 28, 0.02,
        " us");
}

void flux_conversion(Recorder& r) {
  r.rel("current per flux quantum", magnetics::flux_per_current(2.3), 0.90, 0.01, " mA");
  const double period = circuit::current_period_ma(2.3);
  r.rel("model period", period, 1.8, 0.01, " mA");
  r.rel("period vs measured", period, 1.7, 0.10, " mA");
}

void levels(Recorder& r) {
  circuit::CircuitParams p;  // E_C 0.24, E_L 128 GHz
  const auto sweet = circuit::transmon_levels(p, 45.0);
  r.rel("E01 sweet spot", sweet.energies[0], 7.6496, 0.03, " GHz");
  const auto op = circuit::transmon_levels(p, 29.0);
  r.rel("E01 operating", op.energies[0], 6.85, 0.02, " GHz");
  for (double ej : {45.0, 29.0}) {
    const auto num = circuit::diagonalize(p, ej);
    const auto pert = circuit::transmon_levels(p, ej);
    const double gap = std::abs(num.energies[0] / pert.energies[0] - 1.0);
    r.check(gap < 0.03, fmt("numeric vs perturbative at E_J=%.0f GHz: %.2f%% (<3%%)", ej, 100 * gap));
    r.info(fmt("relative anharmonicity at E_J=%.0f GHz: perturbative %.2f%%, numeric %.2f%%", ej,
               -100 * pert.anharmonicity_rel, -100 * num.anharmonicity_rel));
  }
  circuit::CircuitParams deep;
  deep.e_c = 0.01;
  deep.e_j0 = 100.0;
  deep.e_l = 1000.0;
  const double gap = std::abs(circuit::diagonalize(deep, 100.0).energies[0] /
                                  circuit::transmon_levels(deep, 100.0).energies[0] -
                              1.0);
  r.check(gap < 1e-3, fmt("deep transmon numeric vs perturbative %.3f%% (<0.1%%)", 100 * gap));
}

void sweet_spot(Recorder& r) {
  const auto mp = fit::multiphoton_from_energies(0.24, 45.0, 128.0);
  const auto sol = fit::solve_sweet_spot(mp, 0.24);
  const double err = std::max(std::abs(sol.e_j / 45.0 - 1.0), std::abs(sol.e_l / 128.0 - 1.0));
  r.check(err <= 1e-6, fmt("noiseless round trip relative error %.1e (<=1e-6)", err));

  const fit::MultiphotonSet measured{7.6496, 7.6094, 7.5673};
  fit::SweetSpotOptions opt;
  opt.least_squares = true;
  const auto anchored = fit::solve_sweet_spot(measured, 0.24, 128.0, opt);
  r.check(std::abs(anchored.e_j - 45.0) <= 12.0 && std::abs(anchored.e_l - 128.0) <= 30.0,
          fmt("measured triple, E_L anchored at 128 GHz: E_J=%.2f GHz (45+-12), E_L=%.0f GHz (128+-30)",
              anchored.e_j, anchored.e_l));
  const auto free = fit::solve_sweet_spot(measured, 0.24, std::nullopt, opt);
  r.info(fmt("measured triple, E_L free: E_J=%.2f GHz, E_L=%.2f GHz, max residual %.2f MHz",
             free.e_j, free.e_l, free.max_residual * 1e3));
}

void flux_fit(Recorder& r) {
  circuit::CircuitParams truth;
  truth.d = 0.32;
  truth.flux_offset = 0.1;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> noise(0.0, 1e-3);
  fit::SpectroscopyDataset data;
  for (int i = 0; i < 25; ++i) {
    const double bias = -0.9 + 1.8 * i / 24.0;
    data.points.push_back({bias, fit::model_frequency(truth, 2.3, bias) + noise(rng), 1.0, 1});
  }
  fit::FluxFitSeed seed;
  seed.params = truth;
  seed.params.e_j0 = 40.0;
  seed.params.d = 0.25;
  seed.params.flux_offset = 0.05;
  seed.m_bias_ph = 2.2;
  const auto result = fit::fit_flux_spectrum(data, seed, fit::FrozenMask{});
  r.check(result.converged, "fit converged");
  const char* names[] = {"E_J0", "d", "m_bias", "offset"};
  const double est[] = {result.params.e_j0, result.params.d, result.m_bias_ph,
                        result.params.flux_offset};
  const double ref[] = {45.0, 0.32, 2.3, 0.1};
  for (int k = 0; k < 4; ++k) {
    const double se = result.std_errors[k].value_or(0.0);
    const double z = se > 0 ? (est[k] - ref[k]) / se : INFINITY;
    r.check(std::abs(z) <= 3.0, std::string(names[k]) + fmt("=%.5g (%.2f SE, <=3)", est[k], z));
  }

  double worst = 0.0;
  std::mt19937_64 pick(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    circuit::CircuitParams p;
    p.e_j0 = 25 + 50 * u(pick);
    p.d = 0.1 + 0.8 * u(pick);
    p.flux_offset = -0.2 + 0.4 * u(pick);
    const double m = 1.8 + u(pick), bias = -1.2 + 2.4 * u(pick);
    const auto grad = fit::model_gradient(p, m, bias);
    double scale = 0.0;
    for (double g : grad) scale = std::max(scale, std::abs(g));
    for (int k = 0; k < 6; ++k) {
      auto eval = [&](double h) {
        auto q = p;
        double mm = m;
        switch (k) {
          case 0: q.e_j0 += h; break;
          case 1: q.d += h; break;
          case 2: mm += h; break;
          case 3: q.flux_offset += h; break;
          case 4: q.e_c += h; break;
          case 5: q.e_l += h; break;
        }
        return fit::model_frequency(q, mm, bias);
      };
      const double h = 1e-5;
      const double fd = (-eval(2 * h) + 8 * eval(h) - 8 * eval(-h) + eval(-2 * h)) / (12 * h);
      worst = std::max(worst, std::abs(grad[k] - fd) / std::max(std::abs(fd), scale));
    }
  }
  r.check(worst <= 1e-6, fmt("Jacobian vs finite differences %.1e (<=1e-6)", worst));
}

void neumann(Recorder& r, const config::ToolkitConfig& cfg) {
  using namespace magnetics;
  const auto a = circle(100.0, 720);
  const auto b = circle(100.0, 720, {0, 0, 300});
  const double m = neumann_mutual(a, b);
  const double exact = oracle::coaxial_loops_mutual(100, 100, 300);
  r.check(std::abs(m / exact - 1.0) <= 1e-3,
          fmt("coaxial loops %.5g pH vs elliptic %.5g pH (<=0.1%%)", m, exact));

  const auto geometry = cfg.geometry_file.empty() ? reference_geometry()
                                                  : read_geometry(cfg.geometry_file);
  const auto q = geometry.qubit();
  const auto line = geometry.bias_line();
  const double ab = neumann_mutual(q.loop1, line), ba = neumann_mutual(line, q.loop1);
  r.check(std::abs(ab - ba) <= 1e-12 * std::abs(ab), fmt("M(a,b)-M(b,a) = %.1e pH", ab - ba));

  const double m90 = qubit_pair_mutual(q, geometry.footprint_radius, 150.0, std::numbers::pi / 2);
  r.check(std::abs(m90) < 1e-3, fmt("pi/2 rotation |M|=%.1e pH (<1e-3)", std::abs(m90)));

  r.rel("bias line M", std::abs(gradiometric_mutual(q, line)), 2.3, 0.5, " pH");
  double strongest = 0.0;
  for (double placement : {0.0, std::numbers::pi / 4, std::numbers::pi / 2})
    strongest = std::max(strongest, std::abs(qubit_pair_mutual(q, geometry.footprint_radius, 150.0,
                                                               0.0, placement)));
  r.rel("strongest qubit pair M at 150 um", strongest, 31.0, 0.5, " pH");
}

void z_coupling(Recorder& r) {
  const double g = magnetics::z_coupling({31.0, 6.3, 0.1, 100e6}) * 1e-6;
  r.rel("g_z", g, 4.9, 0.10, " MHz");
  r.rel("g_z vs quoted", g, 5.0, 0.10, " MHz");
}

void dynamics_presets(Recorder& r) {
  using namespace dynamics;
  const QubitNoiseParams noise{9.1, 10.0, 100.66e3};
  const ZControlCalibration cal;
  EvolveOptions ev;
  ev.shots = 10000;
  ev.seed = 1;
  PresetOptions p;
  auto run = [&](Preset preset) {
    return sweep([&](double d) { return preset_sequence(preset, d, p); }, preset_delays(preset, p),
                 noise, cal, ev);
  };
  r.rel("T1 fit", extract_decay(run(Preset::t1), DecayModel::exponential).tau_ns * 1e-3, 9.1, 0.02,
        " us");
  r.rel("echo T2 fit", extract_decay(run(Preset::echo), DecayModel::exponential).tau_ns * 1e-3, 10.0,
        0.05, " us");
  r.rel("Ramsey T2* fit",
        extract_decay(run(Preset::ramsey), DecayModel::exponential).tau_ns * 1e-3, 2.0, 0.25, " us");

  const auto z = simulate_z_precession(32.0, 0.0, 500.0, 501, cal, noise, ev);
  r.check(std::abs(z.fringe_dft_hz - 65e6) <= z.bin_hz,
          fmt("Z fringe %.4g MHz (65 MHz within one %.3g MHz bin)", z.fringe_dft_hz * 1e-6,
              z.bin_hz * 1e-6));

  double worst = 0.0;
  constexpr double pi = std::numbers::pi;
  const double inf = std::numeric_limits<double>::infinity();
  for (double sigma : {1e5, 1e6, 1e7}) {
    PulseSequence s;
    s.segments = {rotation(Axis::x, pi / 2, 1e-7)};
    s.idle(5000.0);
    s.segments.push_back(rotation(Axis::x, pi, 1e-7));
    s.idle(5000.0);
    s.segments.push_back(rotation(Axis::x, pi / 2, 1e-7));
    s.readout();
    EvolveOptions few = ev;
    few.shots = 500;
    worst = std::max(worst, std::abs(std::abs(evolve(s, {inf, inf, sigma}, cal, few).sigma_z) - 1.0));
  }
  r.check(worst <= 1e-6, fmt("echo refocusing error %.1e (<=1e-6)", worst));
}

std::string trace_text(const dynamics::Trace& t) {
  std::ostringstream out;
  dynamics::write_trace_csv(out, t);
  return out.str();
}

void determinism(Recorder& r) {
  using namespace dynamics;
  PresetOptions p;
  auto run = [&](Preset preset, std::size_t threads) {
    EvolveOptions ev;
    ev.shots = 3000;
    ev.seed = 123;
    ev.threads = threads;
    ev.readout = Readout::projective;
    p.points = 21;
    return trace_text(sweep([&](double d) { return preset_sequence(preset, d, p); },
                            preset_delays(preset, p), QubitNoiseParams{}, {}, ev));
  };
  bool same = true;
  for (Preset preset : {Preset::t1, Preset::ramsey, Preset::echo, Preset::zpulse}) {
    const std::string one = run(preset, 1);
    same = same && one == run(preset, 1) && one == run(preset, 4) && one == run(preset, 7);
  }
  r.check(same, "seeded traces identical across runs and 1/4/7 threads");

  const loss::TlfModel model;
  const auto a = oracle::tlf_rate_monte_carlo(model, two_pi * 6.85e9, 200'000, 9);
  const auto b = oracle::tlf_rate_monte_carlo(model, two_pi * 6.85e9, 200'000, 9);
  r.check(a.mean == b.mean && a.standard_error == b.standard_error,
          "seeded Monte Carlo oracle identical across runs");
}

}  // namespace

bool CriterionResult::pass() const {
  if (checks.empty()) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string format_line(const CriterionResult& r) {
  std::string line = (r.pass() ? "PASS " : "FAIL ") + fmt("%2.0f  ", r.id) + r.title + ":";
  for (std::size_t i = 0; i < r.checks.size(); ++i) {
    line += (i ? "; " : " ") + std::string(r.checks[i].pass ? "" : "[x] ") + r.checks[i].text;
  }
  for (const auto& s : r.info) line += " | " + s;
  return line;
}

std::vector<CriterionResult> run_acceptance(
    const config::ToolkitConfig& cfg, const std::function<void(const CriterionResult&)>& on_result) {
  struct Entry {
    int id;
    const char* title;
    std::function<void(Recorder&)> body;
  };
  const std::vector<Entry> entries{
      {1, "Purcell single-mode", purcell_single},
      {2, "Purcell inductive", purcell_inductive},
      {3, "Purcell capacitive", purcell_capacitive},
      {4, "Purcell total and reciprocal sum", purcell_total},
      {5, "TLF ensemble integral", tlf},
      {6, "participation-ratio loss", participation},
      {7, "flux conversion", flux_conversion},
      {8, "transmon levels", levels},
      {9, "sweet-spot solve", sweet_spot},
      {10, "flux-spectrum fit", flux_fit},
      {11, "Neumann integrator", [&cfg](Recorder& r) { neumann(r, cfg); }},
      {12, "Z-coupling estimate", z_coupling},
      {13, "pulse dynamics", dynamics_presets},
      {14, "determinism", determinism},
  };
  std::vector<CriterionResult> results;
  for (const auto& e : entries) {
    Recorder rec(e.id, e.title);
    try {
      e.body(rec);
    } catch (const std::exception& ex) {
      rec.check(false, std::string("error: ") + ex.what());
    }
    results.push_back(rec.result());
    if (on_result) on_result(results.back());
  }
  return results;
}

}  // namespace qdesign::verification
