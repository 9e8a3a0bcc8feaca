// qdesign command-line front end.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "qdesign/circuit_model.hpp"
#include "qdesign/config.hpp"
#include "qdesign/dynamics.hpp"
#include "qdesign/errors.hpp"
#include "qdesign/geometry_io.hpp"
#include "qdesign/loss_budget.hpp"
#include "qdesign/magnetics.hpp"
#include "qdesign/reports.hpp"
#include "qdesign/spectro_fit.hpp"
#include "qdesign/spectroscopy_csv.hpp"
#include "qdesign/verification/acceptance.hpp"

namespace {

using namespace qdesign;
using reports::Json;
using reports::Report;
namespace fs = std::filesystem;

constexpr double two_pi = 2.0 * std::numbers::pi;

enum Exit { ok = 0, failed = 1, config_error = 2, numeric_error = 3, io_error = 4 };

struct Global {
  std::optional<std::string> config_path;
  bool json = false;

  config::ToolkitConfig load() const {
    auto cfg = config::resolve_config(config_path);
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
    return cfg;
  }
};

void emit(const Report& r, const Global& g) { std::cout << reports::render(r, g.json); }

magnetics::GeometrySet geometry_of(const config::ToolkitConfig& cfg) {
  return cfg.geometry_file.empty() ? magnetics::reference_geometry()
                                   : magnetics::read_geometry(cfg.geometry_file);
}

// levels ---------------------------------------------------------------

struct LevelsArgs {
  std::optional<double> flux, bias;
  bool numeric = false, perturbative = false;
  std::size_t count = 3;
  circuit::DiagonalizeOptions diag;
};

int cmd_levels(const Global& g, const LevelsArgs& a) {
  const auto cfg = g.load();
  const auto& p = cfg.circuit;
  double flux = p.flux_offset;
  if (a.flux) flux = *a.flux;
  if (a.bias) flux = circuit::bias_to_flux(p, cfg.purcell.m_bias_ph, *a.bias);
  const bool both = a.numeric == a.perturbative;
  const double ej = circuit::ej_of_flux(p, flux);

  Report r;
  r.name = "levels";
  r.summary["flux_Phi0"] = flux;
  if (a.bias) r.summary["bias_mA"] = *a.bias;
  r.summary["E_J_GHz"] = ej;
  r.summary["E_J_over_E_C"] = ej / p.e_c;
  std::optional<circuit::LevelSpectrum> pert, num;
  if (both || a.perturbative) {
    pert = circuit::transmon_levels(p, ej, a.count);
    r.summary["E01_GHz_perturbative"] = pert->energies[0];
    r.summary["anharmonicity_MHz_perturbative"] = pert->anharmonicity_abs * 1e3;
    r.summary["anharmonicity_rel_perturbative"] = pert->anharmonicity_rel;
  }
  if (both || a.numeric) {
    num = circuit::diagonalize(p, ej, a.count, a.diag);
    r.summary["E01_GHz_numeric"] = num->energies[0];
    r.summary["anharmonicity_MHz_numeric"] = num->anharmonicity_abs * 1e3;
    r.summary["anharmonicity_rel_numeric"] = num->anharmonicity_rel;
    r.summary["basis_size"] = num->basis_size;
  }
  for (std::size_t m = 1; m <= a.count; ++m) {
    Json row;
    row["m"] = m;
    if (pert) row["E0m_GHz_perturbative"] = pert->energies[m - 1];
    if (num) row["E0m_GHz_numeric"] = num->energies[m - 1];
    if (pert && num) row["difference_percent"] = 100.0 * (num->energies[m - 1] / pert->energies[m - 1] - 1.0);
    r.add_row(std::move(row));
  }
  emit(r, g);
  return ok;
}

// loss -----------------------------------------------------------------

struct LossArgs {
  std::string channel = "all";
  bool sweet_spot = false;
};

int cmd_loss(const Global& g, const LossArgs& a) {
  const auto cfg = g.load();
  auto in = cfg.purcell;
  if (a.sweet_spot) {
    const double f01 = circuit::transmon_levels(cfg.circuit, cfg.circuit.e_j0).energies[0];
    in.omega_q = two_pi * f01 * 1e9;
  }
  const auto b = loss::budget(in, cfg.tlf, loss::rate_from_lifetime_us(cfg.budget.radiative_t1_us),
                              cfg.budget.extras);
  static const std::map<std::string, std::string> keys{
      {"all", ""}, {"sm", "purcell_single_mode"}, {"ind", "purcell_inductive"},
      {"cap", "purcell_capacitive"}, {"purcell", "purcell_total"}, {"tlf", "tlf"},
      {"rad", "radiative"}, {"sum", "gamma_sigma"}};
  Report r = reports::budget_report(b, in.omega_q, keys.at(a.channel));
  r.summary["operating_point"] = a.sweet_spot ? "sweet spot" : "configured";
  r.summary["detuning_GHz"] = in.detuning() / two_pi * 1e-9;
  if (a.sweet_spot)
    r.notes.push_back("qubit frequency taken from the level formula at E_J0; other channels recomputed there");
  emit(r, g);
  return ok;
}

// fit ------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string mode = "flux";
  std::vector<double> multiphoton;
  bool free_el = false;
  bool critical_current = false;
};

fit::MultiphotonSet multiphoton_of(const config::ToolkitConfig& cfg, const FitArgs& a) {
  if (!a.multiphoton.empty()) {
    if (a.multiphoton.size() != 3) throw ConfigError("--multiphoton: expected three frequencies in GHz");
    fit::MultiphotonSet mp{a.multiphoton[0], a.multiphoton[1], a.multiphoton[2]};
    mp.validate();
    return mp;
  }
  if (!cfg.fit.multiphoton) throw ConfigError("fit.multiphoton: required for this mode");
  return *cfg.fit.multiphoton;
}

void add_sweet_spot(Report& r, const fit::SweetSpotSolution& s) {
  r.summary["E_C_GHz"] = s.e_c;
  r.summary["E_J_GHz"] = s.e_j;
  r.summary["E_L_GHz"] = s.e_l;
  r.summary["E_L_fixed"] = s.e_l_fixed;
  r.summary["I_c_nA"] = circuit::units::critical_current_from_ej(s.e_j);
  r.summary["max_residual_MHz"] = s.max_residual * 1e3;
  r.summary["exact"] = s.exact;
  const char* names[] = {"f01", "f02/2", "f03/3"};
  for (int k = 0; k < 3; ++k) {
    Json row;
    row["line"] = names[k];
    row["residual_MHz"] = s.residuals[k] * 1e3;
    r.add_row(std::move(row));
  }
}

void add_flux(Report& r, const fit::FitResult& f) {
  r.summary["residual_rms_MHz"] = f.residual_rms * 1e3;
  r.summary["iterations"] = f.iterations;
  r.summary["converged"] = f.converged;
  r.summary["d_at_bound"] = f.d_at_bound;
  r.summary["period_mA"] = circuit::current_period_ma(f.m_bias_ph);
  const double values[] = {f.params.e_j0, f.params.d, f.m_bias_ph, f.params.flux_offset,
                           f.params.e_c, f.params.e_l};
  const char* units[] = {"GHz", "", "pH", "Phi0", "GHz", "GHz"};
  for (std::size_t k = 0; k < fit::fit_param_count; ++k) {
    const auto p = static_cast<fit::FitParam>(k);
    Json row;
    row["parameter"] = fit::fit_param_name(p);
    row["value"] = values[k];
    row["std_error"] = f.std_errors[k] ? Json(*f.std_errors[k]) : Json(nullptr);
    row["unit"] = units[k];
    row["frozen"] = f.frozen.is_frozen(p);
    r.add_row(std::move(row));
  }
}

int cmd_fit(const Global& g, const FitArgs& a) {
  const auto cfg = g.load();
  Report r;
  r.name = "fit (" + a.mode + ")";
  r.summary["mode"] = a.mode;
  if (a.mode == "sweetspot") {
    const auto mp = multiphoton_of(cfg, a);
    fit::SweetSpotOptions opt;
    opt.e_j_seed = cfg.circuit.e_j0;
    opt.e_l_seed = cfg.circuit.e_l;
    opt.least_squares = true;
    std::optional<double> anchor;
    if (!a.free_el) anchor = cfg.fit.e_l_anchor;
    add_sweet_spot(r, fit::solve_sweet_spot(mp, cfg.circuit.e_c, anchor, opt));
    emit(r, g);
    return ok;
  }
  if (a.data.empty()) throw ConfigError("fit: a spectroscopy CSV is required for mode " + a.mode);
  const auto data = fit::ingest_csv(a.data);
  fit::FluxFitSeed seed;
  seed.params = cfg.circuit;
  seed.m_bias_ph = cfg.fit.m_bias_seed_ph;
  if (a.mode == "flux") {
    fit::FrozenMask mask;
    if (a.free_el) mask.set(fit::FitParam::e_l, false);
    fit::FluxFitOptions opt;
    opt.critical_current_coordinates = a.critical_current;
    const auto f = fit::fit_flux_spectrum(data, seed, mask, opt);
    add_flux(r, f);
    emit(r, g);
    return f.converged ? ok : numeric_error;
  }
  const auto joint = fit::fit_joint(multiphoton_of(cfg, a), data, seed);
  r.summary["rounds"] = joint.rounds;
  r.summary["joint_converged"] = joint.converged;
  r.summary["sweet_spot_E_J_GHz"] = joint.sweet_spot.e_j;
  add_flux(r, joint.flux);
  emit(r, g);
  return joint.converged ? ok : numeric_error;
}

// coupling -------------------------------------------------------------

struct CouplingArgs {
  std::optional<double> separation, rotation, placement;
};

int cmd_coupling(const Global& g, const CouplingArgs& a) {
  const auto cfg = g.load();
  const auto geometry = geometry_of(cfg);
  const auto q = geometry.qubit();
  const double gap = a.separation.value_or(cfg.coupling.separation_um);
  const double rotation = a.rotation.value_or(cfg.coupling.rotation_rad);
  const double placement = a.placement.value_or(cfg.coupling.placement_rad);
  const double m_ij = magnetics::qubit_pair_mutual(q, geometry.footprint_radius, gap, rotation, placement);
  const double m_bias = magnetics::gradiometric_mutual(q, geometry.bias_line());
  magnetics::CouplingEstimate est{std::abs(m_ij), cfg.coupling.l_total_nh, cfg.coupling.beta,
                                  cfg.coupling.g_ref_hz};
  Report r;
  r.name = "coupling";
  r.summary["separation_um"] = gap;
  r.summary["center_distance_um"] = 2.0 * geometry.footprint_radius + gap;
  r.summary["rotation_rad"] = rotation;
  r.summary["placement_rad"] = placement;
  r.summary["M_ij_pH"] = m_ij;
  r.summary["g_z_MHz"] = magnetics::z_coupling(est) * 1e-6;
  r.summary["M_bias_pH"] = m_bias;
  r.summary["mA_per_Phi0"] = magnetics::flux_per_current(std::abs(m_bias));
  emit(r, g);
  return ok;
}

// simulate -------------------------------------------------------------

struct SimulateArgs {
  std::string preset;
  std::string sequence;
  std::optional<std::size_t> shots, threads, points;
  std::optional<std::uint64_t> seed;
  std::optional<double> eta, max_delay;
  std::string output;
};

void write_trace(const dynamics::Trace& t, const std::string& path, const std::string& format) {
  std::ostringstream text;
  if (format == "json") {
    Json j;
    j["time_ns"] = t.time_ns;
    j["sigma_z"] = t.sigma_z;
    text << j.dump(1) << "\n";
  } else {
    dynamics::write_trace_csv(text, t);
  }
  if (path == "-") {
    std::cout << text.str();
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path() && !fs::exists(p.parent_path()))
    throw IoError("output directory does not exist: " + p.parent_path().string());
  std::ofstream out(p, std::ios::binary);
  out << text.str();
  if (!out) throw IoError("cannot write " + path);
}

int cmd_simulate(const Global& g, const SimulateArgs& a) {
  const auto cfg = g.load();
  const auto& d = cfg.dynamics;
  dynamics::EvolveOptions ev;
  ev.shots = a.shots.value_or(d.shots);
  ev.seed = a.seed.value_or(d.seed);
  ev.threads = a.threads.value_or(d.threads);
  ev.readout = d.readout;
  if (ev.shots == 0) throw DomainError("--shots must be positive");

  Report r;
  r.name = "simulate";
  r.summary["shots"] = ev.shots;
  r.summary["seed"] = ev.seed;
  dynamics::Trace trace;
  std::string stem;

  if (!a.sequence.empty()) {
    std::ifstream in(a.sequence);
    if (!in) throw IoError("cannot open sequence file " + a.sequence);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(a.sequence + ": invalid JSON: " + e.what());
    }
    const auto seq = dynamics::sequence_from_json(j);
    seq.validate(d.calibration);
    // <sigma_z> after each segment: evolve every prefix.
    double t = 0.0;
    dynamics::PulseSequence prefix;
    prefix.readout();
    trace.time_ns.push_back(0.0);
    trace.sigma_z.push_back(dynamics::evolve(prefix, d.noise, d.calibration, ev).sigma_z);
    for (std::size_t i = 0; i + 1 < seq.segments.size(); ++i) {
      prefix.segments.insert(prefix.segments.end() - 1, seq.segments[i]);
      t += seq.segments[i].duration_ns;
      trace.time_ns.push_back(t);
      trace.sigma_z.push_back(dynamics::evolve(prefix, d.noise, d.calibration, ev).sigma_z);
    }
    r.summary["sequence"] = a.sequence;
    r.summary["sigma_z_final"] = trace.sigma_z.back();
    stem = fs::path(a.sequence).stem().string();
  } else {
    const auto preset = dynamics::preset_from_name(a.preset);
    dynamics::PresetOptions po;
    po.pi_ns = d.pi_ns;
    po.eta_ua = a.eta.value_or(d.eta_ua);
    po.points = a.points.value_or(0);
    po.max_delay_ns = a.max_delay.value_or(0.0);
    r.summary["preset"] = a.preset;
    if (preset == dynamics::Preset::zpulse) {
      const auto delays = dynamics::preset_delays(preset, po);
      const auto z = dynamics::simulate_z_precession(po.eta_ua, delays.front(), delays.back(),
                                                     delays.size(), d.calibration, d.noise, ev, po.pi_ns);
      trace = z.trace;
      r.summary["eta_uA"] = po.eta_ua;
      r.summary["expected_MHz"] = d.calibration.df_deta_mhz_per_ua * po.eta_ua;
      r.summary["fringe_MHz"] = z.fringe_dft_hz * 1e-6;
      r.summary["fft_bin_MHz"] = z.bin_hz * 1e-6;
      r.summary["fringe_fit_MHz"] = z.fit ? Json(z.fit->frequency_hz * 1e-6) : Json(nullptr);
    } else {
      trace = dynamics::sweep([&](double t) { return dynamics::preset_sequence(preset, t, po); },
                              dynamics::preset_delays(preset, po), d.noise, d.calibration, ev);
      const char* key = preset == dynamics::Preset::t1       ? "T1_fit_us"
                        : preset == dynamics::Preset::echo   ? "T2_fit_us"
                                                             : "T2star_fit_us";
      try {
        const auto f = dynamics::extract_decay(trace, dynamics::DecayModel::exponential);
        r.summary[key] = f.tau_ns * 1e-3;
        r.summary[std::string(key) + "_se"] = f.tau_se_ns * 1e-3;
      } catch (const dynamics::NoDecayError& e) {
        r.summary[key] = nullptr;
        r.notes.push_back(e.what());
      }
    }
    stem = a.preset;
  }

  std::string path = a.output;
  if (path.empty())
    path = (fs::path(cfg.output.directory) / (stem + "_trace." + cfg.output.format)).string();
  write_trace(trace, path, cfg.output.format);
  r.summary["points"] = trace.time_ns.size();
  r.summary["trace"] = path;
  if (path != "-") emit(r, g);
  return ok;
}

// geometry -------------------------------------------------------------

struct GeometryArgs {
  std::string write;
  bool reference = false;
};

int cmd_geometry(const Global& g, const GeometryArgs& a) {
  magnetics::GeometrySet geometry;
  if (a.reference || !a.write.empty()) {
    geometry = magnetics::reference_geometry();
  } else {
    geometry = geometry_of(g.load());
  }
  if (!a.write.empty()) {
    magnetics::write_geometry(a.write, geometry);
  }
  Report r;
  r.name = "geometry";
  r.summary["footprint_radius_um"] = geometry.footprint_radius;
  if (!a.write.empty()) r.summary["written"] = a.write;
  for (const auto& p : geometry.polylines) {
    Json row;
    row["name"] = p.name;
    row["segments"] = p.polyline.segment_count();
    row["length_um"] = p.polyline.length();
    row["closed"] = p.polyline.closed;
    row["winding"] = p.winding;
    r.add_row(std::move(row));
  }
  r.summary["M_bias_pH"] = magnetics::gradiometric_mutual(geometry.qubit(), geometry.bias_line());
  emit(r, g);
  return ok;
}

// reproduce-paper ------------------------------------------------------

int cmd_reproduce(const Global& g) {
  const auto cfg = g.load();
  Report r;
  r.name = "acceptance";
  int failures = 0;
  verification::run_acceptance(cfg, [&](const verification::CriterionResult& c) {
    if (!c.pass()) ++failures;
    if (!g.json) {
      std::cout << verification::format_line(c) << "\n" << std::flush;
      return;
    }
    Json row;
    row["criterion"] = c.id;
    row["title"] = c.title;
    row["pass"] = c.pass();
    Json checks = Json::array();
    for (const auto& k : c.checks) checks.push_back({{"pass", k.pass}, {"detail", k.text}});
    row["checks"] = checks;
    row["info"] = c.info;
    r.add_row(std::move(row));
  });
  r.summary["criteria"] = 14;
  r.summary["failed"] = failures;
  if (g.json) emit(r, g);
  else std::cout << failures << " of 14 criteria failed\n";
  return failures == 0 ? ok : failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design and analysis toolkit for flux-tunable concentric transmons"};
  app.require_subcommand(1);
  app.fallthrough();
  Global global;
  app.add_option("-c,--config", global.config_path, "Config file (default: $QDESIGN_CONFIG, else built-in defaults)");
  app.add_flag("--json", global.json, "Print reports as JSON");

  std::function<int()> run;

  LevelsArgs levels;
  auto* c_levels = app.add_subcommand("levels", "Transmon levels at a flux or bias point");
  auto* o_flux = c_levels->add_option("--flux", levels.flux, "Total loop flux in Phi0");
  auto* o_bias = c_levels->add_option("--bias", levels.bias, "Bias current in mA");
  o_flux->excludes(o_bias);
  c_levels->add_flag("--numeric", levels.numeric, "Numeric diagonalization");
  c_levels->add_flag("--perturbative", levels.perturbative, "Closed-form level formula");
  c_levels->add_option("--count", levels.count, "Number of excited levels")->check(CLI::Range(2, 10));
  c_levels->add_option("--max-basis", levels.diag.max_basis_size, "Largest oscillator basis")
      ->check(CLI::Range(6, 4000));
  c_levels->callback([&] { run = [&] { return cmd_levels(global, levels); }; });

  LossArgs loss_args;
  auto* c_loss = app.add_subcommand("loss", "Relaxation budget");
  c_loss->add_option("--channel", loss_args.channel, "Single channel")
      ->check(CLI::IsMember({"all", "sm", "ind", "cap", "purcell", "tlf", "rad", "sum"}));
  c_loss->add_flag("--sweet-spot", loss_args.sweet_spot, "Evaluate at the flux sweet spot");
  c_loss->callback([&] { run = [&] { return cmd_loss(global, loss_args); }; });

  FitArgs fit_args;
  auto* c_fit = app.add_subcommand("fit", "Extract circuit parameters from spectroscopy");
  c_fit->add_option("data", fit_args.data, "Spectroscopy CSV (bias_mA,freq_GHz[,weight][,m])");
  c_fit->add_option("--mode", fit_args.mode, "sweetspot | flux | joint")
      ->check(CLI::IsMember({"sweetspot", "flux", "joint"}));
  c_fit->add_option("--multiphoton", fit_args.multiphoton, "f01 f02/2 f03/3 in GHz")->expected(3);
  c_fit->add_flag("--free-el", fit_args.free_el, "Fit E_L instead of anchoring it");
  c_fit->add_flag("--ic", fit_args.critical_current, "Fit the total critical current instead of E_J0");
  c_fit->callback([&] { run = [&] { return cmd_fit(global, fit_args); }; });

  CouplingArgs coupling_args;
  auto* c_coupling = app.add_subcommand("coupling", "Geometric coupling between two qubits");
  c_coupling->add_option("--separation", coupling_args.separation, "Gap between outer rings in um")
      ->check(CLI::PositiveNumber);
  c_coupling->add_option("--rotation", coupling_args.rotation, "Rotation of the second qubit in rad");
  c_coupling->add_option("--placement", coupling_args.placement,
                         "Angle of the junction axes against the center line in rad");
  c_coupling->callback([&] { run = [&] { return cmd_coupling(global, coupling_args); }; });

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Bloch-equation pulse experiments");
  auto* o_preset = c_sim->add_option("--preset", sim.preset, "t1 | ramsey | echo | zpulse")
                       ->check(CLI::IsMember({"t1", "ramsey", "echo", "zpulse"}));
  auto* o_seq = c_sim->add_option("--sequence", sim.sequence, "Pulse sequence JSON file");
  o_preset->excludes(o_seq);
  c_sim->add_option("--shots", sim.shots, "Shots per point");
  c_sim->add_option("--seed", sim.seed, "Master seed");
  c_sim->add_option("--threads", sim.threads, "Worker threads (0: all cores)");
  c_sim->add_option("--eta", sim.eta, "Z-pulse amplitude in uA");
  c_sim->add_option("--points", sim.points, "Delay points")->check(CLI::Range(8, 100000));
  c_sim->add_option("--max-delay", sim.max_delay, "Longest delay in ns")->check(CLI::PositiveNumber);
  c_sim->add_option("-o,--output", sim.output, "Trace file ('-' for stdout)");
  c_sim->callback([&] {
    if (sim.preset.empty() && sim.sequence.empty()) throw CLI::RequiredError("--preset or --sequence");
    run = [&] { return cmd_simulate(global, sim); };
  });

  GeometryArgs geometry_args;
  auto* c_geometry = app.add_subcommand("geometry", "Show the configured wire geometry");
  c_geometry->add_option("--write", geometry_args.write, "Write the reference geometry to a file");
  c_geometry->add_flag("--reference", geometry_args.reference, "Use the built-in reference geometry");
  c_geometry->callback([&] { run = [&] { return cmd_geometry(global, geometry_args); }; });

  auto* c_reproduce = app.add_subcommand("reproduce-paper", "Run the acceptance criteria");
  c_reproduce->callback([&] { run = [&] { return cmd_reproduce(global); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    return run();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return config_error;
  } catch (const GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return config_error;
  } catch (const ConvergenceError& e) {
    std::cerr << "did not converge: " << e.what() << " (residual " << e.residual() << ")\n";
    return numeric_error;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what();
    if (!e.lines().empty()) {
      std::cerr << " (lines";
      for (auto l : e.lines()) std::cerr << " " << l;
      std::cerr << ")";
    }
    std::cerr << "\n";
    return io_error;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return io_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return failed;
  }
}
