#include "qdesign/config.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <utility>

#include "qdesign/errors.hpp"

namespace qdesign::config {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct UnitTable {
  const char* kind;
  std::vector<std::pair<std::string, double>> units;
};

const UnitTable& table(Quantity q) {
  static const UnitTable frequency{"frequency", {{"Hz", 1}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}}};
  static const UnitTable time{"time", {{"ps", 1e-6}, {"ns", 1e-3}, {"us", 1}, {"μs", 1}, {"ms", 1e3}, {"s", 1e6}}};
  static const UnitTable inductance{"inductance", {{"fH", 1e-3}, {"pH", 1}, {"nH", 1e3}, {"uH", 1e6}}};
  static const UnitTable capacitance{"capacitance", {{"aF", 1e-3}, {"fF", 1}, {"pF", 1e3}, {"nF", 1e6}}};
  static const UnitTable resistance{"resistance", {{"Ohm", 1}, {"ohm", 1}, {"Ω", 1}, {"kOhm", 1e3}}};
  static const UnitTable length{"length", {{"nm", 1e-3}, {"um", 1}, {"μm", 1}, {"mm", 1e3}, {"m", 1e6}}};
  static const UnitTable volume{"volume", {{"nm^3", 1e-27}, {"um^3", 1e-18}, {"μm^3", 1e-18}, {"mm^3", 1e-9}, {"m^3", 1}}};
  static const UnitTable field{"electric field", {{"V/m", 1}, {"mV/m", 1e-3}, {"V/um", 1e6}}};
  static const UnitTable dipole{"dipole moment", {{"eA", 1}, {"e*A", 1}, {"e*Angstrom", 1}, {"D", 0.20819434}}};
  static const UnitTable density{"TLF density", {{"1/(um^3 GHz)", 1}, {"1/(um^3*GHz)", 1}, {"1/(um^3 MHz)", 1e3}}};
  static const UnitTable current{"current", {{"nA", 1e-6}, {"uA", 1e-3}, {"μA", 1e-3}, {"mA", 1}, {"A", 1e3}}};
  static const UnitTable flux{"flux", {{"Phi0", 1}, {"mPhi0", 1e-3}}};
  static const UnitTable angle{"angle", {{"rad", 1}, {"mrad", 1e-3}, {"deg", std::numbers::pi / 180}}};
  static const UnitTable fpc{"frequency per current", {{"MHz/uA", 1}, {"MHz/μA", 1}, {"GHz/mA", 1}, {"MHz/mA", 1e-3}}};
  switch (q) {
    case Quantity::frequency: return frequency;
    case Quantity::time: return time;
    case Quantity::inductance: return inductance;
    case Quantity::capacitance: return capacitance;
    case Quantity::resistance: return resistance;
    case Quantity::length: return length;
    case Quantity::volume: return volume;
    case Quantity::field: return field;
    case Quantity::dipole: return dipole;
    case Quantity::tlf_density: return density;
    case Quantity::current: return current;
    case Quantity::flux: return flux;
    case Quantity::angle: return angle;
    case Quantity::freq_per_current: return fpc;
  }
  return frequency;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Reads keys from one JSON object and rejects the ones never asked for.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void quantity(const std::string& key, Quantity q, double& out, double scale = 1.0) {
    if (const json* v = get(key)) {
      if (!v->is_string())
        throw ConfigError(key_path(key) + ": expected a string with a " + table(q).kind +
                          " unit, e.g. \"1 " + table(q).units.front().first + "\"");
      out = parse_quantity(v->get<std::string>(), q, key_path(key)) * scale;
    }
  }

  void number(const std::string& key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) throw ConfigError(key_path(key) + ": expected a plain number");
      out = v->get<double>();
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out, bool positive) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer() || v->get<long long>() < (positive ? 1 : 0))
        throw ConfigError(key_path(key) + (positive ? ": expected a positive integer"
                                                    : ": expected a non-negative integer"));
      out = static_cast<Int>(v->get<long long>());
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) throw ConfigError(key_path(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }

  std::optional<Block> block(const std::string& key) {
    if (const json* v = get(key)) return Block(*v, key_path(key));
    return std::nullopt;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(key_path(key) + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
void validated(const std::string& path, F&& check) {
  try {
    check();
  } catch (const DomainError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

double parse_quantity(const std::string& text, Quantity q, const std::string& path) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || !std::isfinite(value))
    throw ConfigError(path + ": cannot read a number from \"" + text + "\"");
  const std::string unit = trim(std::string(end));
  const UnitTable& t = table(q);
  if (unit.empty())
    throw ConfigError(path + ": missing " + t.kind + " unit in \"" + text + "\"");
  for (const auto& [name, factor] : t.units) {
    if (unit == name) return value * factor;
  }
  std::string allowed;
  for (const auto& [name, _] : t.units) allowed += (allowed.empty() ? "" : ", ") + name;
  throw ConfigError(path + ": unit '" + unit + "' is not a " + t.kind + " unit (" + allowed + ")");
}

ToolkitConfig::ToolkitConfig() {
  purcell.omega_q = two_pi * 6.85e9;
  purcell.omega_r = two_pi * 8.79e9;
  purcell.q_loaded = 2100;
  purcell.g = 55e6;
  purcell.m_bias_ph = 2.3;
  purcell.l_total_nh = 6.3;
  purcell.c_coupling_ff = 0.1;
  purcell.c_total_ff = circuit.c_total_ff;
  purcell.z0 = 50.0;
}

ToolkitConfig config_from_json(const json& j, const std::string& base_dir) {
  ToolkitConfig c;
  Block root(j, "");
  if (const json* v = root.get("format"); v && *v != "qdesign-config")
    throw ConfigError("format: expected \"qdesign-config\"");
  if (const json* v = root.get("version"); v && *v != 1) throw ConfigError("version: expected 1");

  if (auto b = root.block("circuit")) {
    b->quantity("E_C", Quantity::frequency, c.circuit.e_c, 1e-9);
    b->quantity("E_J0", Quantity::frequency, c.circuit.e_j0, 1e-9);
    b->quantity("E_L", Quantity::frequency, c.circuit.e_l, 1e-9);
    b->number("d", c.circuit.d);
    b->quantity("C_total", Quantity::capacitance, c.circuit.c_total_ff);
    b->number("n_g", c.circuit.n_g);
    b->quantity("flux_offset", Quantity::flux, c.circuit.flux_offset);
    b->finish();
  }
  validated("circuit", [&] {
    for (auto& w : c.circuit.validate()) c.warnings.push_back("circuit: " + w);
  });
  c.purcell.c_total_ff = c.circuit.c_total_ff;

  if (auto b = root.block("purcell")) {
    double f_q = c.purcell.omega_q / two_pi, f_r = c.purcell.omega_r / two_pi;
    b->quantity("f_q", Quantity::frequency, f_q);
    b->quantity("f_r", Quantity::frequency, f_r);
    c.purcell.omega_q = two_pi * f_q;
    c.purcell.omega_r = two_pi * f_r;
    b->number("Q_loaded", c.purcell.q_loaded);
    b->quantity("g", Quantity::frequency, c.purcell.g);
    b->quantity("M_bias", Quantity::inductance, c.purcell.m_bias_ph);
    b->quantity("L_total", Quantity::inductance, c.purcell.l_total_nh, 1e-3);
    b->quantity("C_coupling", Quantity::capacitance, c.purcell.c_coupling_ff);
    b->quantity("Z0", Quantity::resistance, c.purcell.z0);
    b->finish();
  }
  validated("purcell", [&] { c.purcell.validate(); });

  if (auto b = root.block("tlf")) {
    b->quantity("rho0", Quantity::tlf_density, c.tlf.rho0);
    b->quantity("d0", Quantity::dipole, c.tlf.d0);
    b->quantity("E_field", Quantity::field, c.tlf.e_field);
    b->quantity("volume", Quantity::volume, c.tlf.volume);
    b->number("alpha", c.tlf.alpha);
    b->quantity("gamma2", Quantity::frequency, c.tlf.gamma2);
    b->quantity("f_max", Quantity::frequency, c.tlf.omega_tlf_max);
    b->number("p_min", c.tlf.p_min);
    b->quantity("theta_min", Quantity::angle, c.tlf.theta_min);
    b->number("rel_tol", c.tlf.rel_tol);
    b->finish();
  }
  validated("tlf", [&] { c.tlf.validate(); });

  if (auto b = root.block("budget")) {
    b->quantity("radiative_T1", Quantity::time, c.budget.radiative_t1_us);
    if (!(c.budget.radiative_t1_us > 0.0))
      throw ConfigError("budget.radiative_T1: must be positive");
    if (const json* others = b->get("others")) {
      if (!others->is_array()) throw ConfigError("budget.others: expected an array");
      for (std::size_t i = 0; i < others->size(); ++i) {
        const std::string path = "budget.others[" + std::to_string(i) + "]";
        Block o((*others)[i], path);
        std::string name;
        o.string("name", name);
        if (name.empty()) throw ConfigError(path + ".name: required");
        double t1 = 0.0, fill = -1.0, tangent = -1.0;
        o.quantity("T1", Quantity::time, t1);
        o.number("fill_factor", fill);
        o.number("loss_tangent", tangent);
        o.finish();
        double rate = 0.0;
        if (t1 > 0.0 && fill < 0.0 && tangent < 0.0) {
          rate = loss::rate_from_lifetime_us(t1);
        } else if (t1 == 0.0 && fill >= 0.0 && tangent >= 0.0) {
          validated(path, [&] {
            rate = loss::loss_tangent_rate(loss::effective_loss_tangent(fill, tangent),
                                           c.purcell.omega_q);
          });
        } else {
          throw ConfigError(path + ": give either a positive T1 or fill_factor and loss_tangent");
        }
        c.budget.extras.push_back({name, rate});
      }
    }
    b->finish();
  }

  if (auto b = root.block("geometry")) {
    std::string file;
    b->string("file", file);
    b->finish();
    if (!file.empty()) {
      fs::path p(file);
      if (p.is_relative()) p = fs::path(base_dir) / p;
      if (!fs::exists(p)) throw ConfigError("geometry.file: file not found: " + p.string());
      c.geometry_file = fs::absolute(p).lexically_normal().string();
    }
  }

  if (auto b = root.block("coupling")) {
    b->quantity("L_total", Quantity::inductance, c.coupling.l_total_nh, 1e-3);
    b->number("beta", c.coupling.beta);
    b->quantity("g_ref", Quantity::frequency, c.coupling.g_ref_hz);
    b->quantity("separation", Quantity::length, c.coupling.separation_um);
    b->quantity("rotation", Quantity::angle, c.coupling.rotation_rad);
    b->quantity("placement", Quantity::angle, c.coupling.placement_rad);
    b->finish();
    if (!(c.coupling.l_total_nh > 0.0) || !(c.coupling.beta > 0.0) || !(c.coupling.g_ref_hz > 0.0))
      throw ConfigError("coupling: L_total, beta and g_ref must be positive");
    if (!(c.coupling.separation_um > 0.0))
      throw ConfigError("coupling.separation: must be positive");
  }

  if (auto b = root.block("dynamics")) {
    auto& d = c.dynamics;
    b->quantity("T1", Quantity::time, d.noise.t1_us);
    b->quantity("T2", Quantity::time, d.noise.t2_us);
    b->quantity("sigma", Quantity::frequency, d.noise.sigma_hz);
    b->quantity("df_deta", Quantity::freq_per_current, d.calibration.df_deta_mhz_per_ua);
    b->quantity("max_shift", Quantity::frequency, d.calibration.max_shift_mhz, 1e-6);
    b->quantity("pi_pulse", Quantity::time, d.pi_ns, 1e3);
    b->quantity("eta", Quantity::current, d.eta_ua, 1e3);
    b->integer("shots", d.shots, true);
    b->integer("seed", d.seed, false);
    b->integer("threads", d.threads, false);
    std::string readout = "expectation";
    b->string("readout", readout);
    if (readout == "expectation") d.readout = dynamics::Readout::expectation;
    else if (readout == "projective") d.readout = dynamics::Readout::projective;
    else throw ConfigError("dynamics.readout: expected \"expectation\" or \"projective\"");
    b->finish();
    if (!(d.pi_ns > 0.0)) throw ConfigError("dynamics.pi_pulse: must be positive");
  }
  validated("dynamics", [&] {
    c.dynamics.noise.validate();
    c.dynamics.calibration.validate();
  });

  if (auto b = root.block("fit")) {
    b->quantity("M_bias_seed", Quantity::inductance, c.fit.m_bias_seed_ph);
    double anchor = 0.0;
    b->quantity("E_L_anchor", Quantity::frequency, anchor, 1e-9);
    if (anchor != 0.0) c.fit.e_l_anchor = anchor;
    if (auto m = b->block("multiphoton")) {
      fit::MultiphotonSet mp;
      m->quantity("f01", Quantity::frequency, mp.f01, 1e-9);
      m->quantity("f02_half", Quantity::frequency, mp.f02_half, 1e-9);
      m->quantity("f03_third", Quantity::frequency, mp.f03_third, 1e-9);
      m->finish();
      validated("fit.multiphoton", [&] { mp.validate(); });
      c.fit.multiphoton = mp;
    }
    b->finish();
    if (!(c.fit.m_bias_seed_ph > 0.0)) throw ConfigError("fit.M_bias_seed: must be positive");
    if (c.fit.e_l_anchor && !(*c.fit.e_l_anchor > 0.0))
      throw ConfigError("fit.E_L_anchor: must be positive");
  }

  if (auto b = root.block("output")) {
    b->string("directory", c.output.directory);
    b->string("format", c.output.format);
    b->finish();
    if (c.output.format != "csv" && c.output.format != "json")
      throw ConfigError("output.format: expected \"csv\" or \"json\"");
  }

  root.finish();
  return c;
}

ToolkitConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  const fs::path base = fs::absolute(fs::path(path)).parent_path();
  ToolkitConfig c = config_from_json(j, base.string());
  c.source = path;
  return c;
}

ToolkitConfig resolve_config(const std::optional<std::string>& explicit_path) {
  if (explicit_path) return load_config(*explicit_path);
  if (const char* env = std::getenv("QDESIGN_CONFIG"); env && *env) return load_config(env);
  ToolkitConfig c;
  for (auto& w : c.circuit.validate()) c.warnings.push_back("circuit: " + w);
  return c;
}

}  // namespace qdesign::config
