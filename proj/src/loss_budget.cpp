#include "qdesign/loss_budget.hpp"

#include <cmath>
#include <limits>

#include "qdesign/constants.hpp"
#include "qdesign/errors.hpp"
#include "qdesign/quadrature.hpp"

namespace qdesign::loss {

using namespace qdesign::constants;

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw DomainError(message);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

}  // namespace

void PurcellInputs::validate() const {
  require(std::isfinite(omega_q) && omega_q > 0.0, "purcell: omega_q must be positive");
  require(std::isfinite(omega_r) && omega_r > 0.0, "purcell: omega_r must be positive");
  require(q_loaded > 0.0, "purcell: q_loaded must be positive");
  require(finite_nonneg(g), "purcell: g must be non-negative");
  require(finite_nonneg(m_bias_ph), "purcell: m_bias must be non-negative");
  require(l_total_nh > 0.0, "purcell: l_total must be positive");
  require(finite_nonneg(c_coupling_ff), "purcell: c_coupling must be non-negative");
  require(c_total_ff > 0.0, "purcell: c_total must be positive");
  require(z0 > 0.0, "purcell: z0 must be positive");
}

double PurcellInputs::detuning() const { return std::abs(omega_q - omega_r); }

double purcell_single_mode(const PurcellInputs& in) {
  in.validate();
  const double delta = in.detuning();
  require(delta > 0.0, "purcell_single_mode: zero qubit-resonator detuning");
  const double kappa = in.omega_r / in.q_loaded;
  const double ratio = two_pi * in.g / delta;
  return kappa * ratio * ratio;
}

double purcell_inductive(const PurcellInputs& in) {
  in.validate();
  const double m = in.m_bias_ph * 1e-12;
  return in.omega_q * in.omega_q * m * m / (in.l_total_nh * 1e-9 * in.z0);
}

double purcell_capacitive(const PurcellInputs& in) {
  in.validate();
  const double cc = in.c_coupling_ff * 1e-15;
  return in.omega_q * in.omega_q * cc * cc * in.z0 / (in.c_total_ff * 1e-15);
}

void TlfModel::validate() const {
  require(finite_nonneg(rho0), "tlf: rho0 must be non-negative");
  require(finite_nonneg(d0), "tlf: d0 must be non-negative");
  require(finite_nonneg(e_field), "tlf: e_field must be non-negative");
  require(finite_nonneg(volume), "tlf: volume must be non-negative");
  require(alpha > 0.0 && std::isfinite(alpha), "tlf: alpha must be positive");
  require(gamma2 > 0.0, "tlf: gamma2 must be positive");
  require(omega_tlf_max > 0.0, "tlf: omega_tlf_max must be positive");
  require(p_min > 0.0 && p_min < 1.0, "tlf: p_min must lie in (0, 1)");
  require(theta_min > 0.0 && theta_min < pi / 2, "tlf: theta_min must lie in (0, pi/2)");
  require(rel_tol > 0.0, "tlf: rel_tol must be positive");
}

double TlfModel::defect_count() const {
  // rho0 per um^3 per GHz; V in m^3; the cutoff as an ordinary frequency.
  return rho0 * (volume * 1e18) * (omega_tlf_max * 1e-9);
}

double TlfModel::dipole_normalization() const {
  const double s = std::sqrt(1.0 - p_min * p_min);
  return 1.0 / (std::log((1.0 + s) / p_min) - s);
}

double TlfModel::frequency_normalization() const {
  const double w_max = two_pi * omega_tlf_max;
  return (alpha + 1.0) / std::pow(w_max, alpha + 1.0);
}

double TlfModel::angle_normalization() const {
  const double a = alpha;
  auto f = [a](double t) { return std::pow(std::cos(t), a) / std::sin(t); };
  const double lo = theta_min;
  const double edges[] = {std::min(2.0 * lo, 0.5 * (lo + pi / 2)), 1.0};
  numeric::QuadratureOptions opt{.rel_tol = 1e-12};
  return 1.0 / numeric::integrate(f, lo, pi / 2, opt, edges).value;
}

double tlf_rate(const TlfModel& model, double omega_q) {
  model.validate();
  require(omega_q > 0.0, "tlf_rate: omega_q must be positive");
  if (model.rho0 == 0.0 || model.d0 == 0.0 || model.e_field == 0.0 ||
      model.volume == 0.0)
    return 0.0;

  const double a_p = model.dipole_normalization();
  const double b_w = model.frequency_normalization();
  const double b_t = model.angle_normalization();
  const double alpha = model.alpha;
  const double gamma = two_pi * model.gamma2;
  const double w_max = two_pi * model.omega_tlf_max;
  // Coupling strength of the largest dipole, rad/s.
  const double coupling =
      model.d0 * elementary_charge * angstrom * model.e_field / hbar;

  // Inner tolerances are tighter so their error does not leak outward.
  const numeric::QuadratureOptions outer{.rel_tol = model.rel_tol};
  const numeric::QuadratureOptions middle{.rel_tol = model.rel_tol * 1e-2,
                                          .max_intervals = 8000};
  const numeric::QuadratureOptions inner{.rel_tol = model.rel_tol * 1e-4};

  std::vector<double> omega_cuts;
  for (double k : {-100.0, -10.0, -1.0, 0.0, 1.0, 10.0, 100.0})
    omega_cuts.push_back(omega_q + k * gamma);
  const double theta_cuts[] = {std::min(2.0 * model.theta_min,
                                        0.5 * (model.theta_min + pi / 2))};

  auto theta_integral = [&](double omega, double p) {
    const double lorentz = gamma / (gamma * gamma + (omega - omega_q) * (omega - omega_q));
    const double prefactor = p * p * coupling * coupling * b_w *
                             std::pow(omega, alpha) * b_t * lorentz;
    auto f = [&](double t) {
      const double s = std::sin(t);
      return std::pow(std::cos(t), alpha) / s * s * s;
    };
    return prefactor *
           numeric::integrate(f, model.theta_min, pi / 2, inner, theta_cuts).value;
  };
  auto omega_integral = [&](double p) {
    auto f = [&](double w) { return theta_integral(w, p); };
    return numeric::integrate(f, 0.0, w_max, middle, omega_cuts).value;
  };
  auto p_integrand = [&](double p) {
    return a_p * std::sqrt(1.0 - p * p) / p * omega_integral(p);
  };
  const double p_cuts[] = {std::sqrt(model.p_min), 0.5, 0.99};
  const double total =
      numeric::integrate(p_integrand, model.p_min, 1.0, outer, p_cuts).value;
  return model.defect_count() * total;
}

double effective_loss_tangent(double fill_factor, double material_tangent) {
  require(finite_nonneg(fill_factor) && fill_factor <= 1.0,
          "loss tangent: fill factor must lie in [0, 1]");
  require(finite_nonneg(material_tangent), "loss tangent: tangent must be non-negative");
  return fill_factor * material_tangent;
}

double loss_tangent_rate(double delta_eff, double omega_q) {
  require(finite_nonneg(delta_eff), "loss tangent: delta_eff must be non-negative");
  require(omega_q > 0.0, "loss tangent: omega_q must be positive");
  return delta_eff * omega_q;
}

double lifetime_us(double rate) {
  return rate > 0.0 ? 1e6 / rate : std::numeric_limits<double>::infinity();
}

double rate_from_lifetime_us(double t_us) {
  require(t_us > 0.0, "lifetime must be positive");
  return std::isinf(t_us) ? 0.0 : 1e6 / t_us;
}

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  const double scale =
      std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::abs(value)))));
  return std::round(value * scale) / scale;
}

std::optional<double> LossBudget::purcell_total() const {
  std::optional<double> total;
  for (const auto& r : {purcell_single_mode, purcell_inductive, purcell_capacitive})
    if (r) total = total.value_or(0.0) + *r;
  return total;
}

double LossBudget::gamma_sigma() const {
  double total = purcell_total().value_or(0.0);
  if (tlf) total += *tlf;
  if (radiative) total += *radiative;
  for (const auto& x : other) total += x.rate;
  return total;
}

std::vector<BudgetRow> LossBudget::rows() const {
  std::vector<BudgetRow> out;
  auto add = [&out](const std::string& key, const std::string& label, double rate) {
    out.push_back({key, label, rate, lifetime_us(rate)});
  };
  if (purcell_single_mode) add("purcell_single_mode", "Purcell single mode", *purcell_single_mode);
  if (purcell_inductive) add("purcell_inductive", "Purcell inductive", *purcell_inductive);
  if (purcell_capacitive) add("purcell_capacitive", "Purcell capacitive", *purcell_capacitive);
  if (auto total = purcell_total()) add("purcell_total", "Purcell total", *total);
  if (tlf) add("tlf", "TLF ensemble", *tlf);
  if (radiative) add("radiative", "Radiation", *radiative);
  for (const auto& x : other) add(x.name, x.name, x.rate);
  add("gamma_sigma", "Reciprocal sum", gamma_sigma());
  return out;
}

LossBudget budget(const PurcellInputs& in, const TlfModel& model,
                  double radiative_rate, const std::vector<NamedRate>& extras) {
  require(finite_nonneg(radiative_rate), "budget: radiative rate must be non-negative");
  LossBudget b;
  b.purcell_single_mode = purcell_single_mode(in);
  b.purcell_inductive = purcell_inductive(in);
  b.purcell_capacitive = purcell_capacitive(in);
  b.tlf = tlf_rate(model, in.omega_q);
  b.radiative = radiative_rate;
  for (const auto& x : extras) {
    require(finite_nonneg(x.rate), "budget: extra rates must be non-negative");
    b.other.push_back(x);
  }
  return b;
}

}  // namespace qdesign::loss
