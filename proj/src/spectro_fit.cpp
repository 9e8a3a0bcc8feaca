#include "qdesign/spectro_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qdesign/constants.hpp"
#include "qdesign/errors.hpp"

namespace qdesign::fit {

using circuit::CircuitParams;
using circuit::level_energy;
using namespace qdesign::constants;

namespace {

constexpr double d_max = 0.99;

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

void MultiphotonSet::validate() const {
  if (!(std::isfinite(f01) && std::isfinite(f02_half) && std::isfinite(f03_third)) ||
      !(f03_third > 0.0))
    throw DomainError("multiphoton: frequencies must be finite and positive");
  if (!(f01 > f02_half && f02_half > f03_third))
    throw DomainError(
        "multiphoton: need f01 > f02/2 > f03/3; without anharmonicity E_J is "
        "indeterminate");
}

MultiphotonSet multiphoton_from_energies(double e_c, double e_j, double e_l) {
  const auto eff = circuit::effective_energies(e_j, e_l);
  return {level_energy(e_c, eff.ej_tilde, eff.el_tilde, 1),
          level_energy(e_c, eff.ej_tilde, eff.el_tilde, 2) / 2.0,
          level_energy(e_c, eff.ej_tilde, eff.el_tilde, 3) / 3.0};
}

SweetSpotSolution solve_sweet_spot(const MultiphotonSet& mp, double e_c,
                                   std::optional<double> e_l_fixed,
                                   const SweetSpotOptions& options) {
  mp.validate();
  if (!(e_c > 0.0)) throw DomainError("sweet spot: E_C must be positive");
  if (e_l_fixed && !(*e_l_fixed > 0.0))
    throw DomainError("sweet spot: fixed E_L must be positive");
  const std::array<double, 3> target{mp.f01, mp.f02_half, mp.f03_third};

  // Log coordinates keep both energies positive.
  auto unpack = [&](const Eigen::VectorXd& x) {
    const double e_j = std::exp(x(0));
    const double e_l = e_l_fixed ? *e_l_fixed : std::exp(x(1));
    return std::pair{e_j, e_l};
  };
  numeric::LeastSquaresProblem prob;
  prob.residual_count = 3;
  prob.residuals = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    r.resize(3);
    const auto [e_j, e_l] = unpack(x);
    const auto eff = circuit::effective_energies(e_j, e_l);
    for (int m = 1; m <= 3; ++m)
      r(m - 1) = level_energy(e_c, eff.ej_tilde, eff.el_tilde, m) / m - target[m - 1];
  };
  Eigen::VectorXd x0(e_l_fixed ? 1 : 2);
  x0(0) = std::log(options.e_j_seed);
  if (!e_l_fixed) x0(1) = std::log(options.e_l_seed);

  numeric::LmOptions lm;
  lm.max_iterations = options.max_iterations;
  lm.gradient_tol = 1e-15;
  lm.cost_tol = 1e-18;
  lm.step_tol = 1e-15;
  const auto res = numeric::levenberg_marquardt(prob, x0, lm);

  SweetSpotSolution out;
  out.e_c = e_c;
  std::tie(out.e_j, out.e_l) = unpack(res.x);
  out.e_l_fixed = e_l_fixed.has_value();
  for (int k = 0; k < 3; ++k) {
    out.residuals[k] = res.residuals(k);
    out.max_residual = std::max(out.max_residual, std::abs(res.residuals(k)));
  }
  out.exact = out.max_residual < options.tolerance;
  out.iterations = res.iterations;

  std::ostringstream msg;
  msg << "sweet spot: ";
  if (res.jacobian_rank < res.x.size()) {
    msg << "Jacobian singular; residuals (GHz) " << out.residuals[0] << ", "
        << out.residuals[1] << ", " << out.residuals[2];
    throw ConvergenceError(msg.str(), out.max_residual);
  }
  if (!out.exact && !(options.least_squares && res.converged)) {
    msg << "no common root after " << res.iterations << " iterations; residuals (GHz) "
        << out.residuals[0] << ", " << out.residuals[1] << ", " << out.residuals[2];
    throw ConvergenceError(msg.str(), out.max_residual);
  }
  return out;
}

void SpectroscopyDataset::validate(std::size_t free_parameters) const {
  const std::size_t needed = std::max<std::size_t>(6, free_parameters + 2);
  if (points.size() < needed) {
    std::ostringstream msg;
    msg << "spectroscopy: " << points.size() << " points, need at least " << needed;
    throw DomainError(msg.str());
  }
  for (const auto& p : points) {
    if (!std::isfinite(p.bias_ma)) throw DomainError("spectroscopy: non-finite bias");
    if (!(std::isfinite(p.freq_ghz) && p.freq_ghz > 0.0))
      throw DomainError("spectroscopy: frequencies must be positive");
    if (!(std::isfinite(p.weight) && p.weight > 0.0))
      throw DomainError("spectroscopy: weights must be positive");
    if (p.order < 1) throw DomainError("spectroscopy: transition order must be >= 1");
  }
}

const char* fit_param_name(FitParam p) {
  switch (p) {
    case FitParam::e_j0: return "e_j0";
    case FitParam::d: return "d";
    case FitParam::m_bias: return "m_bias";
    case FitParam::flux_offset: return "flux_offset";
    case FitParam::e_c: return "e_c";
    case FitParam::e_l: return "e_l";
  }
  return "?";
}

std::size_t FrozenMask::free_count() const {
  return static_cast<std::size_t>(std::count(frozen.begin(), frozen.end(), false));
}

double model_frequency(const CircuitParams& params, double m_bias_ph, double i_bias_ma,
                       int order) {
  const double flux = circuit::bias_to_flux(params, m_bias_ph, i_bias_ma);
  const auto eff = circuit::effective_energies(params, circuit::ej_of_flux(params, flux));
  return level_energy(params.e_c, eff.ej_tilde, eff.el_tilde, order) / order;
}

std::array<double, fit_param_count> model_gradient(const CircuitParams& params,
                                                   double m_bias_ph, double i_bias_ma,
                                                   int order) {
  const double m = order;
  const double ec = params.e_c;
  const double el = params.e_l;
  const double x = pi * circuit::bias_to_flux(params, m_bias_ph, i_bias_ma);
  const double sx = std::sin(x), cx = std::cos(x);
  const double d = params.d;
  const double g = std::max(std::sqrt(cx * cx + d * d * sx * sx), 1e-300);
  const double ej = params.e_j0 * g;

  const auto eff = circuit::effective_energies(ej, el);
  const double w = 0.5 * eff.ej_tilde + eff.el_tilde;
  const double mm = m * m + m;
  // Partial derivatives of E_0m(E_C, EJ~, EL~).
  const double de_dw = 2.0 * m * std::sqrt(ec / w) + eff.ej_tilde * ec * mm / (4.0 * w * w);
  const double de_dejt = 0.5 * de_dw - ec * mm / (4.0 * w);
  const double de_delt = de_dw;
  const double de_dec = 2.0 * m * std::sqrt(w / ec) - eff.ej_tilde * mm / (4.0 * w);

  const double s = 6.0 * ej + 2.0 * el;
  const double s3 = s * s * s;
  const double dejt_dej = 6.0 * el * el * (s - 12.0 * ej) / s3;
  const double dejt_del = 12.0 * ej * el * (s - 2.0 * el) / s3;
  const double delt_dej = 18.0 * el * ej * (s - 6.0 * ej) / s3;
  const double delt_del = 9.0 * ej * ej * (s - 4.0 * el) / s3;
  const double de_dej = de_dejt * dejt_dej + de_delt * delt_dej;
  const double de_del = de_dejt * dejt_del + de_delt * delt_del;

  const double dej_dx = params.e_j0 * (d * d - 1.0) * sx * cx / g;
  std::array<double, fit_param_count> grad{};
  grad[0] = de_dej * g;
  grad[1] = de_dej * params.e_j0 * d * sx * sx / g;
  grad[2] = de_dej * dej_dx * pi * i_bias_ma * 1e-15 / (2.0 * flux_quantum);
  grad[3] = de_dej * dej_dx * pi;
  grad[4] = de_dec;
  grad[5] = de_del;
  for (double& v : grad) v /= m;
  return grad;
}

FitResult fit_flux_spectrum(const SpectroscopyDataset& data, const FluxFitSeed& seed,
                            const FrozenMask& frozen, const FluxFitOptions& options) {
  const std::size_t n_free = frozen.free_count();
  if (n_free == 0) throw DomainError("flux fit: every parameter is frozen");
  data.validate(n_free);
  seed.params.validate();
  if (!(seed.m_bias_ph > 0.0)) throw DomainError("flux fit: m_bias seed must be positive");

  std::vector<FitParam> free;
  for (std::size_t k = 0; k < fit_param_count; ++k)
    if (!frozen.frozen[k]) free.push_back(static_cast<FitParam>(k));
  const double ic_scale = circuit::units::ej_from_critical_current(1.0);  // GHz per nA
  const double ej_scale = options.critical_current_coordinates ? ic_scale : 1.0;

  // Internal coordinates: E_J0 (or I_c), logit of d/0.99, the rest as is.
  auto to_internal = [&](FitParam p, const CircuitParams& c, double m_bias) {
    switch (p) {
      case FitParam::e_j0: return c.e_j0 / ej_scale;
      case FitParam::d: return logit(std::clamp(c.d, 1e-3, 0.98) / d_max);
      case FitParam::m_bias: return m_bias;
      case FitParam::flux_offset: return c.flux_offset;
      case FitParam::e_c: return c.e_c;
      case FitParam::e_l: return c.e_l;
    }
    return 0.0;
  };
  auto unpack = [&](const Eigen::VectorXd& x) {
    CircuitParams c = seed.params;
    double m_bias = seed.m_bias_ph;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const double v = x(static_cast<Eigen::Index>(k));
      switch (free[k]) {
        case FitParam::e_j0: c.e_j0 = v * ej_scale; break;
        case FitParam::d: c.d = d_max * logistic(v); break;
        case FitParam::m_bias: m_bias = v; break;
        case FitParam::flux_offset: c.flux_offset = v; break;
        case FitParam::e_c: c.e_c = v; break;
        case FitParam::e_l: c.e_l = v; break;
      }
    }
    return std::pair{c, m_bias};
  };
  auto physical = [](const CircuitParams& c, double m_bias) {
    return c.e_j0 > 0.0 && c.e_c > 0.0 && c.e_l > 0.0 && m_bias > 0.0;
  };

  const auto n = static_cast<Eigen::Index>(data.points.size());
  Eigen::VectorXd sqrt_w(n);
  for (Eigen::Index i = 0; i < n; ++i) sqrt_w(i) = std::sqrt(data.points[i].weight);

  numeric::LeastSquaresProblem prob;
  prob.residual_count = data.points.size();
  prob.residuals = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    r.resize(n);
    const auto [c, m_bias] = unpack(x);
    if (!physical(c, m_bias)) {
      r.setConstant(std::numeric_limits<double>::quiet_NaN());
      return;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& pt = data.points[i];
      r(i) = sqrt_w(i) * (model_frequency(c, m_bias, pt.bias_ma, pt.order) - pt.freq_ghz);
    }
  };
  if (options.analytic_jacobian) {
    prob.jacobian = [&](const Eigen::VectorXd& x, Eigen::MatrixXd& j) {
      const auto [c, m_bias] = unpack(x);
      j.resize(n, static_cast<Eigen::Index>(free.size()));
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& pt = data.points[i];
        const auto grad = model_gradient(c, m_bias, pt.bias_ma, pt.order);
        for (std::size_t k = 0; k < free.size(); ++k) {
          double v = grad[static_cast<std::size_t>(free[k])];
          if (free[k] == FitParam::e_j0) v *= ej_scale;
          if (free[k] == FitParam::d) {
            const double sg = c.d / d_max;
            v *= d_max * sg * (1.0 - sg);
          }
          j(i, static_cast<Eigen::Index>(k)) = sqrt_w(i) * v;
        }
      }
    };
  }

  Eigen::VectorXd x0(static_cast<Eigen::Index>(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k)
    x0(static_cast<Eigen::Index>(k)) = to_internal(free[k], seed.params, seed.m_bias_ph);
  const auto res = numeric::levenberg_marquardt(prob, x0, options.lm);

  FitResult out;
  std::tie(out.params, out.m_bias_ph) = unpack(res.x);
  out.iterations = res.iterations;
  out.converged = res.converged;
  out.cost_history = res.cost_history;
  out.frozen = frozen;
  out.seed = seed;
  out.critical_current_coordinates = options.critical_current_coordinates;
  out.d_at_bound = !frozen.is_frozen(FitParam::d) && out.params.d > 0.985 * d_max;
  double sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = res.residuals(i) / sqrt_w(i);
    sq += r * r;
  }
  out.residual_rms = std::sqrt(sq / static_cast<double>(n));
  for (std::size_t k = 0; k < free.size(); ++k) {
    double se = res.std_errors(static_cast<Eigen::Index>(k));
    if (free[k] == FitParam::e_j0) se *= ej_scale;
    if (free[k] == FitParam::d) {
      const double sg = out.params.d / d_max;
      se *= d_max * sg * (1.0 - sg);
    }
    out.std_errors[static_cast<std::size_t>(free[k])] = se;
  }
  return out;
}

JointFitResult fit_joint(const MultiphotonSet& mp, const SpectroscopyDataset& data,
                         const FluxFitSeed& seed, std::size_t max_rounds,
                         double rel_change) {
  JointFitResult out;
  FluxFitSeed current = seed;
  double e_j = seed.params.e_j0;
  double e_l = seed.params.e_l;
  SweetSpotOptions ss;
  ss.least_squares = true;
  FrozenMask mask;
  mask.set(FitParam::e_c, true);
  mask.set(FitParam::e_l, false);
  for (out.rounds = 1; out.rounds <= max_rounds; ++out.rounds) {
    ss.e_j_seed = e_j;
    out.sweet_spot = solve_sweet_spot(mp, seed.params.e_c, e_l, ss);
    current.params.e_j0 = out.sweet_spot.e_j;
    current.params.e_l = e_l;
    out.flux = fit_flux_spectrum(data, current, mask);
    current.params = out.flux.params;
    current.m_bias_ph = out.flux.m_bias_ph;
    const double dj = std::abs(out.sweet_spot.e_j / e_j - 1.0);
    const double dl = std::abs(out.flux.params.e_l / e_l - 1.0);
    e_j = out.sweet_spot.e_j;
    e_l = out.flux.params.e_l;
    if (dj < rel_change && dl < rel_change) {
      out.converged = true;
      break;
    }
  }
  if (out.rounds > max_rounds) out.rounds = max_rounds;
  return out;
}

}  // namespace qdesign::fit
