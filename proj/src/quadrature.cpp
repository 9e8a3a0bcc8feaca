#include "qdesign/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "qdesign/errors.hpp"

namespace qdesign::numeric {

namespace {

// Kronrod abscissae (descending) and weights; even indices are shared with G7.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
};

Panel evaluate_panel(const Integrand& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      carry += (sum - t) + v;
    else
      carry += (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

QuadratureResult gauss_kronrod_15(const Integrand& f, double a, double b) {
  const Panel p = evaluate_panel(f, a, b);
  return {p.value, p.error, 15, 1};
}

QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureOptions& options,
                           std::span<const double> breakpoints) {
  if (!(std::isfinite(a) && std::isfinite(b)))
    throw DomainError("integrate: limits must be finite");
  if (a == b) return {};
  const double sign = b > a ? 1.0 : -1.0;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);

  std::vector<double> cuts{lo};
  for (double x : breakpoints)
    if (x > lo && x < hi) cuts.push_back(x);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Panel> panels;
  panels.reserve(std::max<std::size_t>(options.max_intervals, cuts.size()));
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    panels.push_back(evaluate_panel(f, cuts[i], cuts[i + 1]));
  std::size_t evaluations = 15 * panels.size();

  auto totals = [&panels] {
    double value = 0.0;
    double error = 0.0;
    for (const auto& p : panels) {
      value += p.value;
      error += p.error;
    }
    return std::pair{value, error};
  };

  auto [value, error] = totals();
  while (error > std::max(options.abs_tol, options.rel_tol * std::abs(value))) {
    if (panels.size() >= options.max_intervals) {
      std::ostringstream msg;
      msg << "integrate: interval budget exhausted on [" << lo << ", " << hi
          << "], achieved relative error " << error / std::abs(value);
      throw ConvergenceError(msg.str(), error / std::abs(value));
    }
    auto worst = std::max_element(
        panels.begin(), panels.end(),
        [](const Panel& x, const Panel& y) { return x.error < y.error; });
    const double mid = 0.5 * (worst->a + worst->b);
    if (!(mid > worst->a && mid < worst->b)) {
      throw ConvergenceError(
          "integrate: panel reached machine precision before tolerance",
          error / std::abs(value));
    }
    const Panel left = evaluate_panel(f, worst->a, mid);
    const Panel right = evaluate_panel(f, mid, worst->b);
    evaluations += 30;
    value += left.value + right.value - worst->value;
    error += left.error + right.error - worst->error;
    *worst = left;
    panels.push_back(right);
    // Refresh the running totals now and then to keep drift out of the
    // stopping test.
    if (panels.size() % 64 == 0) std::tie(value, error) = totals();
  }

  std::sort(panels.begin(), panels.end(),
            [](const Panel& x, const Panel& y) { return x.a < y.a; });
  std::vector<double> values;
  values.reserve(panels.size());
  double abs_error = 0.0;
  for (const auto& p : panels) {
    values.push_back(p.value);
    abs_error += p.error;
  }
  return {sign * compensated_sum(values), abs_error, evaluations, panels.size()};
}

}  // namespace qdesign::numeric
