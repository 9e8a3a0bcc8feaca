#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>

namespace qdesign::numeric {

struct QuadratureOptions {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  std::size_t max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t evaluations = 0;
  std::size_t intervals = 0;
};

using Integrand = std::function<double(double)>;

/// One 7-point Gauss / 15-point Kronrod panel on [a, b]. `abs_error` is
/// |K15 - G7|.
QuadratureResult gauss_kronrod_15(const Integrand& f, double a, double b);

/// Globally adaptive Gauss-Kronrod quadrature on [a, b].
///
/// The interval is first split at every breakpoint strictly inside (a, b);
/// the panel with the largest error estimate is then bisected until the
/// summed estimate is below max(abs_tol, rel_tol * |value|). Panel order and
/// summation order depend only on the integrand values, so the result is
/// reproducible bit for bit.
///
/// Throws ConvergenceError (residual = achieved relative error) when
/// `max_intervals` is exhausted or a panel shrinks to machine precision.
QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureOptions& options = {},
                           std::span<const double> breakpoints = {});

/// 4-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 4> gauss_legendre4_nodes = {
    -0.86113631159405257522, -0.33998104358485626480, 0.33998104358485626480,
    0.86113631159405257522};
inline constexpr std::array<double, 4> gauss_legendre4_weights = {
    0.34785484513745385737, 0.65214515486254614263, 0.65214515486254614263,
    0.34785484513745385737};

/// Neumaier-compensated sum in the order given.
double compensated_sum(std::span<const double> values);

}  // namespace qdesign::numeric
