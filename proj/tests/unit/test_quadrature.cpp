#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qdesign/errors.hpp"
#include "qdesign/quadrature.hpp"

using namespace qdesign::numeric;

TEST_SUITE("quadrature") {
  TEST_CASE("polynomials integrate exactly on one panel") {
    // K15 is exact through degree 22.
    auto r = gauss_kronrod_15([](double x) { return std::pow(x, 20); }, -1.0, 2.0);
    CHECK(r.value == doctest::Approx((std::pow(2.0, 21) + 1.0) / 21.0).epsilon(1e-14));
  }

  TEST_CASE("smooth integrands") {
    auto r = integrate([](double x) { return std::exp(-x * x); }, -5.0, 5.0,
                       {.rel_tol = 1e-12});
    CHECK(r.value == doctest::Approx(std::sqrt(std::numbers::pi) *
                                     std::erf(5.0)).epsilon(1e-12));
    auto s = integrate([](double x) { return std::sin(x); }, std::numbers::pi, 0.0);
    CHECK(s.value == doctest::Approx(-2.0).epsilon(1e-12));
  }

  TEST_CASE("narrow Lorentzian needs the breakpoints") {
    const double x0 = 6.85, g = 1e-3;
    auto f = [&](double x) { return g / (g * g + (x - x0) * (x - x0)); };
    const double exact = std::atan((15.0 - x0) / g) + std::atan(x0 / g);
    std::vector<double> cuts{x0 - 100 * g, x0 - 10 * g, x0 - g, x0,
                             x0 + g,       x0 + 10 * g, x0 + 100 * g};
    auto r = integrate(f, 0.0, 15.0, {.rel_tol = 1e-10}, cuts);
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-10));
  }

  TEST_CASE("integrable endpoint singularity") {
    auto r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0,
                       {.rel_tol = 1e-8, .max_intervals = 10000});
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-8));
  }

  TEST_CASE("budget exhaustion reports the achieved tolerance") {
    bool thrown = false;
    try {
      integrate([](double x) { return std::sin(1.0 / x); }, 1e-9, 1.0,
                {.rel_tol = 1e-14, .max_intervals = 20});
    } catch (const qdesign::ConvergenceError& e) {
      thrown = true;
      CHECK(e.residual() > 1e-14);
    }
    CHECK(thrown);
  }

  TEST_CASE("result is independent of breakpoint order") {
    auto f = [](double x) { return std::cos(3 * x) * std::exp(x); };
    std::vector<double> a{0.3, 1.1, 2.2}, b{2.2, 0.3, 1.1};
    CHECK(integrate(f, 0.0, 3.0, {}, a).value == integrate(f, 0.0, 3.0, {}, b).value);
  }

  TEST_CASE("compensated sum") {
    std::vector<double> v{1.0, 1e100, 1.0, -1e100};
    CHECK(compensated_sum(v) == 2.0);
  }
}
