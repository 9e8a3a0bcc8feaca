#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "qdesign/config.hpp"
#include "qdesign/errors.hpp"

using namespace qdesign;
using namespace qdesign::config;
using nlohmann::json;

namespace {

const std::string source_dir = QDESIGN_SOURCE_DIR;
const std::string default_path = source_dir + "/config/default.json";

std::string error_of(const json& j) {
  try {
    config_from_json(j, source_dir + "/config");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("shipped default file equals the built-in defaults") {
    const ToolkitConfig file = load_config(default_path);
    const ToolkitConfig built;
    CHECK(file.circuit.e_c == doctest::Approx(built.circuit.e_c));
    CHECK(file.circuit.e_j0 == doctest::Approx(built.circuit.e_j0));
    CHECK(file.circuit.e_l == doctest::Approx(built.circuit.e_l));
    CHECK(file.circuit.d == built.circuit.d);
    CHECK(file.purcell.omega_q == doctest::Approx(built.purcell.omega_q));
    CHECK(file.purcell.omega_r == doctest::Approx(built.purcell.omega_r));
    CHECK(file.purcell.g == doctest::Approx(55e6));
    CHECK(file.purcell.l_total_nh == doctest::Approx(6.3));
    CHECK(file.tlf.volume == doctest::Approx(50e-18));
    CHECK(file.tlf.gamma2 == doctest::Approx(10e6));
    CHECK(file.tlf.omega_tlf_max == doctest::Approx(15e9));
    CHECK(file.tlf.p_min == built.tlf.p_min);
    CHECK(file.tlf.theta_min == doctest::Approx(built.tlf.theta_min));
    CHECK(file.budget.radiative_t1_us == doctest::Approx(100));
    CHECK(file.coupling.l_total_nh == doctest::Approx(6.3));
    CHECK(file.coupling.g_ref_hz == doctest::Approx(100e6));
    CHECK(file.coupling.placement_rad == doctest::Approx(std::numbers::pi / 2));
    CHECK(file.dynamics.noise.t1_us == doctest::Approx(9.1));
    CHECK(file.dynamics.noise.sigma_hz == doctest::Approx(built.dynamics.noise.sigma_hz));
    CHECK(file.dynamics.calibration.df_deta_mhz_per_ua == doctest::Approx(65.0 / 32.0));
    CHECK(file.dynamics.calibration.max_shift_mhz == doctest::Approx(200));
    CHECK(file.dynamics.pi_ns == doctest::Approx(20));
    CHECK(file.dynamics.eta_ua == doctest::Approx(32));
    CHECK(file.dynamics.shots == 10000);
    REQUIRE(file.fit.multiphoton.has_value());
    CHECK(file.fit.multiphoton->f01 == doctest::Approx(7.6496));
    CHECK(*file.fit.e_l_anchor == doctest::Approx(128));
    CHECK(std::filesystem::exists(file.geometry_file));
    CHECK(file.warnings.empty());
  }

  TEST_CASE("unit conversion") {
    CHECK(parse_quantity("0.24 GHz", Quantity::frequency, "x") == doctest::Approx(0.24e9));
    CHECK(parse_quantity("240MHz", Quantity::frequency, "x") == doctest::Approx(0.24e9));
    CHECK(parse_quantity("9100 ns", Quantity::time, "x") == doctest::Approx(9.1));
    CHECK(parse_quantity("6.3 nH", Quantity::inductance, "x") == doctest::Approx(6300));
    CHECK(parse_quantity("90 deg", Quantity::angle, "x") == doctest::Approx(std::numbers::pi / 2));
    CHECK(parse_quantity("50 um^3", Quantity::volume, "x") == doctest::Approx(50e-18));
    CHECK(parse_quantity("65 GHz/mA", Quantity::freq_per_current, "x") == doctest::Approx(65));
    CHECK(parse_quantity(" -1.5e-3 Phi0 ", Quantity::flux, "x") == doctest::Approx(-1.5e-3));
    CHECK_THROWS_AS(parse_quantity("0.24", Quantity::frequency, "x"), ConfigError);
    CHECK_THROWS_AS(parse_quantity("GHz", Quantity::frequency, "x"), ConfigError);
    CHECK_THROWS_AS(parse_quantity("0.24 fF", Quantity::frequency, "x"), ConfigError);
  }

  TEST_CASE("errors carry the key path") {
    CHECK(error_of({{"circuit", {{"E_C", 0.24}}}}).rfind("circuit.E_C:", 0) == 0);
    CHECK(error_of({{"circuit", {{"E_C", "0.24"}}}}).rfind("circuit.E_C:", 0) == 0);
    CHECK(error_of({{"circuit", {{"E_C", "0.24 pF"}}}}).rfind("circuit.E_C:", 0) == 0);
    CHECK(error_of({{"circuit", {{"EC", "0.24 GHz"}}}}).rfind("circuit.EC: unknown key", 0) == 0);
    CHECK(error_of({{"tlf", {{"alpha", "0.3 rad"}}}}).rfind("tlf.alpha:", 0) == 0);
    CHECK(error_of({{"colors", 1}}).rfind("colors: unknown key", 0) == 0);
    CHECK(error_of({{"dynamics", {{"shots", 0}}}}).rfind("dynamics.shots:", 0) == 0);
    CHECK(error_of({{"dynamics", {{"T1", "4 us"}, {"T2", "10 us"}}}}).rfind("dynamics:", 0) == 0);
    CHECK(error_of({{"circuit", {{"E_C", "-1 GHz"}}}}).rfind("circuit:", 0) == 0);
    CHECK(error_of({{"geometry", {{"file", "missing.json"}}}}).rfind("geometry.file:", 0) == 0);
    CHECK(error_of({{"output", {{"format", "xml"}}}}).rfind("output.format:", 0) == 0);
    CHECK(error_of({{"budget", {{"others", {{{"name", "x"}}}}}}}).rfind("budget.others[0]:", 0) == 0);
    CHECK(error_of({{"fit", {{"multiphoton", {{"f01", "7 GHz"}, {"f02_half", "7.1 GHz"},
                                              {"f03_third", "6.9 GHz"}}}}}})
              .rfind("fit.multiphoton:", 0) == 0);
  }

  TEST_CASE("low E_J/E_C ratio is a warning, not an error") {
    const auto c = config_from_json({{"circuit", {{"E_J0", "4 GHz"}}}});
    CHECK(c.warnings.size() == 1);
  }

  TEST_CASE("participation-ratio channel in the budget block") {
    const auto c = config_from_json(
        {{"budget", {{"others", {{{"name", "oxide"}, {"fill_factor", 2.8e-4}, {"loss_tangent", 3e-3}},
                                 {{"name", "qp"}, {"T1", "1 ms"}}}}}}});
    REQUIRE(c.budget.extras.size() == 2);
    // delta_eff = 8.4e-7 at 6.85 GHz gives 27.7 us
    CHECK(1e6 / c.budget.extras[0].rate == doctest::Approx(27.66).epsilon(0.01));
    CHECK(c.budget.extras[1].rate == doctest::Approx(1e3));
  }

  TEST_CASE("environment variable selects the config file") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "qdesign_config_test";
    fs::create_directories(dir);
    const fs::path file = dir / "c.json";
    std::ofstream(file) << R"({"circuit": {"E_J0": "50 GHz"}})";
    ::setenv("QDESIGN_CONFIG", file.c_str(), 1);
    CHECK(resolve_config(std::nullopt).circuit.e_j0 == doctest::Approx(50));
    CHECK(resolve_config(default_path).circuit.e_j0 == doctest::Approx(45));
    ::unsetenv("QDESIGN_CONFIG");
    CHECK(resolve_config(std::nullopt).circuit.e_j0 == doctest::Approx(45));
    CHECK(resolve_config(std::nullopt).source.empty());
    CHECK_THROWS_AS(load_config((dir / "absent.json").string()), IoError);
    std::ofstream(dir / "bad.json") << "{ nope";
    CHECK_THROWS_AS(load_config((dir / "bad.json").string()), ConfigError);
    fs::remove_all(dir);
  }
}
