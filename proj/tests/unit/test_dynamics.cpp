#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qdesign/dynamics.hpp"

using namespace qdesign;
using namespace qdesign::dynamics;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double pi = std::numbers::pi;

QubitNoiseParams noiseless() { return {inf, inf, 0.0}; }

EvolveOptions opts(std::size_t shots, std::uint64_t seed = 7, std::size_t threads = 1) {
  EvolveOptions o;
  o.shots = shots;
  o.seed = seed;
  o.threads = threads;
  return o;
}

// Near-instantaneous pulse so detuning during the pulse is negligible.
Segment hard(Axis axis, double angle) { return rotation(axis, angle, 1e-7); }

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("parameter validation") {
    ZControlCalibration cal;
    PulseSequence ok;
    ok.idle(10).readout();
    CHECK_THROWS_AS(evolve(ok, {5.0, 10.5, 0.0}, cal, opts(1)), DomainError);
    CHECK_THROWS_AS(evolve(ok, {-1.0, 1.0, 0.0}, cal, opts(1)), DomainError);
    CHECK_THROWS_AS(evolve(ok, {}, cal, opts(0)), DomainError);
    CHECK_THROWS_AS(evolve(ok, {}, ZControlCalibration{-1.0}, opts(1)), DomainError);

    PulseSequence none;
    none.idle(10);
    CHECK_THROWS_AS(evolve(none, {}, cal, opts(1)), DomainError);
    PulseSequence twice;
    twice.readout().readout();
    CHECK_THROWS_AS(evolve(twice, {}, cal, opts(1)), DomainError);
    PulseSequence early;
    early.readout().idle(5);
    CHECK_THROWS_AS(evolve(early, {}, cal, opts(1)), DomainError);
    PulseSequence negative;
    negative.idle(-1).readout();
    CHECK_THROWS_AS(evolve(negative, {}, cal, opts(1)), DomainError);
    PulseSequence strong;
    strong.z(10, 120.0).readout();  // 244 MHz, beyond the linear range
    CHECK_THROWS_AS(evolve(strong, {}, cal, opts(1)), DomainError);
  }

  TEST_CASE("empty sequence leaves the ground state") {
    PulseSequence s;
    s.readout();
    CHECK(evolve(s, {}, {}, opts(100)).sigma_z == 1.0);
    PulseSequence zero;
    zero.idle(0).rotate(Axis::x, 0, 25e6).readout();
    CHECK(evolve(zero, {}, {}, opts(100)).sigma_z == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("pi pulse inverts and two half pulses equal one pi pulse") {
    PulseSequence one, two, about_y;
    one.segments = {rotation(Axis::x, pi, 20.0)};
    one.readout();
    two.segments = {rotation(Axis::x, pi / 2, 10.0), rotation(Axis::x, pi / 2, 10.0)};
    two.readout();
    about_y.segments = {rotation(Axis::y, pi / 2, 10.0), rotation(Axis::y, pi / 2, 10.0)};
    about_y.readout();
    const double z1 = evolve(one, noiseless(), {}, opts(1)).sigma_z;
    CHECK(z1 == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(evolve(two, noiseless(), {}, opts(1)).sigma_z - z1) < 1e-9);
    CHECK(std::abs(evolve(about_y, noiseless(), {}, opts(1)).sigma_z - z1) < 1e-9);
  }

  TEST_CASE("Bloch norm stays within the unit ball") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
      PulseSequence s;
      for (int k = 0; k < 8; ++k) {
        const double pick = u(rng);
        const double ns = 50.0 * u(rng);
        if (pick < 0.3) s.rotate(Axis::x, ns, 40e6 * u(rng));
        else if (pick < 0.6) s.rotate(Axis::y, ns, 40e6 * u(rng));
        else if (pick < 0.8) s.z(ns, 60.0 * (u(rng) - 0.5));
        else s.idle(1000.0 * u(rng));
      }
      s.readout();
      const QubitNoiseParams noise{0.5 + 10 * u(rng), 0.5, 2e6 * u(rng)};
      const auto r = evolve(s, noise, {}, opts(20, trial));
      CHECK(r.max_bloch_norm <= 1.0 + 1e-9);
      CHECK(std::abs(r.sigma_z) <= 1.0 + 1e-9);
    }
  }

  TEST_CASE("free Ramsey matches the closed form") {
    // Ideal pulses: <sigma_z> = -cos(delta tau) exp(-tau/T2), averaged over
    // Gaussian delta gives -exp(-sigma_w^2 tau^2 / 2 - tau/T2).
    for (double tau : {0.0, 500.0, 1500.0, 3000.0}) {
      PulseSequence s;
      s.segments = {hard(Axis::x, pi / 2)};
      s.idle(tau);
      s.segments.push_back(hard(Axis::x, pi / 2));
      s.readout();
      const double exact = -std::exp(-tau / 10e3);
      CHECK(evolve(s, {inf, 10.0, 0.0}, {}, opts(1)).sigma_z ==
            doctest::Approx(exact).epsilon(1e-9));

      const double sigma_w = 2 * pi * 100.66e3 * 1e-9;
      const double expected = -std::exp(-0.5 * sigma_w * sigma_w * tau * tau - tau / 10e3);
      const double got = evolve(s, {inf, 10.0, 100.66e3}, {}, opts(20000, 5)).sigma_z;
      CHECK(std::abs(got - expected) < 0.02);
    }
  }

  TEST_CASE("T1 relaxation of the excited state") {
    for (double tau : {0.0, 2000.0, 9100.0}) {
      PulseSequence s;
      s.segments = {hard(Axis::x, pi)};
      s.idle(tau);
      s.readout();
      const double expected = 1.0 - 2.0 * std::exp(-tau / 9100.0);
      CHECK(evolve(s, {9.1, 10.0, 0.0}, {}, opts(1)).sigma_z ==
            doctest::Approx(expected).epsilon(1e-9));
    }
  }

  TEST_CASE("echo refocuses static detuning exactly") {
    for (double sigma : {1e5, 1e6, 5e6}) {
      for (double tau : {1000.0, 20000.0}) {
        PulseSequence s;
        s.segments = {hard(Axis::x, pi / 2)};
        s.idle(tau / 2);
        s.segments.push_back(hard(Axis::x, pi));
        s.idle(tau / 2);
        s.segments.push_back(hard(Axis::x, pi / 2));
        s.readout();
        const double amp = std::abs(evolve(s, {inf, inf, sigma}, {}, opts(200, 11)).sigma_z);
        CHECK(std::abs(amp - 1.0) < 1e-6);
      }
    }
  }

  TEST_CASE("T1 preset recovers the input lifetime") {
    PresetOptions p;
    const auto trace = sweep([&](double d) { return preset_sequence(Preset::t1, d, p); },
                             preset_delays(Preset::t1, p), QubitNoiseParams{}, {}, opts(2000));
    const DecayFit fit = extract_decay(trace, DecayModel::exponential);
    CHECK(fit.tau_ns == doctest::Approx(9100.0).epsilon(0.02));
    CHECK(fit.offset == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("echo removes quasi-static dephasing, Ramsey does not") {
    PresetOptions p;
    const QubitNoiseParams noise;
    const auto echo = sweep([&](double d) { return preset_sequence(Preset::echo, d, p); },
                            preset_delays(Preset::echo, p), noise, {}, opts(2000));
    const auto ramsey = sweep([&](double d) { return preset_sequence(Preset::ramsey, d, p); },
                              preset_delays(Preset::ramsey, p), noise, {}, opts(2000));
    const double t2 = extract_decay(echo, DecayModel::exponential).tau_ns;
    const double t2_star = extract_decay(ramsey, DecayModel::exponential).tau_ns;
    CHECK(t2 == doctest::Approx(10000.0).epsilon(0.05));
    CHECK(t2_star == doctest::Approx(2000.0).epsilon(0.25));
    CHECK(t2_star < 0.4 * t2);

    // A tenfold larger static spread leaves the echo envelope unchanged.
    const QubitNoiseParams wide{9.1, 10.0, 1e6};
    const auto echo_wide = sweep([&](double d) { return preset_sequence(Preset::echo, d, p); },
                                 preset_delays(Preset::echo, p), wide, {}, opts(2000));
    CHECK(extract_decay(echo_wide, DecayModel::exponential).tau_ns ==
          doctest::Approx(t2).epsilon(0.01));
  }

  TEST_CASE("Z precession fringe frequency") {
    const ZControlCalibration cal;
    const auto r = simulate_z_precession(32.0, 0.0, 500.0, 501, cal, {}, opts(500));
    CHECK(r.bin_hz == doctest::Approx(1.996e6).epsilon(1e-3));
    CHECK(std::abs(r.fringe_dft_hz - 65e6) <= r.bin_hz);
    REQUIRE(r.fit.has_value());
    CHECK(r.fit->frequency_hz == doctest::Approx(65e6).epsilon(1e-3));

    const auto flat = simulate_z_precession(0.0, 0.0, 500.0, 501, cal, noiseless(), opts(1));
    CHECK(flat.fringe_dft_hz == 0.0);
    for (double z : flat.trace.sigma_z) CHECK(z == doctest::Approx(-1.0).epsilon(1e-12));
  }

  TEST_CASE("fringe frequency is linear in eta") {
    const ZControlCalibration cal;
    std::vector<double> eta{8, 16, 24, 32}, f;
    for (double e : eta) {
      const auto r = simulate_z_precession(e, 0.0, 500.0, 501, cal, {}, opts(200));
      REQUIRE(r.fit.has_value());
      f.push_back(r.fit->frequency_hz * 1e-6);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
      sx += eta[i]; sy += f[i]; sxx += eta[i] * eta[i]; sxy += eta[i] * f[i];
    }
    const double nn = static_cast<double>(eta.size());
    const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    CHECK(slope == doctest::Approx(cal.df_deta_mhz_per_ua).epsilon(0.01));
    CHECK(f[1] == doctest::Approx(2.0 * f[0]).epsilon(0.01));
    CHECK(f[3] == doctest::Approx(2.0 * f[1]).epsilon(0.01));
  }

  TEST_CASE("exponential decay fit round trip") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> noise(0.0, 0.005);
    Trace t;
    for (double time : linspace(0.0, 10000.0, 101)) {
      t.time_ns.push_back(time);
      t.sigma_z.push_back(std::exp(-time / 2000.0) + noise(rng));
    }
    const DecayFit fit = extract_decay(t, DecayModel::exponential);
    CHECK(std::abs(fit.tau_ns - 2000.0) < 3.0 * fit.tau_se_ns);
    CHECK(fit.tau_se_ns < 100.0);
  }

  TEST_CASE("damped cosine fit round trip") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> noise(0.0, 0.005);
    Trace t;
    for (double time : linspace(0.0, 20000.0, 4001)) {
      t.time_ns.push_back(time);
      t.sigma_z.push_back(0.8 * std::exp(-time / 10000.0) *
                              std::cos(2 * pi * 65e6 * time * 1e-9 + 0.3) +
                          0.1 + noise(rng));
    }
    const DecayFit fit = extract_decay(t, DecayModel::damped_cosine);
    CHECK(std::abs(fit.frequency_hz - 65e6) < 3.0 * fit.frequency_se_hz);
    CHECK(std::abs(fit.tau_ns - 10000.0) < 3.0 * fit.tau_se_ns);
    CHECK(fit.phase == doctest::Approx(0.3).epsilon(0.05));
  }

  TEST_CASE("constant trace is rejected") {
    Trace t;
    for (double time : linspace(0.0, 1000.0, 20)) {
      t.time_ns.push_back(time);
      t.sigma_z.push_back(0.4);
    }
    CHECK_THROWS_AS(extract_decay(t, DecayModel::exponential), NoDecayError);
    CHECK_THROWS_AS(extract_decay(t, DecayModel::damped_cosine), NoDecayError);
    t.time_ns.resize(5);
    t.sigma_z.resize(5);
    CHECK_THROWS_AS(extract_decay(t, DecayModel::exponential), DomainError);
  }

  TEST_CASE("seeded results do not depend on threads") {
    PresetOptions p;
    const auto seq = preset_sequence(Preset::ramsey, 1500.0, p);
    const double a = evolve(seq, {}, {}, opts(3001, 99, 1)).sigma_z;
    const double b = evolve(seq, {}, {}, opts(3001, 99, 4)).sigma_z;
    const double c = evolve(seq, {}, {}, opts(3001, 99, 7)).sigma_z;
    CHECK(a == b);
    CHECK(a == c);
    CHECK(evolve(seq, {}, {}, opts(3001, 100, 1)).sigma_z != a);

    EvolveOptions proj = opts(4000, 5, 3);
    proj.readout = Readout::projective;
    const double sampled = evolve(seq, {}, {}, proj).sigma_z;
    proj.threads = 1;
    CHECK(evolve(seq, {}, {}, proj).sigma_z == sampled);
    const double exact = evolve(seq, {}, {}, opts(4000, 5)).sigma_z;
    CHECK(std::abs(sampled - exact) < 4.0 / std::sqrt(4000.0));
  }

  TEST_CASE("sequence JSON round trip") {
    PresetOptions p;
    const auto seq = preset_sequence(Preset::zpulse, 37.0, p);
    const auto back = sequence_from_json(to_json(seq));
    REQUIRE(back.segments.size() == seq.segments.size());
    for (std::size_t i = 0; i < seq.segments.size(); ++i) {
      CHECK(back.segments[i].axis == seq.segments[i].axis);
      CHECK(back.segments[i].duration_ns == doctest::Approx(seq.segments[i].duration_ns));
      CHECK(back.segments[i].amplitude == doctest::Approx(seq.segments[i].amplitude));
    }
    auto j = to_json(seq);
    j["segments"][0]["rate_Hz"] = 1.0;
    CHECK_THROWS_AS(sequence_from_json(j), ParseError);
    auto k = to_json(seq);
    k["segments"][1]["axis"] = "w";
    CHECK_THROWS_AS(sequence_from_json(k), ParseError);
  }
}
