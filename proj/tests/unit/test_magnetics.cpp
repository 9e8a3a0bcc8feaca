#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "qdesign/errors.hpp"
#include "qdesign/geometry_io.hpp"
#include "qdesign/magnetics.hpp"
#include "qdesign/verification/oracles.hpp"

using namespace qdesign::magnetics;

namespace {

constexpr double half_pi = 1.5707963267948966;

Polyline wobbly_loop(std::mt19937_64& rng, Vec3 center) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a1 = 10 * u(rng), a2 = 10 * u(rng), ph = 3 * u(rng);
  Polyline p;
  for (int k = 0; k < 120; ++k) {
    const double t = 2 * M_PI * k / 120;
    const double r = 80 + a1 * std::cos(2 * t + ph) + a2 * std::sin(3 * t);
    p.vertices.push_back(center + Vec3{r * std::cos(t), r * std::sin(t), 5 * u(rng)});
  }
  return p;
}

}  // namespace

TEST_SUITE("magnetics") {
  TEST_CASE("coaxial circles against the elliptic-integral formula") {
    const auto a = circle(100.0, 720);
    const auto b = circle(100.0, 720, {0, 0, 300});
    const double m = neumann_mutual(a, b);
    const double exact = qdesign::oracle::coaxial_loops_mutual(100, 100, 300);
    CHECK(std::abs(m / exact - 1.0) < 1e-3);

    const auto c = circle(60.0, 720, {0, 0, 40});
    CHECK(std::abs(neumann_mutual(a, c) / qdesign::oracle::coaxial_loops_mutual(100, 60, 40) - 1.0) < 1e-3);
  }

  TEST_CASE("near segments: closely spaced coaxial circles") {
    // 2 um apart with 0.87 um segments: every facing pair takes the near path.
    const auto a = circle(100.0, 720);
    const auto b = circle(100.0, 720, {0, 0, 2});
    const double exact = qdesign::oracle::coaxial_loops_mutual(100, 100, 2);
    CHECK(std::abs(neumann_mutual(a, b) / exact - 1.0) < 1e-3);
  }

  TEST_CASE("near-pair integration matches brute-force subdivision") {
    Polyline sq1, sq2;
    sq1.vertices = {{0, 0, 0}, {50, 0, 0}, {50, 50, 0}, {0, 50, 0}};
    sq2.vertices = {{0, -3, 2}, {50, -3, 2}, {50, -40, 2}, {0, -40, 2}};
    const double semi = neumann_mutual(sq1, sq2);
    // With 1/64 of the gap per piece the far-field rule is used nearly
    // everywhere; the residual near pairs are tiny.
    NeumannOptions far_only;
    far_only.near_factor = 0.0;
    const double brute = neumann_mutual(refined(sq1, 400), refined(sq2, 400), far_only);
    CHECK(semi == doctest::Approx(brute).epsilon(1e-4));
  }

  TEST_CASE("symmetry M(a,b) = M(b,a)") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 6; ++i) {
      const auto a = wobbly_loop(rng, {0, 0, 0});
      const auto b = wobbly_loop(rng, {200 + 100 * u(rng), 100 * u(rng), 30 * u(rng)});
      CHECK(neumann_mutual(a, b) == doctest::Approx(neumann_mutual(b, a)).epsilon(1e-9));
    }
  }

  TEST_CASE("mirror image with flipped orientation changes sign") {
    std::mt19937_64 rng(4);
    const auto a = wobbly_loop(rng, {0, 0, 0});
    const auto b = mirrored_x(a, 300.0);
    const double m = neumann_mutual(a, b);
    CHECK(neumann_mutual(a, reversed(b)) == doctest::Approx(-m).epsilon(1e-12));
  }

  TEST_CASE("segment doubling converges") {
    for (double gap : {100.0, 200.0}) {
      const auto a = circle(100.0, 90);
      const auto b = circle(100.0, 90, {200 + gap, 0, 0});
      const double coarse = neumann_mutual(a, b);
      const double fine = neumann_mutual(refined(a, 2), refined(b, 2));
      CHECK(std::abs(fine / coarse - 1.0) < 1e-3);
    }
  }

  TEST_CASE("invalid geometry") {
    const auto a = circle(100.0, 72);
    CHECK_THROWS_AS(neumann_mutual(a, circle(100.0, 72, {150, 0, 0})), qdesign::GeometryError);
    CHECK_THROWS_AS(neumann_mutual(a, circle(100.0, 72, {0, 0, 0.5})), qdesign::GeometryError);
    auto open = circle(50.0, 72, {400, 0, 0});
    open.closed = false;
    CHECK_THROWS_AS(neumann_mutual(a, open), qdesign::DomainError);
    Polyline dup;
    dup.vertices = {{0, 0, 0}, {0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_AS(dup.validate(), qdesign::DomainError);
    GradiometricLoop same{a, circle(50.0, 72, {400, 0, 0}), {1, 1}};
    CHECK_THROWS_AS(same.validate(), qdesign::DomainError);
  }

  TEST_CASE("reference bias line coupling") {
    const auto g = reference_geometry();
    const double m = gradiometric_mutual(g.qubit(), g.bias_line());
    CHECK(std::abs(m) == doctest::Approx(2.3).epsilon(0.5));
  }

  TEST_CASE("gradiometer rejects distant and symmetric sources") {
    ReferenceDimensions dims;
    const auto q = reference_qubit(dims);
    const double near = gradiometric_mutual(q, reference_bias_line(dims));
    dims.bias_gap = 100.0 * (dims.ring_outer_radius + dims.bias_gap) - dims.ring_outer_radius;
    const double far = gradiometric_mutual(q, reference_bias_line(dims));
    CHECK(std::abs(far) * 1e3 < std::abs(near));

    // A loop centered on the mirror plane couples equally to both halves.
    const auto sym = circle(50.0, 360, {300, 0, 0});
    const double half = neumann_mutual(q.loop1, sym);
    CHECK(std::abs(gradiometric_mutual(q, sym)) < 1e-9 * std::abs(half));
  }

  TEST_CASE("qubit pair: rotation dependence") {
    const auto g = reference_geometry();
    const auto q = g.qubit();
    const double m0 = qubit_pair_mutual(q, g.footprint_radius, 150.0, 0.0);
    const double m90 = qubit_pair_mutual(q, g.footprint_radius, 150.0, half_pi);
    const double m180 = qubit_pair_mutual(q, g.footprint_radius, 150.0, 2 * half_pi);
    CHECK(std::abs(m90) < 1e-3);
    CHECK(std::abs(std::abs(m180) / std::abs(m0) - 1.0) < 0.05);
    CHECK(std::abs(m0) > 0.0);
    // Farther apart, the coupling keeps falling.
    double previous = std::abs(m0);
    for (double gap : {300.0, 600.0, 1500.0}) {
      const double m = std::abs(qubit_pair_mutual(q, g.footprint_radius, gap, 0.0));
      CHECK(m < previous);
      previous = m;
    }
  }

  TEST_CASE("qubit pair: aligned junctions suppress the coupling" * doctest::may_fail()) {
    // Quadrupole-quadrupole coupling only drops to ~1/4 here, not below 1/10.
    const auto g = reference_geometry();
    const auto q = g.qubit();
    const double aligned = std::abs(qubit_pair_mutual(q, g.footprint_radius, 150.0, 0.0, 0.0));
    double best = aligned;
    for (double placement : {half_pi / 2, half_pi})
      best = std::max(best, std::abs(qubit_pair_mutual(q, g.footprint_radius, 150.0, 0.0, placement)));
    CHECK(aligned < best / 10.0);
  }

  TEST_CASE("flux per current") {
    CHECK(flux_per_current(2.3) == doctest::Approx(0.90).epsilon(0.01));
    CHECK(std::abs(2.0 * flux_per_current(2.3) / 1.7 - 1.0) < 0.10);
    CHECK(flux_per_current(1e12) < 1e-9);
    CHECK_THROWS_AS(flux_per_current(0.0), qdesign::DomainError);
  }

  TEST_CASE("Z coupling estimate") {
    CouplingEstimate est{31.0, 6.3, 0.1, 100e6};
    CHECK(z_coupling(est) == doctest::Approx(4.92e6).epsilon(0.01));
    auto twice = est;
    twice.m_ij_ph *= 2;
    CHECK(z_coupling(twice) == doctest::Approx(2 * z_coupling(est)).epsilon(1e-14));
    est.m_ij_ph = 0;
    CHECK(z_coupling(est) == 0.0);
  }

  TEST_CASE("geometry file round trip") {
    const auto g = reference_geometry();
    const auto path = std::filesystem::temp_directory_path() / "qdesign_geometry.json";
    write_geometry(path.string(), g);
    const auto back = read_geometry(path.string());
    std::filesystem::remove(path);
    REQUIRE(back.polylines.size() == g.polylines.size());
    CHECK(back.footprint_radius == g.footprint_radius);
    for (std::size_t i = 0; i < g.polylines.size(); ++i) {
      const auto& x = g.polylines[i];
      const auto& y = back.polylines[i];
      CHECK(x.name == y.name);
      CHECK(x.winding == y.winding);
      CHECK(x.polyline.closed == y.polyline.closed);
      REQUIRE(x.polyline.vertices.size() == y.polyline.vertices.size());
      for (std::size_t k = 0; k < x.polyline.vertices.size(); ++k) {
        CHECK(x.polyline.vertices[k].x == y.polyline.vertices[k].x);
        CHECK(x.polyline.vertices[k].y == y.polyline.vertices[k].y);
        CHECK(x.polyline.vertices[k].z == y.polyline.vertices[k].z);
      }
    }
  }

  TEST_CASE("geometry schema is strict") {
    auto j = to_json(reference_geometry());
    j["colour"] = "red";
    CHECK_THROWS_AS(geometry_from_json(j), qdesign::ParseError);
    j = to_json(reference_geometry());
    j["polylines"][0]["winding"] = 2;
    CHECK_THROWS_AS(geometry_from_json(j), qdesign::ParseError);
    j = to_json(reference_geometry());
    j["polylines"][1]["name"] = "qubit.loop1";
    CHECK_THROWS_AS(geometry_from_json(j), qdesign::ParseError);
    CHECK_THROWS_AS(reference_geometry().find("nothing"), qdesign::ParseError);
  }
}
