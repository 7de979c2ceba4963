#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pinchflow/canonical.hpp"
#include "pinchflow/frames.hpp"
#include "pinchflow/pinching.hpp"
#include "support.hpp"

using namespace pinchflow;

TEST_CASE("cone constants") {
  const ConeParams t2 = ConeParams::thm1(2);
  CHECK(t2.alpha == doctest::Approx(2.0 / 3.0));
  CHECK(t2.beta == doctest::Approx(1.0));
  const ConeParams t4 = ConeParams::thm1(4);
  CHECK(t4.alpha == doctest::Approx(1.0 / 3.0));
  CHECK(t4.beta == 2.0);
  const ConeParams c = ConeParams::thm2(29.0 / 40.0);
  CHECK(std::abs(c.gamma - 1.0 / 30.0) < 1e-12);
  CHECK(std::abs(c.epsilon - 0.9) < 1e-12);
  CHECK_THROWS_AS(ConeParams::thm2(0.9).validate(), Error);  // gamma < 0
  ConeParams bad = t2;
  bad.alpha = 0.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("q values on canonical surfaces") {
  const double uv[2] = {0.9, 0.3};
  const PointGeometry sphere =
      point_geometry(make_surface(SurfaceKind::GeodesicSphere).jet(uv));
  CHECK(q_value(sphere, ConeParams::thm1(2)) == doctest::Approx(-11.0 / 9.0).epsilon(1e-12));

  const PointGeometry ver = point_geometry(make_surface(SurfaceKind::Veronese).jet(uv));
  CHECK(q_value(ver, ConeParams::thm2(29.0 / 40.0)) == doctest::Approx(43.0 / 90.0).epsilon(1e-10));

  const PointGeometry clifford =
      point_geometry(make_surface(SurfaceKind::CliffordTorus).jet(uv));
  CHECK(q_value(clifford, ConeParams::thm1(2)) > 0.0);

  SurfaceParams eq;
  eq.rho = std::numbers::pi / 2.0;
  const PointGeometry equator = point_geometry(make_surface(SurfaceKind::GeodesicSphere, eq).jet(uv));
  CHECK(q_value(equator, ConeParams::thm1(2)) == doctest::Approx(-1.0));
  CHECK(q_value(equator, ConeParams::thm2(0.7)) == doctest::Approx(-0.8));

  for (double rho = 0.05; rho <= std::numbers::pi / 2.0; rho += 0.05) {
    SurfaceParams p;
    p.rho = rho;
    const PointGeometry g = point_geometry(make_surface(SurfaceKind::GeodesicSphere, p).jet(uv));
    CHECK(q_value(g, ConeParams::thm1(2)) < 0.0);
  }
}

TEST_CASE("reaction examples") {
  CHECK(reaction_of_q(SecondFundamentalForm(2, 2), ConeParams::thm1(2)) == 0.0);
  CHECK(reaction_of_q(SecondFundamentalForm(2, 2), ConeParams::thm2(0.7)) == 0.0);

  ConeParams p = ConeParams::thm1(2);
  p.kbar = 0.0;
  const double t = 0.7;
  Eigen::Matrix2d h1 = t * Eigen::Matrix2d::Identity(), h2 = Eigen::Matrix2d::Zero();
  CHECK(reaction_of_q(testing::from_two(h1, h2), p) ==
        doctest::Approx(-8.0 * std::pow(t, 4) / 3.0).epsilon(1e-13));

  // (a, b, c) = (1, 0, 1/2), kbar = 0, |H|^2 from Q = 0: the independent
  // matrix-form evaluation gives 263/405 > 0.
  ConeParams q = ConeParams::thm2(29.0 / 40.0);
  q.kbar = 0.0;
  const double h2v = boundary_h2_thm2(1.0, 0.0, 0.5, q);
  CHECK(h2v == doctest::Approx(11.407407407407408).epsilon(1e-13));
  const SecondFundamentalForm h = thm2_family(1.0, 0.0, 0.5, h2v);
  CHECK(std::abs(q_value(h, q)) < 1e-12);
  CHECK(reaction_of_q(h, q) == doctest::Approx(263.0 / 405.0).epsilon(1e-12));
}

TEST_CASE("degree four homogeneity") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const SecondFundamentalForm h = testing::random_sff(rng, 2, 2);
    for (const ConeParams& base : {ConeParams::thm1(2), ConeParams::thm2(0.7)}) {
      const double lambda = 0.3 + trial * 0.01;
      ConeParams scaled = base;
      scaled.kbar = lambda * lambda * base.kbar;
      const double lhs = reaction_of_q(h.scaled(lambda), scaled);
      const double rhs = std::pow(lambda, 4) * reaction_of_q(h, base);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("hypersurface reaction matches the classical polynomial") {
  std::mt19937_64 rng(23);
  for (int n = 2; n <= 5; ++n) {
    const ConeParams p = ConeParams::thm1(n, 0.7);
    for (int trial = 0; trial < 250; ++trial) {
      const SecondFundamentalForm h = testing::random_sff(rng, n, 1);
      const double a2 = h.norm2();
      const double h2 = h.mean_curvature().squaredNorm();
      const double expected = 2.0 * a2 * a2 - 2.0 * p.alpha * h2 * a2 -
                              2.0 * n * p.kbar * (a2 - h2 / n) -
                              2.0 * n * (p.alpha - 1.0 / n) * p.kbar * h2;
      CHECK(std::abs(reaction_of_q(h, p) - expected) <= 1e-10 * (1.0 + std::abs(expected)));
    }
  }
}

TEST_CASE("discriminants") {
  const DiscriminantReport d2 = discriminant_report(2, 2.0 / 3.0, 1.0);
  CHECK(d2.delta_printed_1 == doctest::Approx(24.0).epsilon(1e-12));
  CHECK(d2.direct_negativity);
  const DiscriminantReport d4 = discriminant_report(4, 1.0 / 3.0, 2.0);
  CHECK(d4.delta_printed_2 == doctest::Approx(96.0).epsilon(1e-12));
  CHECK(d4.direct_negativity);
  const DiscriminantReport d5 = discriminant_report(5, 0.25, 2.0);
  CHECK(d5.delta_printed_2 == doctest::Approx(144.0).epsilon(1e-12));
  CHECK_THROWS_AS(discriminant_report(2, 0.5, 1.0), Error);
}

TEST_CASE("utility formulas") {
  CHECK(blowup_time(1.0, 0.0, 2).t_star == 0.25);
  CHECK(blowup_time(0.5, 1.0, 4).t_star == 2.0);
  const BlowupTime b = blowup_time(0.7, 0.3, 3);
  CHECK(b(0.3) == 0.7);
  CHECK(std::isinf(b(b.t_star)));
  CHECK(harnack_bound(2.0, 1.0, 0.0, 0.0, 0.5) == 1.0);
  CHECK(harnack_bound(2.0, 1.0, 3.0, 0.4, 0.0) == 2.0);
  double prev = 1e300;
  for (double d = 0.0; d < 5.0; d += 0.25) {
    const double v = harnack_bound(1.5, 0.8, 0.2, 0.1, d);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("small sweeps") {
  SweepSpec spec;
  spec.resolution = 17;
  spec.critical_resolution = 9;
  spec.critical_scan = 6;
  spec.critical_width = 1e-3;

  SUBCASE("argmax reproduces sup") {
    const SweepReport r = reaction_sweep(ConeParams::thm1(2), spec);
    const auto s = sweep_point(r.params, spec.stratum, spec.r3_source, r.argmax.angles);
    REQUIRE(s.has_value());
    CHECK(std::abs(s->value - r.sup) <= 1e-12 * (1.0 + std::abs(r.sup)));
    CHECK(r.samples > 17 * 17 * 17);
  }

  SUBCASE("refinement never lowers the sup") {
    SweepSpec coarse = spec;
    coarse.refine_rounds = 0;
    coarse.find_critical = false;
    SweepSpec fine = coarse;
    fine.refine_rounds = 3;
    const ConeParams p = ConeParams::thm2(29.0 / 40.0);
    CHECK(reaction_sweep(p, fine).sup >= reaction_sweep(p, coarse).sup);
  }

  SUBCASE("worker count does not change the report") {
    SweepSpec one = spec;
    one.threads = 1;
    one.find_critical = false;
    SweepSpec three = one;
    three.threads = 3;
    const SweepReport a = reaction_sweep(ConeParams::thm2(0.7), one);
    const SweepReport b = reaction_sweep(ConeParams::thm2(0.7), three);
    CHECK(a.sup == b.sup);
    CHECK(a.argmax.angles == b.argmax.angles);
    CHECK(a.landscape.positive == b.landscape.positive);
  }

  SUBCASE("H = 0 stratum crosses zero at beta = 2n/3") {
    SweepSpec h0 = spec;
    h0.stratum = Stratum::HZero;
    h0.critical_resolution = 33;
    h0.critical_width = 1e-4;
    ConeParams p = ConeParams::thm1(2);
    p.beta = 1.0;
    const SweepReport below = reaction_sweep(p, h0);
    CHECK(below.sup < 0.0);
    REQUIRE(below.critical.has_value());
    REQUIRE(below.critical->brackets.size() == 1);
    const CriticalBracket& b = below.critical->brackets.front();
    CHECK(b.hi - b.lo <= 1e-4);
    CHECK(b.lo <= 4.0 / 3.0 + 1e-9);
    CHECK(b.hi >= 4.0 / 3.0 - 1e-9);
  }

  SUBCASE("the H = 0 stratum is a Thm1 notion") {
    SweepSpec h0 = spec;
    h0.stratum = Stratum::HZero;
    CHECK_THROWS_AS(reaction_sweep(ConeParams::thm2(0.7), h0), Error);
  }
}
