#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pinchflow/tensor.hpp"
#include "support.hpp"

using namespace pinchflow;
using pinchflow::testing::clifford_jet;
using pinchflow::testing::latitude_sphere_jet;

TEST_CASE("clifford torus from a hand-differentiated chart") {
  for (double u : {0.0, 0.7, 2.3}) {
    for (double v : {0.1, 1.9, 4.0}) {
      const PointGeometry g = point_geometry(clifford_jet(u, v));
      CHECK(g.metric(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
      CHECK(g.metric(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
      CHECK(std::abs(g.metric(0, 1)) < 1e-15);
      CHECK(g.norm_a2 == doctest::Approx(2.0).epsilon(1e-12));
      CHECK(g.norm_h2 < 1e-24);
      CHECK(std::abs(*g.kperp) < 1e-12);
      CHECK(std::abs(*g.gauss) < 1e-12);
    }
  }
}

TEST_CASE("latitude sphere of radius pi/3") {
  const double rho = std::numbers::pi / 3.0;
  const PointGeometry g = point_geometry(latitude_sphere_jet(rho, 0.9, 0.4));
  CHECK(std::sqrt(g.norm_h2) == doctest::Approx(2.0 / std::tan(rho)).epsilon(1e-12));
  CHECK(g.norm_a2 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(std::abs(g.norm_traceless_a2) < 1e-12);
  CHECK(std::abs(*g.kperp) < 1e-12);
  CHECK(*g.gauss == doctest::Approx(4.0 / 3.0).epsilon(1e-12));

  // The mean curvature vector points toward the center e_4.
  const AmbientVector hv = g.mean_curvature_vector();
  CHECK(hv(4) > 0.0);
}

TEST_CASE("equatorial sphere is totally geodesic") {
  const PointGeometry g = point_geometry(latitude_sphere_jet(std::numbers::pi / 2.0, 1.1, 0.3));
  CHECK(g.norm_a2 < 1e-24);
  CHECK(g.norm_h2 < 1e-24);
}

TEST_CASE("frame invariants and orthogonality") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double rho = 0.3 + 1.2 * (u(rng) + 1.0) / 2.0;
    const Jet2 base = latitude_sphere_jet(rho, 1.0 + 0.5 * u(rng), 3.0 * u(rng));
    const Jet2 clif = clifford_jet(3.0 * u(rng), 3.0 * u(rng));
    for (const Jet2* jet : {&base, &clif}) {
      const PointGeometry g = point_geometry(*jet);
      const AmbientVector x = jet->position();
      for (int a = 0; a < g.codim; ++a) {
        CHECK(std::abs(g.normal_frame.col(a).dot(x)) < 1e-10);
        for (int i = 0; i < 2; ++i) {
          CHECK(std::abs(g.normal_frame.col(a).dot(g.tangent_frame.col(i))) < 1e-10);
        }
      }
      CHECK(g.norm_traceless_a2 == doctest::Approx(g.norm_a2 - g.norm_h2 / 2).epsilon(1e-10));
      CHECK(*g.gauss == doctest::Approx(1.0 + (g.norm_h2 - g.norm_a2) / 2.0).epsilon(1e-9));
      for (int a = 0; a < g.codim; ++a) {
        CHECK(g.sff(0, 0, a) + g.sff(1, 1, a) == doctest::Approx(g.mean_curvature(a)));
      }

      // Linear reparameterization of the chart changes frames, not invariants.
      Eigen::Matrix2d m;
      m << 1.0 + u(rng), u(rng), u(rng), 1.5 + u(rng);
      if (std::abs(m.determinant()) < 0.1) continue;
      const PointGeometry r = point_geometry(testing::reparameterize(*jet, m));
      CHECK(std::abs(r.norm_a2 - g.norm_a2) < 1e-10);
      CHECK(std::abs(r.norm_h2 - g.norm_h2) < 1e-10);
      CHECK(std::abs(r.norm_traceless_a2 - g.norm_traceless_a2) < 1e-10);
      CHECK(std::abs(*r.gauss - *g.gauss) < 1e-10);
      CHECK(std::abs(std::abs(*r.kperp) - std::abs(*g.kperp)) < 1e-10);
    }
  }
}

TEST_CASE("scaling law for the background curvature") {
  const double rho = 0.8;
  const Jet2 jet = latitude_sphere_jet(rho, 0.7, 0.2);
  const PointGeometry unit = point_geometry(jet, 1.0);
  for (double lambda : {0.5, 2.0, 3.0}) {
    // Radius lambda means kbar = 1 / lambda^2.
    const PointGeometry g = point_geometry(jet, 1.0 / (lambda * lambda));
    CHECK(g.norm_a2 == doctest::Approx(unit.norm_a2 / (lambda * lambda)).epsilon(1e-13));
    CHECK(g.norm_h2 == doctest::Approx(unit.norm_h2 / (lambda * lambda)).epsilon(1e-13));
    CHECK(g.metric(0, 0) == doctest::Approx(unit.metric(0, 0) * lambda * lambda).epsilon(1e-13));
    CHECK(*g.gauss == doctest::Approx(*unit.gauss / (lambda * lambda)).epsilon(1e-12));
  }
}

TEST_CASE("jet errors") {
  Jet2 off = clifford_jet(0.3, 0.4);
  off.position() *= 1.01;
  CHECK_THROWS_AS(point_geometry(off), Error);
  try {
    point_geometry(off);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OffSphere);
  }

  Jet2 flat = clifford_jet(0.3, 0.4);
  flat.first(1) = flat.first(0);
  try {
    point_geometry(flat);
    FAIL("expected DegenerateJet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateJet);
  }

  CHECK_THROWS_AS(Jet2(2, 3), Error);
  CHECK_THROWS_AS(SecondFundamentalForm(6, 2), Error);
}

TEST_CASE("second fundamental form containers") {
  const double c[8] = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
  // (i, j, alpha) row-major: h(0,1,0) = 3, h(1,0,0) = 5 averaged to 4.
  const SecondFundamentalForm h = SecondFundamentalForm::from_components(2, 2, c);
  CHECK(h(0, 1, 0) == 4.0);
  CHECK(h(1, 0, 0) == 4.0);
  CHECK(h.mean_curvature()(0) == 1.0 + 7.0);
  CHECK(h.mean_curvature()(1) == 2.0 + 8.0);
  CHECK_THROWS_AS(SecondFundamentalForm::from_components(2, 2, std::span(c, 7)), Error);
  CHECK(h.scaled(2.0).norm2() == doctest::Approx(4.0 * h.norm2()));
}
