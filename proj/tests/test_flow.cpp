#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "pinchflow/canonical.hpp"
#include "pinchflow/flow.hpp"

using namespace pinchflow;

namespace {

CanonicalSurface equator() {
  SurfaceParams p;
  p.rho = std::numbers::pi / 2.0;
  return make_surface(SurfaceKind::GeodesicSphere, p);
}

double max_speed(const VelocityField& v) { return v.velocity.colwise().norm().maxCoeff(); }

}  // namespace

TEST_CASE("sphere radius oracle") {
  const double third = std::numbers::pi / 3.0;
  CHECK(sphere_extinction_time(third, 2) == doctest::Approx(0.346574).epsilon(1e-6));
  CHECK(sphere_extinction_time(third, 2) == doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-15));
  CHECK(sphere_ode_oracle(std::numbers::pi / 2.0, 3, 5.0) == doctest::Approx(std::numbers::pi / 2.0));
  // arccos(e^{0.2} / 2) = 0.9138503; the 1e-3 window also covers 0.913504.
  CHECK(sphere_ode_oracle(third, 2, 0.1) == doctest::Approx(0.913850302960281).epsilon(1e-14));
  CHECK(std::abs(sphere_ode_oracle(third, 2, 0.1) - 0.913504) < 1e-3);
  CHECK(sphere_ode_oracle(third, 2, 0.0) == doctest::Approx(third).epsilon(1e-15));
  CHECK_THROWS_AS(sphere_ode_oracle(third, 2, 0.35), Error);
  CHECK_THROWS_AS(sphere_ode_oracle(0.0, 2, 0.1), Error);
  CHECK(std::isinf(sphere_extinction_time(std::numbers::pi / 2.0, 2)));
  // rho' = -n cot(rho), checked by a centred difference.
  const double h = 1e-5, t = 0.2;
  const double rho = sphere_ode_oracle(third, 2, t);
  const double slope = (sphere_ode_oracle(third, 2, t + h) - sphere_ode_oracle(third, 2, t - h)) / (2 * h);
  CHECK(slope == doctest::Approx(-2.0 / std::tan(rho)).epsilon(1e-8));
}

TEST_CASE("velocity of canonical fixtures") {
  CHECK(max_speed(mcf_velocity(equator().sample(64, 128))) <= 1e-8);
  CHECK(max_speed(mcf_velocity(make_surface(SurfaceKind::CliffordTorus).sample(64, 64))) <= 1e-8);

  const CanonicalSurface sphere = make_surface(SurfaceKind::GeodesicSphere);
  const GridSurface s = sphere.sample(64, 128);
  const VelocityField v = mcf_velocity(s);
  const AmbientVector c = sphere.center();
  double worst = 0.0, worst_dir = 0.0;
  for (int i = 1; i < s.nu() - 1; ++i) {
    for (int j = 0; j < s.nv(); ++j) {
      const Eigen::VectorXd w = v.velocity.col(s.index(i, j));
      worst = std::max(worst, std::abs(w.norm() - 2.0 / std::sqrt(3.0)));
      // Toward the centre: along the tangent projection of the centre axis.
      const Eigen::VectorXd f = s.sample(i, j);
      const Eigen::VectorXd toward = (c - c.dot(f) * f).normalized();
      worst_dir = std::max(worst_dir, (w.normalized() - toward).norm());
    }
  }
  CHECK(worst <= 1e-5);
  CHECK(worst_dir <= 1e-5);
  CHECK(v.a2_max == doctest::Approx(2.0 / 3.0).epsilon(1e-5));
}

TEST_CASE("velocity agrees with the frame construction") {
  const GridSurface s = perturb(make_surface(SurfaceKind::Veronese), 32, 64, PerturbMode{}, 0.05);
  const VelocityField v = mcf_velocity(s);
  double worst = 0.0, a2 = 0.0;
  for (int i = 1; i < s.nu() - 1; ++i) {
    for (int j = 0; j < s.nv(); ++j) {
      const PointGeometry g = point_geometry(discrete_jet(s, i, j));
      worst = std::max(worst, (Eigen::VectorXd(v.velocity.col(s.index(i, j))) -
                               Eigen::VectorXd(g.mean_curvature_vector())).norm());
      a2 = std::max(a2, g.norm_a2);
    }
  }
  CHECK(worst <= 1e-8);
  CHECK(v.a2_max == doctest::Approx(a2).epsilon(1e-10));
  const VelocityField one = mcf_velocity(s, 1), three = mcf_velocity(s, 3);
  CHECK(one.velocity == three.velocity);
  CHECK(one.a2_at == three.a2_at);
}

TEST_CASE("steps") {
  FlowState eq;
  eq.surface = equator().sample(64, 128);
  StepInfo info;
  const FlowState next = step(eq, StepOptions{}, &info);
  CHECK(info.max_displacement <= 1e-8);
  CHECK(next.t > eq.t);
  CHECK(next.step_index == 1);

  for (Scheme scheme : {Scheme::Euler, Scheme::RK2}) {
    FlowState st;
    st.surface = perturb(make_surface(SurfaceKind::GeodesicSphere), 32, 64, PerturbMode{}, 0.02);
    StepOptions o;
    o.scheme = scheme;
    double t_prev = st.t;
    for (int k = 0; k < 20; ++k) {
      st = step(st, o);
      CHECK(st.surface.sphere_residual() <= 1e-12);
      CHECK(st.t > t_prev);
      t_prev = st.t;
    }
  }

  FlowState hot;
  hot.surface = make_surface(SurfaceKind::GeodesicSphere).sample(32, 64);
  StepOptions cap;
  cap.ceiling = 0.5;
  try {
    step(hot, cap);
    FAIL("expected BlowupDetected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BlowupDetected);
  }
}

TEST_CASE("polar filter keeps the low longitude modes") {
  const GridSurface s = make_surface(SurfaceKind::GeodesicSphere).sample(32, 64);
  Eigen::MatrixXd field = s.data();
  polar_filter(s, field);
  CHECK((field - s.data()).cwiseAbs().maxCoeff() <= 1e-12);
  Eigen::MatrixXd noise = Eigen::MatrixXd::Zero(s.ambient_dim(), s.size());
  for (int j = 0; j < s.nv(); ++j) noise(0, s.index(1, j)) = (j % 2 == 0) ? 1.0 : -1.0;
  polar_filter(s, noise);
  CHECK(noise.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("geodesic sphere tracks the radius oracle") {
  const CanonicalSurface sphere = make_surface(SurfaceKind::GeodesicSphere);
  RunOptions o;
  o.t_max = 0.1;
  o.stride = 25;
  o.monitor.center = sphere.center();
  o.monitor.gradients = false;
  const RunResult r = run(sphere.sample(64, 128), o);
  CHECK(r.outcome == Outcome::Inconclusive);
  const MonitorRecord& last = r.records.back();
  const double expected = sphere_ode_oracle(sphere.params().rho, 2, last.t);
  CHECK(std::abs(*last.mean_radius - expected) <= 1e-3);
  CHECK(last.t == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(last.harnack_violations == 0);
}

TEST_CASE("radius error converges under refinement") {
  const CanonicalSurface sphere = make_surface(SurfaceKind::GeodesicSphere);
  auto max_error = [&](int nu) {
    RunOptions o;
    o.t_max = 0.2;
    o.stride = 1;
    o.monitor.center = sphere.center();
    o.monitor.gradients = false;
    double worst = 0.0;
    run(sphere.sample(nu, 2 * nu), o, [&](const FlowState&, const MonitorRecord& m) {
      worst = std::max(worst, std::abs(*m.mean_radius - sphere_ode_oracle(sphere.params().rho, 2, m.t)));
    });
    return worst;
  };
  const double coarse = max_error(16), fine = max_error(32);
  MESSAGE("radius error 16: " << coarse << "  32: " << fine);
  CHECK(coarse / fine >= 3.0);
}

TEST_CASE("outcomes") {
  SUBCASE("equator approaches a totally geodesic state") {
    RunOptions o;
    o.t_max = 1.0;
    o.stride = 5;
    double worst = 0.0;
    const RunResult r = run(equator().sample(32, 64), o, [&](const FlowState&, const MonitorRecord& m) {
      worst = std::max(worst, m.a2_max);
    });
    CHECK(r.outcome == Outcome::ApproachTotallyGeodesic);
    CHECK(worst <= 1e-6);
  }
  SUBCASE("a large cfl is classified as numerical blowup") {
    RunOptions o;
    o.step.cfl = 10.0;
    o.step.ceiling = 1e4;
    o.stride = 1;
    o.monitor.gradients = false;
    const RunResult r = run(make_surface(SurfaceKind::GeodesicSphere).sample(32, 64), o);
    CHECK(r.outcome == Outcome::NumericalBlowup);
    CHECK(std::abs(r.records.back().ratio_max - 0.5) > 0.05);
  }
  SUBCASE("t_max ends a run as inconclusive") {
    RunOptions o;
    o.t_max = 0.01;
    o.monitor.gradients = false;
    CHECK(run(make_surface(SurfaceKind::CliffordTorus).sample(16, 16), o).outcome == Outcome::Inconclusive);
  }
}

TEST_CASE("monitor file formats") {
  FlowState st;
  st.surface = perturb(make_surface(SurfaceKind::CliffordTorus), 16, 16, PerturbMode{}, 0.01);
  st.t = 0.125;
  st.step_index = 7;
  std::stringstream snap;
  write_snapshot(snap, st);
  const FlowState back = read_snapshot(snap);
  CHECK(back.t == st.t);
  CHECK(back.step_index == 7);
  CHECK(back.surface.topology() == Topology::Torus);
  CHECK(back.surface.data() == st.surface.data());

  std::stringstream bad("something else\n");
  CHECK_THROWS_AS(read_snapshot(bad), Error);

  MonitorOptions mo;
  mo.cone = ConeParams::thm1(2);
  const MonitorRecord rec = monitor(st, mo);
  std::stringstream csv;
  write_monitor_csv(csv, {rec});
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == kMonitorHeader);
  CHECK(std::count(row.begin(), row.end(), ',') == 11);
  CHECK(rec.area == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi).epsilon(1e-2));
}
