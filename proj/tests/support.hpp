#pragma once

// Shared helpers for the unit tests: seeded random second fundamental forms
// and hand-written jets that do not go through the canonical module.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pinchflow/tensor.hpp"

namespace pinchflow::testing {

inline SecondFundamentalForm random_sff(std::mt19937_64& rng, int n, int k) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>(n * n * k));
  for (double& x : c) x = u(rng);
  return SecondFundamentalForm::from_components(n, k, c);
}

inline SecondFundamentalForm traceless_part(const SecondFundamentalForm& h) {
  const Eigen::VectorXd mean = h.mean_curvature();
  SecondFundamentalForm out(h.dim(), h.codim());
  for (int a = 0; a < h.codim(); ++a) {
    for (int i = 0; i < h.dim(); ++i) {
      for (int j = i; j < h.dim(); ++j) {
        out.set(i, j, a, h(i, j, a) - (i == j ? mean(a) / h.dim() : 0.0));
      }
    }
  }
  return out;
}

inline SecondFundamentalForm from_two(const Eigen::Matrix2d& h1, const Eigen::Matrix2d& h2) {
  const TangentMatrix m[2] = {h1, h2};
  return SecondFundamentalForm::from_matrices(m);
}

/// Slices of h as plain dynamic matrices.
inline std::vector<Eigen::MatrixXd> slices(const SecondFundamentalForm& h) {
  std::vector<Eigen::MatrixXd> out;
  for (int a = 0; a < h.codim(); ++a) out.emplace_back(h.slice(a));
  return out;
}

/// Clifford chart (cos u, sin u, cos v, sin v, 0)/sqrt2, differentiated by hand.
inline Jet2 clifford_jet(double u, double v) {
  const double s = 1.0 / std::sqrt(2.0);
  Jet2 jet(2, 5);
  jet.position() << s * std::cos(u), s * std::sin(u), s * std::cos(v), s * std::sin(v), 0.0;
  jet.first(0) << -s * std::sin(u), s * std::cos(u), 0.0, 0.0, 0.0;
  jet.first(1) << 0.0, 0.0, -s * std::sin(v), s * std::cos(v), 0.0;
  AmbientVector uu(5), vv(5), uv(5);
  uu << -s * std::cos(u), -s * std::sin(u), 0.0, 0.0, 0.0;
  vv << 0.0, 0.0, -s * std::cos(v), -s * std::sin(v), 0.0;
  uv.setZero();
  jet.set_second(0, 0, uu);
  jet.set_second(1, 1, vv);
  jet.set_second(0, 1, uv);
  return jet;
}

/// Latitude 2-sphere of geodesic radius rho about e_4 in S^4, by hand:
/// F = (sin rho sin t cos p, sin rho sin t sin p, sin rho cos t, 0, cos rho).
inline Jet2 latitude_sphere_jet(double rho, double t, double p) {
  const double r = std::sin(rho);
  Jet2 jet(2, 5);
  jet.position() << r * std::sin(t) * std::cos(p), r * std::sin(t) * std::sin(p),
      r * std::cos(t), 0.0, std::cos(rho);
  jet.first(0) << r * std::cos(t) * std::cos(p), r * std::cos(t) * std::sin(p),
      -r * std::sin(t), 0.0, 0.0;
  jet.first(1) << -r * std::sin(t) * std::sin(p), r * std::sin(t) * std::cos(p), 0.0, 0.0, 0.0;
  AmbientVector tt(5), pp(5), tp(5);
  tt << -r * std::sin(t) * std::cos(p), -r * std::sin(t) * std::sin(p), -r * std::cos(t), 0.0,
      0.0;
  pp << -r * std::sin(t) * std::cos(p), -r * std::sin(t) * std::sin(p), 0.0, 0.0, 0.0;
  tp << -r * std::cos(t) * std::sin(p), r * std::cos(t) * std::cos(p), 0.0, 0.0, 0.0;
  jet.set_second(0, 0, tt);
  jet.set_second(1, 1, pp);
  jet.set_second(0, 1, tp);
  return jet;
}

/// The jet of the same surface in the linearly reparameterized chart
/// u = M w.
inline Jet2 reparameterize(const Jet2& jet, const Eigen::Matrix2d& m) {
  Jet2 out(jet.dim(), jet.ambient_dim());
  out.position() = jet.position();
  for (int a = 0; a < 2; ++a) {
    AmbientVector d = AmbientVector::Zero(jet.ambient_dim());
    for (int i = 0; i < 2; ++i) d += m(i, a) * jet.first(i);
    out.first(a) = d;
  }
  for (int a = 0; a < 2; ++a) {
    for (int b = a; b < 2; ++b) {
      AmbientVector d = AmbientVector::Zero(jet.ambient_dim());
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) d += m(i, a) * m(j, b) * jet.second(i, j);
      }
      out.set_second(a, b, d);
    }
  }
  return out;
}

}  // namespace pinchflow::testing
