#include "pinchflow/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace pinchflow {

namespace {

// Fourth-order central differences on offsets -2..2.
constexpr double kFirst[5] = {1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0};
constexpr double kSecond[5] = {-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0};

int wrap(int j, int n) {
  j %= n;
  return j < 0 ? j + n : j;
}

}  // namespace

GridSurface::GridSurface(Topology topology, int nu, int nv, int ambient_dim)
    : topology_(topology), nu_(nu), nv_(nv), ambient_(ambient_dim) {
  if (nu < 5 || nv < 5) {
    throw Error(ErrorCode::BadParams, "grid needs at least 5 samples per direction");
  }
  if (ambient_dim < 4 || ambient_dim > kMaxAmbient) {
    throw Error(ErrorCode::BadDims, "ambient dimension " + std::to_string(ambient_dim));
  }
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (topology == Topology::Sphere) {
    if (nv % 2 != 0) throw Error(ErrorCode::BadParams, "sphere grids need an even nv");
    du_ = std::numbers::pi / (nu - 1);
  } else {
    du_ = two_pi / nu;
  }
  dv_ = two_pi / nv;
  data_.setZero(ambient_dim, static_cast<Eigen::Index>(nu) * nv);
}

double GridSurface::u(int i) const { return du_ * i; }
double GridSurface::v(int j) const { return dv_ * j; }

std::pair<int, int> GridSurface::resolve(int i, int j) const {
  if (topology_ == Topology::Torus) return {wrap(i, nu_), wrap(j, nv_)};
  if (i < 0) return {-i, wrap(j + nv_ / 2, nv_)};
  if (i > nu_ - 1) return {2 * (nu_ - 1) - i, wrap(j + nv_ / 2, nv_)};
  return {i, wrap(j, nv_)};
}

double GridSurface::sphere_residual() const {
  double worst = 0.0;
  for (Eigen::Index c = 0; c < data_.cols(); ++c) {
    worst = std::max(worst, std::abs(data_.col(c).norm() - 1.0));
  }
  return worst;
}

void GridSurface::renormalize() { data_.colwise().normalize(); }

Jet2 discrete_jet(const GridSurface& s, int i, int j) {
  if (s.is_pole_row(i)) {
    throw Error(ErrorCode::PoleRow, "row " + std::to_string(i) + " is a pole row");
  }
  const int m = s.ambient_dim();
  Jet2 jet(2, m);
  jet.position() = s.sample(i, j);

  AmbientVector fu = AmbientVector::Zero(m), fv = AmbientVector::Zero(m);
  AmbientVector fuu = AmbientVector::Zero(m), fvv = AmbientVector::Zero(m);
  AmbientVector fuv = AmbientVector::Zero(m);
  for (int o = -2; o <= 2; ++o) {
    const auto [iu, ju] = s.resolve(i + o, j);
    const auto [iv, jv] = s.resolve(i, j + o);
    const auto pu = s.sample(iu, ju);
    const auto pv = s.sample(iv, jv);
    fu += kFirst[o + 2] * pu;
    fuu += kSecond[o + 2] * pu;
    fv += kFirst[o + 2] * pv;
    fvv += kSecond[o + 2] * pv;
  }
  for (int a = -2; a <= 2; ++a) {
    if (a == 0) continue;
    for (int b = -2; b <= 2; ++b) {
      if (b == 0) continue;
      const auto [iq, jq] = s.resolve(i + a, j + b);
      fuv += (kFirst[a + 2] * kFirst[b + 2]) * s.sample(iq, jq);
    }
  }
  const double du = s.du(), dv = s.dv();
  jet.first(0) = fu / du;
  jet.first(1) = fv / dv;
  jet.set_second(0, 0, fuu / (du * du));
  jet.set_second(1, 1, fvv / (dv * dv));
  jet.set_second(0, 1, fuv / (du * dv));
  return jet;
}

AmbientVector pole_estimate(const GridSurface& s, bool north) {
  const int m = s.ambient_dim();
  auto ring = [&](int r) {
    const int row = north ? r : s.nu() - 1 - r;
    AmbientVector a = AmbientVector::Zero(m);
    for (int j = 0; j < s.nv(); ++j) a += s.sample(row, j);
    return AmbientVector(a / s.nv());
  };
  // Ring means are even in theta; these weights cancel the theta^2 and
  // theta^4 terms.
  const AmbientVector p = 1.5 * ring(1) - 0.6 * ring(2) + 0.1 * ring(3);
  return p.normalized();
}

}  // namespace pinchflow
