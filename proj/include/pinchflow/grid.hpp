#pragma once

// Structured grids of points on the unit sphere and fourth-order finite
// difference jets.
//
// Torus grids are doubly periodic with u_i = 2 pi i / nu, v_j = 2 pi j / nv.
// Sphere grids are latitude-longitude: theta_i = pi i / (nu - 1) including
// both pole rows, phi_j = 2 pi j / nv periodic, nv even.  Stencils that run
// past a pole reflect through it: row -r at column j is row r at column
// j + nv/2.

#include <utility>

#include <Eigen/Dense>

#include "pinchflow/tensor.hpp"

namespace pinchflow {

enum class Topology { Torus, Sphere };

class GridSurface {
 public:
  GridSurface() = default;
  GridSurface(Topology topology, int nu, int nv, int ambient_dim);

  Topology topology() const { return topology_; }
  int nu() const { return nu_; }
  int nv() const { return nv_; }
  int ambient_dim() const { return ambient_; }
  int dim() const { return 2; }
  int size() const { return nu_ * nv_; }

  double du() const { return du_; }
  double dv() const { return dv_; }
  double u(int i) const;
  double v(int j) const;

  bool is_pole_row(int i) const {
    return topology_ == Topology::Sphere && (i == 0 || i == nu_ - 1);
  }

  int index(int i, int j) const { return i * nv_ + j; }
  auto sample(int i, int j) { return data_.col(index(i, j)); }
  auto sample(int i, int j) const { return data_.col(index(i, j)); }

  /// Maps stencil indices that may leave the grid (periodic wrap, or
  /// reflection through a pole) to the stored sample.
  std::pair<int, int> resolve(int i, int j) const;

  /// Columns are the samples in row-major (i, j) order.
  Eigen::MatrixXd& data() { return data_; }
  const Eigen::MatrixXd& data() const { return data_; }

  /// Largest deviation of |F| from 1.
  double sphere_residual() const;
  void renormalize();

 private:
  Topology topology_ = Topology::Torus;
  int nu_ = 0;
  int nv_ = 0;
  int ambient_ = 0;
  double du_ = 0.0;
  double dv_ = 0.0;
  Eigen::MatrixXd data_;
};

/// Fourth-order central-difference jet at (i, j).  Throws PoleRow on the
/// pole rows of a Sphere grid.
Jet2 discrete_jet(const GridSurface& surface, int i, int j);

/// Pole position extrapolated from the means of the three nearest rings,
/// 1.5 m1 - 0.6 m2 + 0.1 m3, put back on the sphere.  The O(dtheta^2) and
/// O(dtheta^4) offsets of a plain ring average cancel.
AmbientVector pole_estimate(const GridSurface& surface, bool north);

}  // namespace pinchflow
