#pragma once

// Pointwise extrinsic geometry of an immersed n-submanifold of the unit
// sphere S^{n+k} in R^{n+k+1}, computed from a second-order jet.

#include <array>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "pinchflow/errors.hpp"

namespace pinchflow {

inline constexpr int kMaxDim = 5;
inline constexpr int kMaxCodim = 4;
inline constexpr int kMaxAmbient = kMaxDim + kMaxCodim + 1;

// Fixed-capacity, dynamically sized Eigen types keep the per-point hot path
// free of heap allocations.
using AmbientVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxAmbient, 1>;
using AmbientFrame =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient, kMaxAmbient>;
using TangentMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using NormalVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxCodim, 1>;
using NormalMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxCodim, kMaxCodim>;

inline constexpr double kOnSphereTol = 1e-6;
inline constexpr double kGramDetMin = 1e-12;
inline constexpr double kNormalResidualMin = 1e-8;

/// Second-order jet of an immersion F into the unit sphere: F, dF/du_i and
/// the symmetric d2F/du_i du_j at one parameter point.
class Jet2 {
 public:
  Jet2() = default;
  Jet2(int dim, int ambient_dim);

  int dim() const { return dim_; }
  int ambient_dim() const { return ambient_; }
  int codim() const { return ambient_ - 1 - dim_; }

  AmbientVector& position() { return position_; }
  const AmbientVector& position() const { return position_; }

  auto first(int i) { return first_.col(i); }
  auto first(int i) const { return first_.col(i); }
  const AmbientFrame& first_derivatives() const { return first_; }

  // Writes both (i,j) and (j,i) so symmetry holds exactly.
  void set_second(int i, int j, const AmbientVector& value);
  auto second(int i, int j) const { return second_.col(i * dim_ + j); }

 private:
  int dim_ = 0;
  int ambient_ = 0;
  AmbientVector position_;
  AmbientFrame first_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAmbient, kMaxDim * kMaxDim>
      second_;
};

/// h_{ij alpha} in orthonormal tangent and normal frames; symmetric in (i, j).
class SecondFundamentalForm {
 public:
  SecondFundamentalForm() = default;
  SecondFundamentalForm(int dim, int codim);

  /// Components in row-major (i, j, alpha) order; symmetrized by averaging.
  static SecondFundamentalForm from_components(int dim, int codim,
                                               std::span<const double> values);

  /// One symmetric dim x dim matrix per normal direction.
  static SecondFundamentalForm from_matrices(std::span<const TangentMatrix> per_normal);

  int dim() const { return dim_; }
  int codim() const { return codim_; }

  double operator()(int i, int j, int alpha) const { return c_[index(i, j, alpha)]; }
  void set(int i, int j, int alpha, double value) {
    c_[index(i, j, alpha)] = value;
    c_[index(j, i, alpha)] = value;
  }

  /// The matrix h(., ., alpha).
  TangentMatrix slice(int alpha) const;

  /// H_alpha = sum_i h_{ii alpha}.
  NormalVector mean_curvature() const;
  double norm2() const;
  SecondFundamentalForm scaled(double factor) const;

 private:
  int index(int i, int j, int alpha) const { return (i * kMaxDim + j) * kMaxCodim + alpha; }

  int dim_ = 0;
  int codim_ = 0;
  std::array<double, kMaxDim * kMaxDim * kMaxCodim> c_{};
};

struct PointGeometry {
  int dim = 0;
  int codim = 0;
  TangentMatrix metric;
  TangentMatrix metric_inv;
  AmbientFrame tangent_frame;  // ambient x dim, orthonormal columns
  AmbientFrame normal_frame;   // ambient x codim, orthonormal columns
  // Row a holds the chart coefficients of e_a = sum_u T(a,u) dF/du_u.
  TangentMatrix chart_to_frame;
  SecondFundamentalForm sff;
  NormalVector mean_curvature;
  double norm_a2 = 0.0;
  double norm_h2 = 0.0;
  double norm_traceless_a2 = 0.0;
  std::optional<double> kperp;  // only dim == codim == 2
  std::optional<double> gauss;  // only dim == 2
  double kbar = 1.0;

  /// The mean curvature vector sum_alpha H_alpha nu_alpha in ambient
  /// coordinates (unit-sphere scale).
  AmbientVector mean_curvature_vector() const;
};

/// Extrinsic geometry from a jet on the unit sphere.  kbar != 1 reports the
/// geometry of the same surface rescaled into the sphere of curvature kbar.
PointGeometry point_geometry(const Jet2& jet, double kbar = 1.0);

/// Normal curvature R^perp_{1212} for dim == codim == 2.
double normal_curvature(const SecondFundamentalForm& h);

}  // namespace pinchflow
