#pragma once

// Special orthonormal frames for codimension-two surfaces.  In the special
// frame the second fundamental form reads
//
//   h = [ |H|/2 + a      0     ] nu_1  +  [ b   c ] nu_2
//       [     0      |H|/2 - a ]          [ c  -b ]
//
// with nu_1 = H/|H| and the tangent frame diagonalizing h(nu_1).

#include <Eigen/Dense>

#include "pinchflow/tensor.hpp"

namespace pinchflow {

inline constexpr double kMeanCurvatureZero = 1e-12;

struct ABCFrame {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double h_norm = 0.0;
  // Rows are the special tangent vectors in input tangent coordinates.
  Eigen::Matrix2d tangent_rotation = Eigen::Matrix2d::Identity();
  // Rows are nu_1, nu_2 in input normal coordinates.
  Eigen::Matrix2d normal_rotation = Eigen::Matrix2d::Identity();
  // True when |H| was below kMeanCurvatureZero and nu_1 came from the
  // maximal-|h(nu)| rule instead of H/|H|.
  bool fallback = false;

  double kperp() const { return 2.0 * a * c; }
  double norm_traceless2() const { return 2.0 * (a * a + b * b + c * c); }
};

struct TracelessSplit {
  double norm_a1_2 = 0.0;
  double norm_aminus_2 = 0.0;
};

/// Rotates tangent and normal frames (both orientation preserving) into the
/// special frame.  a >= 0 always; the sign of c carries the normal
/// orientation, so normal_curvature(h) == 2ac.
ABCFrame specialize(const SecondFundamentalForm& h);

/// Inverse of specialize: the second fundamental form in the input frames.
SecondFundamentalForm reconstruct(const ABCFrame& frame);

/// The second fundamental form directly in the special frame.
SecondFundamentalForm special_form(double a, double b, double c, double h_norm);

/// |A_1|^2 (traceless part along nu_1) and |A_-|^2 (everything normal to nu_1).
TracelessSplit split_traceless(const SecondFundamentalForm& h);

/// Unit nu_1 in input normal coordinates: H/|H|, or when H vanishes the
/// direction maximizing |h(nu)| with ties resolved toward the lowest input
/// index.
NormalVector principal_normal(const SecondFundamentalForm& h);

}  // namespace pinchflow
