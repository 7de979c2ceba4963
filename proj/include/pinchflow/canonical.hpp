#pragma once

// Closed-form test surfaces in round spheres with their exact invariants.
//
//   geodesic-sphere  latitude sphere of geodesic radius rho about the last
//                    ambient axis, dimension n inside S^m
//   clifford         (cos u, sin u, cos v, sin v, 0) / sqrt(2) in S^4
//   flat-torus       (r1 cos u, r1 sin u, r2 cos v, r2 sin v, 0), r1^2 + r2^2 = 1
//   veronese         the degree-two embedding of RP^2 in S^4, charted by the
//                    unit sphere (theta, phi) as a double cover

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "pinchflow/grid.hpp"
#include "pinchflow/tensor.hpp"

namespace pinchflow {

enum class SurfaceKind { GeodesicSphere, CliffordTorus, FlatTorus, Veronese };

std::string_view surface_name(SurfaceKind kind);
/// Accepts the CLI names above; BadParams otherwise.
SurfaceKind surface_kind(std::string_view name);

struct SurfaceParams {
  double rho = 1.0471975511965976;  // pi / 3
  int n = 2;
  int m = 4;
  double r1 = 0.6;
  double r2 = 0.8;
};

struct ReferenceInvariants {
  double norm_a2 = 0.0;
  double norm_h2 = 0.0;
  double norm_traceless_a2 = 0.0;
  std::optional<double> kperp_abs;  // dim = codim = 2
  std::optional<double> gauss;      // dim = 2
  bool minimal = false;
};

class CanonicalSurface {
 public:
  SurfaceKind kind() const { return kind_; }
  const SurfaceParams& params() const { return params_; }
  int dim() const { return dim_; }
  int ambient_dim() const { return ambient_; }
  const ReferenceInvariants& reference() const { return reference_; }

  /// Exact jet at chart parameters u (length dim).  GeodesicSphere uses
  /// hyperspherical angles; the 2-dimensional surfaces use the grid chart.
  Jet2 jet(std::span<const double> u) const;
  AmbientVector position(double u, double v) const;

  /// Grid topology of the 2-dimensional chart.
  Topology topology() const;
  /// Exact samples on a grid (dim 2 only).
  GridSurface sample(int nu, int nv) const;
  /// Center of a geodesic sphere (the last ambient axis).
  AmbientVector center() const;

 private:
  friend CanonicalSurface make_surface(SurfaceKind, const SurfaceParams&);
  SurfaceKind kind_ = SurfaceKind::CliffordTorus;
  SurfaceParams params_;
  int dim_ = 2;
  int ambient_ = 5;
  ReferenceInvariants reference_;
};

CanonicalSurface make_surface(SurfaceKind kind, const SurfaceParams& params = {});

/// Normal perturbation mode.  The displacement at a sample is
/// phi * P_N(e_axis), the normal projection of an ambient axis, where
/// phi = cos(ku u) cos(kv v) on tori and
/// phi = sin^kv(theta) cos(ku theta) cos(kv phi) on sphere charts (smooth
/// through the poles).  axis < 0 selects the last ambient axis.
struct PerturbMode {
  int ku = 2;
  int kv = 2;
  int axis = -1;
};

/// Samples the chart, displaces by amplitude * mode and renormalizes.
/// DegenerateAfterPerturb if a grid triangle flips or collapses relative to
/// the unperturbed tangent plane, or a jet becomes degenerate.
GridSurface perturb(const CanonicalSurface& surface, int nu, int nv, const PerturbMode& mode,
                    double amplitude);

}  // namespace pinchflow
