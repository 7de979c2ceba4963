#pragma once

// Pointwise geometry over a whole grid and the discrete covariant gradient
// of the second fundamental form.

#include <array>
#include <optional>
#include <vector>

#include "pinchflow/grid.hpp"
#include "pinchflow/identities.hpp"
#include "pinchflow/tensor.hpp"

namespace pinchflow {

struct GeometryField {
  int nu = 0;
  int nv = 0;
  double kbar = 1.0;
  std::vector<std::optional<PointGeometry>> points;  // empty on pole rows

  const std::optional<PointGeometry>& at(int i, int j) const { return points[i * nv + j]; }
};

/// point_geometry of discrete_jet at every non-pole sample.
GeometryField geometry_field(const GridSurface& surface, double kbar = 1.0, int threads = 0);

/// nabla h at (i, j).  Each stencil neighbour's h is carried as an ambient
/// tensor and projected onto the frames at (i, j) before differencing, so
/// the difference quotient is the covariant derivative.  Throws
/// InsufficientStencil when the stencil reaches a pole row.
SffGradient discrete_gradient(const GridSurface& surface, const GeometryField& field, int i,
                              int j);

/// True if discrete_gradient is defined at (i, j).
bool gradient_available(const GridSurface& surface, int i);

/// Largest relative |A|^2 disagreement between a grid and its twofold
/// refinement at the shared samples.  The fine grid must have 2 nv columns
/// and 2 nu rows (torus) or 2 (nu - 1) + 1 rows (sphere).
double refinement_mismatch(const GridSurface& coarse, const GridSurface& fine);

/// refinement_mismatch above 10%.
inline bool under_resolved(const GridSurface& coarse, const GridSurface& fine) {
  return refinement_mismatch(coarse, fine) > 0.1;
}

struct MarginSummary {
  double m1_min = 0.0;
  double m2_min = 0.0;
  std::optional<double> m3_min;
  std::array<int, 2> m1_at{};
  std::array<int, 2> m2_at{};
  std::array<int, 2> m3_at{};
  double grad_a2_max = 0.0;
  long points = 0;
  long skipped = 0;  // rows without a full stencil
};

MarginSummary gradient_margin_field(const GridSurface& surface, const GeometryField& field,
                                    int threads = 0);

}  // namespace pinchflow
