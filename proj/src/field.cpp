#include "pinchflow/field.hpp"

#include <algorithm>
#include <string>

#include "pinchflow/parallel.hpp"

namespace pinchflow {

namespace {

constexpr double kFirst[5] = {1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0};

// h of q expressed in the frames of p.
void project(const PointGeometry& p, const PointGeometry& q, double* out) {
  const int n = p.dim, k = p.codim;
  const TangentMatrix t = p.tangent_frame.transpose() * q.tangent_frame;
  const NormalMatrix nu = p.normal_frame.transpose() * q.normal_frame;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int al = 0; al < k; ++al) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            const double tt = t(a, i) * t(b, j);
            if (tt == 0.0) continue;
            for (int be = 0; be < k; ++be) s += q.sff(i, j, be) * tt * nu(al, be);
          }
        }
        out[(a * n + b) * k + al] = s;
      }
    }
  }
}

}  // namespace

GeometryField geometry_field(const GridSurface& s, double kbar, int threads) {
  GeometryField f;
  f.nu = s.nu();
  f.nv = s.nv();
  f.kbar = kbar;
  f.points.resize(s.size());
  parallel_for(s.size(), worker_count(threads), [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const int i = static_cast<int>(idx) / s.nv(), j = static_cast<int>(idx) % s.nv();
      if (s.is_pole_row(i)) continue;
      f.points[idx] = point_geometry(discrete_jet(s, i, j), kbar);
    }
  });
  return f;
}

bool gradient_available(const GridSurface& s, int i) {
  if (s.topology() == Topology::Torus) return true;
  return i >= 3 && i <= s.nu() - 4;
}

SffGradient discrete_gradient(const GridSurface& s, const GeometryField& field, int i, int j) {
  if (!gradient_available(s, i)) {
    throw Error(ErrorCode::InsufficientStencil,
                "row " + std::to_string(i) + " has a pole row in its stencil");
  }
  const auto& center = field.at(i, j);
  if (!center) throw Error(ErrorCode::InsufficientStencil, "no geometry at the centre");
  const PointGeometry& p = *center;
  const int n = p.dim, k = p.codim;
  const int len = n * n * k;

  // Chart derivatives of the projected tensor.
  double du[kMaxDim * kMaxDim * kMaxCodim] = {};
  double dv[kMaxDim * kMaxDim * kMaxCodim] = {};
  double buf[kMaxDim * kMaxDim * kMaxCodim];
  for (int o = -2; o <= 2; ++o) {
    if (o == 0) continue;
    for (int dir = 0; dir < 2; ++dir) {
      const auto [qi, qj] = dir == 0 ? s.resolve(i + o, j) : s.resolve(i, j + o);
      const auto& q = field.at(qi, qj);
      if (!q) throw Error(ErrorCode::InsufficientStencil, "stencil point without geometry");
      project(p, *q, buf);
      double* acc = dir == 0 ? du : dv;
      for (int x = 0; x < len; ++x) acc[x] += kFirst[o + 2] * buf[x];
    }
  }
  SffGradient g(n, k);
  for (int c = 0; c < n; ++c) {
    const double wu = p.chart_to_frame(c, 0) / s.du();
    const double wv = p.chart_to_frame(c, 1) / s.dv();
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        for (int al = 0; al < k; ++al) {
          const int x = (a * n + b) * k + al;
          g(c, a, b, al) = wu * du[x] + wv * dv[x];
        }
      }
    }
  }
  return g;
}

double refinement_mismatch(const GridSurface& coarse, const GridSurface& fine) {
  const bool sphere = coarse.topology() == Topology::Sphere;
  const int rows = sphere ? 2 * (coarse.nu() - 1) + 1 : 2 * coarse.nu();
  if (fine.topology() != coarse.topology() || fine.nu() != rows || fine.nv() != 2 * coarse.nv() ||
      fine.ambient_dim() != coarse.ambient_dim()) {
    throw Error(ErrorCode::BadDims, "fine grid is not a twofold refinement");
  }
  double worst = 0.0;
  for (int i = 0; i < coarse.nu(); ++i) {
    if (coarse.is_pole_row(i)) continue;
    for (int j = 0; j < coarse.nv(); ++j) {
      const double a = point_geometry(discrete_jet(coarse, i, j)).norm_a2;
      const double b = point_geometry(discrete_jet(fine, 2 * i, 2 * j)).norm_a2;
      worst = std::max(worst, std::abs(a - b) / std::max(b, 1e-12));
    }
  }
  return worst;
}

MarginSummary gradient_margin_field(const GridSurface& s, const GeometryField& field,
                                    int threads) {
  const int workers = worker_count(threads);
  std::vector<MarginSummary> parts(workers);
  std::vector<char> seen(workers, 0);
  parallel_for(s.size(), workers, [&](std::size_t begin, std::size_t end, int w) {
    MarginSummary& m = parts[w];
    for (std::size_t idx = begin; idx < end; ++idx) {
      const int i = static_cast<int>(idx) / s.nv(), j = static_cast<int>(idx) % s.nv();
      if (s.is_pole_row(i)) continue;
      if (!gradient_available(s, i)) {
        ++m.skipped;
        continue;
      }
      const GradientMargins g = gradient_margins(discrete_gradient(s, field, i, j));
      if (!seen[w] || g.m1 < m.m1_min) m.m1_min = g.m1, m.m1_at = {i, j};
      if (!seen[w] || g.m2 < m.m2_min) m.m2_min = g.m2, m.m2_at = {i, j};
      if (g.m3 && (!m.m3_min || *g.m3 < *m.m3_min)) m.m3_min = *g.m3, m.m3_at = {i, j};
      m.grad_a2_max = std::max(m.grad_a2_max, g.grad_a2);
      ++m.points;
      seen[w] = 1;
    }
  });
  // Chunks are in index order, so strict comparisons keep the first minimum.
  MarginSummary out;
  bool any = false;
  for (int w = 0; w < workers; ++w) {
    const MarginSummary& m = parts[w];
    out.skipped += m.skipped;
    if (!seen[w]) continue;
    if (!any || m.m1_min < out.m1_min) out.m1_min = m.m1_min, out.m1_at = m.m1_at;
    if (!any || m.m2_min < out.m2_min) out.m2_min = m.m2_min, out.m2_at = m.m2_at;
    if (m.m3_min && (!out.m3_min || *m.m3_min < *out.m3_min)) {
      out.m3_min = m.m3_min;
      out.m3_at = m.m3_at;
    }
    out.grad_a2_max = std::max(out.grad_a2_max, m.grad_a2_max);
    out.points += m.points;
    any = true;
  }
  return out;
}

}  // namespace pinchflow
