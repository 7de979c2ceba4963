#include "pinchflow/canonical.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "pinchflow/taylor.hpp"

namespace pinchflow {

namespace {

template <class T>
using Point = std::array<T, kMaxAmbient>;

template <class T>
Point<T> geodesic_sphere_chart(const SurfaceParams& p, const T* angle, T zero) {
  using std::cos;
  using std::sin;
  Point<T> f;
  f.fill(zero);
  const double r = std::sin(p.rho);
  T prod = zero + 1.0;
  for (int i = 0; i < p.n; ++i) {
    f[i] = r * (prod * cos(angle[i]));
    prod = prod * sin(angle[i]);
  }
  f[p.n] = r * prod;
  f[p.m] = zero + std::cos(p.rho);
  return f;
}

template <class T>
Point<T> torus_chart(double r1, double r2, const T* uv, T zero) {
  using std::cos;
  using std::sin;
  Point<T> f;
  f.fill(zero);
  f[0] = r1 * cos(uv[0]);
  f[1] = r1 * sin(uv[0]);
  f[2] = r2 * cos(uv[1]);
  f[3] = r2 * sin(uv[1]);
  return f;
}

template <class T>
Point<T> veronese_chart(const T* uv, T zero) {
  using std::cos;
  using std::sin;
  Point<T> f;
  f.fill(zero);
  const T x = sin(uv[0]) * cos(uv[1]);
  const T y = sin(uv[0]) * sin(uv[1]);
  const T z = cos(uv[0]);
  const double s3 = std::sqrt(3.0);
  f[0] = s3 * (x * y);
  f[1] = s3 * (x * z);
  f[2] = s3 * (y * z);
  f[3] = (0.5 * s3) * (x * x - y * y);
  f[4] = 0.5 * (x * x + y * y - 2.0 * (z * z));
  return f;
}

template <class T>
Point<T> evaluate(SurfaceKind kind, const SurfaceParams& p, const T* u, T zero) {
  switch (kind) {
    case SurfaceKind::GeodesicSphere: return geodesic_sphere_chart(p, u, zero);
    case SurfaceKind::CliffordTorus:
      return torus_chart(std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0, u, zero);
    case SurfaceKind::FlatTorus: return torus_chart(p.r1, p.r2, u, zero);
    case SurfaceKind::Veronese: return veronese_chart(u, zero);
  }
  return {};
}

}  // namespace

std::string_view surface_name(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::GeodesicSphere: return "geodesic-sphere";
    case SurfaceKind::CliffordTorus: return "clifford";
    case SurfaceKind::FlatTorus: return "flat-torus";
    case SurfaceKind::Veronese: return "veronese";
  }
  return "unknown";
}

SurfaceKind surface_kind(std::string_view name) {
  for (SurfaceKind k : {SurfaceKind::GeodesicSphere, SurfaceKind::CliffordTorus,
                        SurfaceKind::FlatTorus, SurfaceKind::Veronese}) {
    if (surface_name(k) == name) return k;
  }
  throw Error(ErrorCode::BadParams, "unknown surface '" + std::string(name) + "'");
}

CanonicalSurface make_surface(SurfaceKind kind, const SurfaceParams& params) {
  CanonicalSurface s;
  s.kind_ = kind;
  s.params_ = params;
  ReferenceInvariants& ref = s.reference_;
  switch (kind) {
    case SurfaceKind::GeodesicSphere: {
      const int n = params.n;
      const int m = params.m;
      if (!(params.rho > 0.0 && params.rho < std::numbers::pi)) {
        throw Error(ErrorCode::BadParams, "geodesic sphere needs 0 < rho < pi");
      }
      if (n < 1 || n > kMaxDim || m < n + 1 || m - n > kMaxCodim || m + 1 > kMaxAmbient) {
        throw Error(ErrorCode::BadParams, "geodesic sphere dimensions (n, m) = (" +
                                              std::to_string(n) + ", " + std::to_string(m) +
                                              ") unsupported");
      }
      s.dim_ = n;
      s.ambient_ = m + 1;
      const double cot = std::cos(params.rho) / std::sin(params.rho);
      ref.norm_h2 = n * n * cot * cot;
      ref.norm_a2 = n * cot * cot;
      ref.norm_traceless_a2 = 0.0;
      if (n == 2) ref.gauss = 1.0 + cot * cot;
      if (n == 2 && m == 4) ref.kperp_abs = 0.0;
      ref.minimal = std::abs(cot) < 1e-15;
      break;
    }
    case SurfaceKind::CliffordTorus:
      s.params_.r1 = s.params_.r2 = std::numbers::sqrt2 / 2.0;
      [[fallthrough]];
    case SurfaceKind::FlatTorus: {
      const double r1 = s.params_.r1, r2 = s.params_.r2;
      if (!(r1 > 0.0 && r2 > 0.0) || std::abs(r1 * r1 + r2 * r2 - 1.0) > 1e-12) {
        throw Error(ErrorCode::BadParams, "flat torus needs r1, r2 > 0 with r1^2 + r2^2 = 1");
      }
      const double k1 = r2 / r1, k2 = -r1 / r2;
      ref.norm_a2 = k1 * k1 + k2 * k2;
      ref.norm_h2 = (k1 + k2) * (k1 + k2);
      ref.norm_traceless_a2 = ref.norm_a2 - ref.norm_h2 / 2.0;
      ref.kperp_abs = 0.0;
      ref.gauss = 0.0;
      ref.minimal = std::abs(k1 + k2) < 1e-15;
      break;
    }
    case SurfaceKind::Veronese:
      ref.norm_a2 = 4.0 / 3.0;
      ref.norm_h2 = 0.0;
      ref.norm_traceless_a2 = 4.0 / 3.0;
      ref.kperp_abs = 2.0 / 3.0;
      ref.gauss = 1.0 / 3.0;
      ref.minimal = true;
      break;
  }
  return s;
}

Jet2 CanonicalSurface::jet(std::span<const double> u) const {
  if (static_cast<int>(u.size()) != dim_) {
    throw Error(ErrorCode::BadDims, "chart takes " + std::to_string(dim_) + " parameters");
  }
  std::array<Taylor2, kMaxDim> vars;
  for (int i = 0; i < dim_; ++i) vars[i] = Taylor2::variable(u[i], i, dim_);
  const Point<Taylor2> f = evaluate(kind_, params_, vars.data(), Taylor2(0.0, dim_));

  Jet2 jet(dim_, ambient_);
  for (int c = 0; c < ambient_; ++c) jet.position()(c) = f[c].value();
  for (int i = 0; i < dim_; ++i) {
    for (int c = 0; c < ambient_; ++c) jet.first(i)(c) = f[c].d(i);
  }
  AmbientVector col(ambient_);
  for (int i = 0; i < dim_; ++i) {
    for (int j = i; j < dim_; ++j) {
      for (int c = 0; c < ambient_; ++c) col(c) = f[c].dd(i, j);
      jet.set_second(i, j, col);
    }
  }
  return jet;
}

AmbientVector CanonicalSurface::position(double u, double v) const {
  if (dim_ != 2) throw Error(ErrorCode::BadDims, "grid charts are 2-dimensional");
  const double uv[2] = {u, v};
  const Point<double> f = evaluate(kind_, params_, uv, 0.0);
  AmbientVector out(ambient_);
  for (int c = 0; c < ambient_; ++c) out(c) = f[c];
  return out;
}

Topology CanonicalSurface::topology() const {
  return (kind_ == SurfaceKind::GeodesicSphere || kind_ == SurfaceKind::Veronese)
             ? Topology::Sphere
             : Topology::Torus;
}

GridSurface CanonicalSurface::sample(int nu, int nv) const {
  if (dim_ != 2) throw Error(ErrorCode::BadDims, "grid charts are 2-dimensional");
  GridSurface g(topology(), nu, nv, ambient_);
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) g.sample(i, j) = position(g.u(i), g.v(j));
  }
  // Pole rows are single points; make all their columns bitwise equal.
  if (topology() == Topology::Sphere) {
    for (int j = 1; j < nv; ++j) {
      g.sample(0, j) = g.sample(0, 0);
      g.sample(nu - 1, j) = g.sample(nu - 1, 0);
    }
  }
  return g;
}

AmbientVector CanonicalSurface::center() const {
  return AmbientVector::Unit(ambient_, ambient_ - 1);
}

GridSurface perturb(const CanonicalSurface& surface, int nu, int nv, const PerturbMode& mode,
                    double amplitude) {
  GridSurface base = surface.sample(nu, nv);
  if (amplitude == 0.0) return base;
  const int m = surface.ambient_dim();
  const int axis = mode.axis < 0 ? m - 1 : mode.axis;
  if (axis >= m) throw Error(ErrorCode::BadParams, "perturbation axis out of range");
  const bool sphere = base.topology() == Topology::Sphere;

  auto phi = [&](double u, double v) {
    if (sphere) {
      return std::pow(std::sin(u), mode.kv) * std::cos(mode.ku * u) * std::cos(mode.kv * v);
    }
    return std::cos(mode.ku * u) * std::cos(mode.kv * v);
  };

  GridSurface out = base;
  // Tangent frames of the unperturbed chart, for the orientation check.
  std::vector<AmbientFrame> tangent(static_cast<std::size_t>(base.size()));
  const AmbientVector e_axis = AmbientVector::Unit(m, axis);
  for (int i = 0; i < nu; ++i) {
    if (base.is_pole_row(i)) continue;
    for (int j = 0; j < nv; ++j) {
      const double uv[2] = {base.u(i), base.v(j)};
      const PointGeometry g = point_geometry(surface.jet(uv));
      tangent[base.index(i, j)] = g.tangent_frame;
      const AmbientVector d = g.normal_frame * (g.normal_frame.transpose() * e_axis);
      out.sample(i, j) = (base.sample(i, j) + amplitude * phi(uv[0], uv[1]) * d).normalized();
    }
  }
  if (sphere && mode.kv == 0) {
    const AmbientVector north = pole_estimate(out, true);
    const AmbientVector south = pole_estimate(out, false);
    for (int j = 0; j < nv; ++j) {
      out.sample(0, j) = north;
      out.sample(nu - 1, j) = south;
    }
  }

  for (int i = 0; i < nu; ++i) {
    if (base.is_pole_row(i)) continue;
    for (int j = 0; j < nv; ++j) {
      const AmbientFrame& e = tangent[base.index(i, j)];
      auto area = [&](const GridSurface& s) {
        const auto [i1, j1] = s.resolve(i + 1, j);
        const auto [i2, j2] = s.resolve(i, j + 1);
        const Eigen::Vector2d a = e.transpose() * (s.sample(i1, j1) - s.sample(i, j));
        const Eigen::Vector2d b = e.transpose() * (s.sample(i2, j2) - s.sample(i, j));
        return a(0) * b(1) - a(1) * b(0);
      };
      if (!(area(out) * area(base) > 0.0)) {
        throw Error(ErrorCode::DegenerateAfterPerturb,
                    "grid triangle at (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") collapsed");
      }
      try {
        (void)point_geometry(discrete_jet(out, i, j));
      } catch (const Error& err) {
        throw Error(ErrorCode::DegenerateAfterPerturb, err.what());
      }
    }
  }
  return out;
}

}  // namespace pinchflow
