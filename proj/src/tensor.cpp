#include "pinchflow/tensor.hpp"

#include <cmath>
#include <string>

namespace pinchflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateJet: return "DegenerateJet";
    case ErrorCode::OffSphere: return "OffSphere";
    case ErrorCode::BadDims: return "BadDims";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::InsufficientStencil: return "InsufficientStencil";
    case ErrorCode::DegenerateAfterPerturb: return "DegenerateAfterPerturb";
    case ErrorCode::EmptyFeasibleSet: return "EmptyFeasibleSet";
    case ErrorCode::PoleRow: return "PoleRow";
    case ErrorCode::BlowupDetected: return "BlowupDetected";
    case ErrorCode::Extinct: return "Extinct";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

Jet2::Jet2(int dim, int ambient_dim) : dim_(dim), ambient_(ambient_dim) {
  if (dim < 1 || dim > kMaxDim || ambient_dim > kMaxAmbient || ambient_dim < dim + 2) {
    throw Error(ErrorCode::BadDims, "jet dims (" + std::to_string(dim) + ", " +
                                        std::to_string(ambient_dim) + ") unsupported");
  }
  position_ = AmbientVector::Zero(ambient_dim);
  first_ = AmbientFrame::Zero(ambient_dim, dim);
  second_.setZero(ambient_dim, dim * dim);
}

void Jet2::set_second(int i, int j, const AmbientVector& value) {
  second_.col(i * dim_ + j) = value;
  second_.col(j * dim_ + i) = value;
}

SecondFundamentalForm::SecondFundamentalForm(int dim, int codim) : dim_(dim), codim_(codim) {
  if (dim < 1 || dim > kMaxDim || codim < 1 || codim > kMaxCodim) {
    throw Error(ErrorCode::BadDims, "second fundamental form dims (" + std::to_string(dim) +
                                        ", " + std::to_string(codim) + ") unsupported");
  }
}

SecondFundamentalForm SecondFundamentalForm::from_components(int dim, int codim,
                                                             std::span<const double> values) {
  SecondFundamentalForm h(dim, codim);
  if (values.size() != static_cast<std::size_t>(dim * dim * codim)) {
    throw Error(ErrorCode::BadDims, "expected " + std::to_string(dim * dim * codim) +
                                        " components, got " + std::to_string(values.size()));
  }
  auto at = [&](int i, int j, int a) { return values[(i * dim + j) * codim + a]; };
  for (int a = 0; a < codim; ++a) {
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) h.set(i, j, a, 0.5 * (at(i, j, a) + at(j, i, a)));
    }
  }
  return h;
}

SecondFundamentalForm SecondFundamentalForm::from_matrices(
    std::span<const TangentMatrix> per_normal) {
  if (per_normal.empty()) throw Error(ErrorCode::BadDims, "no normal directions");
  const int dim = static_cast<int>(per_normal.front().rows());
  SecondFundamentalForm h(dim, static_cast<int>(per_normal.size()));
  for (int a = 0; a < h.codim(); ++a) {
    const auto& m = per_normal[a];
    if (m.rows() != dim || m.cols() != dim) {
      throw Error(ErrorCode::BadDims, "normal slices must all be square of equal size");
    }
    for (int i = 0; i < dim; ++i) {
      for (int j = i; j < dim; ++j) h.set(i, j, a, 0.5 * (m(i, j) + m(j, i)));
    }
  }
  return h;
}

TangentMatrix SecondFundamentalForm::slice(int alpha) const {
  TangentMatrix m(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) m(i, j) = (*this)(i, j, alpha);
  }
  return m;
}

NormalVector SecondFundamentalForm::mean_curvature() const {
  NormalVector mean = NormalVector::Zero(codim_);
  for (int a = 0; a < codim_; ++a) {
    for (int i = 0; i < dim_; ++i) mean(a) += (*this)(i, i, a);
  }
  return mean;
}

double SecondFundamentalForm::norm2() const {
  double s = 0.0;
  for (int a = 0; a < codim_; ++a) {
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) s += (*this)(i, j, a) * (*this)(i, j, a);
    }
  }
  return s;
}

SecondFundamentalForm SecondFundamentalForm::scaled(double factor) const {
  SecondFundamentalForm out = *this;
  for (double& v : out.c_) v *= factor;
  return out;
}

AmbientVector PointGeometry::mean_curvature_vector() const {
  AmbientVector v = AmbientVector::Zero(normal_frame.rows());
  for (int a = 0; a < codim; ++a) v += mean_curvature(a) * normal_frame.col(a);
  return v;
}

double normal_curvature(const SecondFundamentalForm& h) {
  if (h.dim() != 2 || h.codim() != 2) {
    throw Error(ErrorCode::BadDims, "normal curvature scalar needs dim = codim = 2");
  }
  double k = 0.0;
  for (int p = 0; p < 2; ++p) k += h(0, p, 0) * h(1, p, 1) - h(1, p, 0) * h(0, p, 1);
  return k;
}

namespace {

// Orthonormal completion of {position, tangent frame} by the standard basis,
// visited in index order; candidates with tiny residual are skipped.
AmbientFrame normal_frame_for(const AmbientVector& position, const AmbientFrame& tangent,
                              int codim) {
  const int m = static_cast<int>(position.size());
  AmbientFrame basis(m, 1 + tangent.cols() + codim);
  basis.col(0) = position.normalized();
  int used = 1;
  for (int a = 0; a < tangent.cols(); ++a) basis.col(used++) = tangent.col(a);

  AmbientFrame normals(m, codim);
  int found = 0;
  for (int c = 0; c < m && found < codim; ++c) {
    AmbientVector v = AmbientVector::Unit(m, c);
    // Two passes of classical Gram-Schmidt restore orthogonality to
    // round-off even for small residuals.
    for (int pass = 0; pass < 2; ++pass) {
      for (int b = 0; b < used; ++b) v -= basis.col(b).dot(v) * basis.col(b);
    }
    const double r = v.norm();
    if (r < kNormalResidualMin) continue;
    v /= r;
    basis.col(used++) = v;
    normals.col(found++) = v;
  }
  if (found < codim) {
    throw Error(ErrorCode::DegenerateJet, "could not complete the normal frame");
  }
  return normals;
}

}  // namespace

PointGeometry point_geometry(const Jet2& jet, double kbar) {
  const int n = jet.dim();
  const int k = jet.codim();
  if (k < 1 || k > kMaxCodim) {
    throw Error(ErrorCode::BadDims, "codimension " + std::to_string(k) + " unsupported");
  }
  if (!(kbar > 0.0)) throw Error(ErrorCode::BadParams, "kbar must be positive");

  const double radius = jet.position().norm();
  if (std::abs(radius - 1.0) > kOnSphereTol) {
    throw Error(ErrorCode::OffSphere, "|F| = " + std::to_string(radius));
  }

  const AmbientFrame& d1 = jet.first_derivatives();
  const TangentMatrix gram = d1.transpose() * d1;
  const double det = gram.determinant();
  if (!(det > kGramDetMin)) {
    throw Error(ErrorCode::DegenerateJet, "Gram determinant " + std::to_string(det));
  }

  // Gram-Schmidt in index order is the Cholesky factorization g = L L^T with
  // tangent frame E = J L^{-T}.
  Eigen::LLT<TangentMatrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::DegenerateJet, "metric not positive definite");
  }
  const TangentMatrix lower = llt.matrixL();
  const TangentMatrix chart_to_frame =
      lower.triangularView<Eigen::Lower>().solve(TangentMatrix::Identity(n, n));
  const AmbientFrame tangent = d1 * chart_to_frame.transpose();
  const AmbientFrame normals = normal_frame_for(jet.position(), tangent, k);

  PointGeometry g;
  g.dim = n;
  g.codim = k;
  g.kbar = kbar;
  g.metric = gram / kbar;
  g.metric_inv = gram.inverse() * kbar;
  g.tangent_frame = tangent;
  g.normal_frame = normals;
  g.chart_to_frame = chart_to_frame * std::sqrt(kbar);

  // Lengths scale by 1/sqrt(kbar), so h scales by sqrt(kbar).
  const double scale = std::sqrt(kbar);
  g.sff = SecondFundamentalForm(n, k);
  TangentMatrix projected(n, n);
  for (int a = 0; a < k; ++a) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        projected(i, j) = normals.col(a).dot(jet.second(i, j));
        projected(j, i) = projected(i, j);
      }
    }
    const TangentMatrix in_frame = chart_to_frame * projected * chart_to_frame.transpose();
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) g.sff.set(i, j, a, scale * 0.5 * (in_frame(i, j) + in_frame(j, i)));
    }
  }

  g.mean_curvature = g.sff.mean_curvature();
  g.norm_a2 = g.sff.norm2();
  g.norm_h2 = g.mean_curvature.squaredNorm();
  g.norm_traceless_a2 = g.norm_a2 - g.norm_h2 / n;
  if (n == 2 && k == 2) g.kperp = normal_curvature(g.sff);
  if (n == 2) {
    double sectional = kbar;
    for (int a = 0; a < k; ++a) {
      sectional += g.sff(0, 0, a) * g.sff(1, 1, a) - g.sff(0, 1, a) * g.sff(0, 1, a);
    }
    g.gauss = sectional;
  }
  return g;
}

}  // namespace pinchflow
