#include "pinchflow/frames.hpp"

#include <cmath>

namespace pinchflow {

namespace {

constexpr double kEigenTieRel = 1e-9;
constexpr double kProjectionMin = 1e-6;

NormalMatrix normal_gram(const SecondFundamentalForm& h) {
  const int k = h.codim();
  NormalMatrix m = NormalMatrix::Zero(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      double s = 0.0;
      for (int i = 0; i < h.dim(); ++i) {
        for (int j = 0; j < h.dim(); ++j) s += h(i, j, a) * h(i, j, b);
      }
      m(a, b) = s;
      m(b, a) = s;
    }
  }
  return m;
}

Eigen::Matrix2d rotation_from_first_row(const Eigen::Vector2d& first) {
  Eigen::Matrix2d r;
  r << first(0), first(1), -first(1), first(0);
  return r;
}

}  // namespace

NormalVector principal_normal(const SecondFundamentalForm& h) {
  const int k = h.codim();
  const NormalVector mean = h.mean_curvature();
  const double h_norm = mean.norm();
  if (h_norm > kMeanCurvatureZero) return mean / h_norm;

  const NormalMatrix gram = normal_gram(h);
  Eigen::SelfAdjointEigenSolver<NormalMatrix> eig(gram);
  const auto& values = eig.eigenvalues();
  const double top = values(k - 1);
  if (!(top > 0.0)) return NormalVector::Unit(k, 0);

  // Orthonormal basis of the (possibly degenerate) top eigenspace.
  int first_tied = k - 1;
  while (first_tied > 0 && values(first_tied - 1) >= top * (1.0 - kEigenTieRel)) --first_tied;
  const NormalMatrix space = eig.eigenvectors().rightCols(k - first_tied);

  for (int c = 0; c < k; ++c) {
    const NormalVector p = space * space.transpose() * NormalVector::Unit(k, c);
    if (p.norm() > kProjectionMin) return p.normalized();
  }
  return space.col(space.cols() - 1);
}

SecondFundamentalForm special_form(double a, double b, double c, double h_norm) {
  SecondFundamentalForm h(2, 2);
  h.set(0, 0, 0, 0.5 * h_norm + a);
  h.set(1, 1, 0, 0.5 * h_norm - a);
  h.set(0, 0, 1, b);
  h.set(1, 1, 1, -b);
  h.set(0, 1, 1, c);
  return h;
}

ABCFrame specialize(const SecondFundamentalForm& h) {
  if (h.dim() != 2 || h.codim() != 2) {
    throw Error(ErrorCode::BadDims, "special frame needs dim = codim = 2");
  }
  ABCFrame f;
  const NormalVector mean = h.mean_curvature();
  f.h_norm = mean.norm();
  f.fallback = !(f.h_norm > kMeanCurvatureZero);

  const NormalVector nu1 = principal_normal(h);
  f.normal_rotation = rotation_from_first_row(Eigen::Vector2d(nu1(0), nu1(1)));

  std::array<Eigen::Matrix2d, 2> rotated;
  for (int a = 0; a < 2; ++a) {
    rotated[a].setZero();
    for (int b = 0; b < 2; ++b) {
      rotated[a] += f.normal_rotation(a, b) * Eigen::Matrix2d(h.slice(b));
    }
  }

  // Diagonalize h(nu_1), larger eigenvalue first, as a proper rotation.
  const Eigen::Matrix2d& a1 = rotated[0];
  const double gap = std::hypot(a1(0, 0) - a1(1, 1), 2.0 * a1(0, 1));
  if (gap > 1e-14 * (1.0 + a1.norm())) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(a1);
    Eigen::Vector2d top = eig.eigenvectors().col(1);
    if (top(0) < 0.0 || (top(0) == 0.0 && top(1) < 0.0)) top = -top;
    f.tangent_rotation = rotation_from_first_row(top);
  }

  const Eigen::Matrix2d& t = f.tangent_rotation;
  const Eigen::Matrix2d s1 = t * rotated[0] * t.transpose();
  const Eigen::Matrix2d s2 = t * rotated[1] * t.transpose();
  f.a = 0.5 * (s1(0, 0) - s1(1, 1));
  f.b = 0.5 * (s2(0, 0) - s2(1, 1));
  f.c = 0.5 * (s2(0, 1) + s2(1, 0));
  if (f.a < 0.0) f.a = 0.0;  // only round-off can produce this
  return f;
}

SecondFundamentalForm reconstruct(const ABCFrame& f) {
  const SecondFundamentalForm special = special_form(f.a, f.b, f.c, f.h_norm);
  const Eigen::Matrix2d& t = f.tangent_rotation;
  std::array<TangentMatrix, 2> input;
  for (int b = 0; b < 2; ++b) {
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    for (int a = 0; a < 2; ++a) {
      m += f.normal_rotation(a, b) * (t.transpose() * Eigen::Matrix2d(special.slice(a)) * t);
    }
    input[b] = m;
  }
  return SecondFundamentalForm::from_matrices(input);
}

TracelessSplit split_traceless(const SecondFundamentalForm& h) {
  const NormalVector nu1 = principal_normal(h);
  const NormalVector mean = h.mean_curvature();
  const NormalMatrix gram = normal_gram(h);
  const double along = nu1.dot(gram * nu1);  // |h(nu_1)|^2
  const double mean1 = mean.dot(nu1);
  TracelessSplit s;
  s.norm_a1_2 = std::max(0.0, along - mean1 * mean1 / h.dim());
  s.norm_aminus_2 = std::max(0.0, h.norm2() - along);
  return s;
}

}  // namespace pinchflow
