#include "pinchflow/identities.hpp"

#include "pinchflow/frames.hpp"

namespace pinchflow {

double normal_gram_square_sum(const SecondFundamentalForm& h) {
  const int n = h.dim();
  const int k = h.codim();
  double total = 0.0;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) s += h(i, j, a) * h(i, j, b);
      }
      total += s * s;
    }
  }
  return total;
}

double normal_curvature_norm2(const SecondFundamentalForm& h) {
  const int n = h.dim();
  const int k = h.codim();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
          double r = 0.0;
          for (int p = 0; p < n; ++p) r += h(i, p, a) * h(j, p, b) - h(j, p, a) * h(i, p, b);
          total += r * r;
        }
      }
    }
  }
  return total;
}

double mean_weighted_square(const SecondFundamentalForm& h) {
  const NormalVector mean = h.mean_curvature();
  double total = 0.0;
  for (int i = 0; i < h.dim(); ++i) {
    for (int j = 0; j < h.dim(); ++j) {
      double s = 0.0;
      for (int a = 0; a < h.codim(); ++a) s += mean(a) * h(i, j, a);
      total += s * s;
    }
  }
  return total;
}

double kperp_reaction_closed_r3(const SecondFundamentalForm& h) {
  const ABCFrame f = specialize(h);
  const double a2 = h.norm2();
  const double traceless = a2 - h.mean_curvature().squaredNorm() / 2.0;
  return normal_curvature(h) * (a2 + 2.0 * traceless - 2.0 * f.b * f.b);
}

namespace {

// Reaction R_{ij alpha} of the second fundamental form evolution (without
// the background-curvature terms).
double component_reaction(const SecondFundamentalForm& h, int i, int j, int alpha) {
  const int n = h.dim();
  const int k = h.codim();
  double s = 0.0;
  for (int b = 0; b < k; ++b) {
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        s += h(i, j, b) * h(p, q, b) * h(p, q, alpha);
        s += h(i, q, b) * h(q, p, b) * h(p, j, alpha);
        s += h(j, q, b) * h(q, p, b) * h(p, i, alpha);
        s -= 2.0 * h(i, p, b) * h(j, q, b) * h(p, q, alpha);
      }
    }
  }
  return s;
}

}  // namespace

double kperp_reaction_index_sum(const SecondFundamentalForm& h, double kbar) {
  if (h.dim() != 2 || h.codim() != 2) {
    throw Error(ErrorCode::BadDims, "K^perp reaction needs dim = codim = 2");
  }
  const int n = h.dim();
  constexpr int i = 0, j = 1, alpha = 0, beta = 1;
  double s = 0.0;
  for (int p = 0; p < n; ++p) {
    s += component_reaction(h, i, p, alpha) * h(j, p, beta);
    s += h(i, p, alpha) * component_reaction(h, j, p, beta);
    s -= component_reaction(h, j, p, alpha) * h(i, p, beta);
    s -= h(j, p, alpha) * component_reaction(h, i, p, beta);
  }
  return s - n * kbar * normal_curvature(h);
}

ReactionTerms reaction_terms(const SecondFundamentalForm& h) {
  const int n = h.dim();
  const int k = h.codim();
  ReactionTerms r;
  const double gram2 = normal_gram_square_sum(h);
  r.rm_perp_2 = normal_curvature_norm2(h);
  r.r1 = gram2 + r.rm_perp_2;
  r.r2 = mean_weighted_square(h);

  const NormalVector mean = h.mean_curvature();
  double cubic = 0.0;
  for (int a = 0; a < k; ++a) {
    if (mean(a) == 0.0) continue;
    for (int b = 0; b < k; ++b) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          for (int p = 0; p < n; ++p) cubic += mean(a) * h(i, p, a) * h(i, j, b) * h(p, j, b);
        }
      }
    }
  }
  r.z_brute = -gram2 - r.rm_perp_2 + cubic;

  if (n == 2 && k == 2) {
    const double a2 = h.norm2();
    const double h2 = mean.squaredNorm();
    const double kperp = normal_curvature(h);
    r.z_closed = (h2 - a2) * (a2 - h2 / n) - 2.0 * kperp * kperp;
    r.r3 = kperp_reaction_closed_r3(h);
  }
  return r;
}

KperpChecks kperp_checks(const SecondFundamentalForm& h, double kbar) {
  if (h.dim() != 2 || h.codim() != 2) {
    throw Error(ErrorCode::BadDims, "K^perp checks need dim = codim = 2");
  }
  const ABCFrame f = specialize(h);
  const double kperp = normal_curvature(h);
  const double a2 = h.norm2();
  const double traceless = a2 - h.mean_curvature().squaredNorm() / 2.0;

  KperpChecks out;
  out.reaction_brute = kperp_reaction_index_sum(h, kbar);
  out.reaction_closed = kperp * (a2 + 2.0 * traceless - 2.0 * f.b * f.b) - 2.0 * kbar * kperp;
  out.laplacian_factor = 2.0 * kbar - f.b * f.b - 3.0 * f.a * f.a - 3.0 * f.c * f.c;
  out.li_li_margin = 1.5 * traceless * traceless -
                     (normal_gram_square_sum(h) + normal_curvature_norm2(h));
  return out;
}

SffGradient::SffGradient(int dim, int codim)
    : dim_(dim), codim_(codim), v_(kMaxDim * kMaxDim * kMaxDim * kMaxCodim, 0.0) {}

double SffGradient::norm2() const {
  double s = 0.0;
  for (int c = 0; c < dim_; ++c)
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b)
        for (int al = 0; al < codim_; ++al) s += (*this)(c, a, b, al) * (*this)(c, a, b, al);
  return s;
}

double SffGradient::mean_norm2() const {
  double s = 0.0;
  for (int c = 0; c < dim_; ++c) {
    for (int al = 0; al < codim_; ++al) {
      double tr = 0.0;
      for (int a = 0; a < dim_; ++a) tr += (*this)(c, a, a, al);
      s += tr * tr;
    }
  }
  return s;
}

double SffGradient::evol_kperp() const {
  if (dim_ != 2 || codim_ != 2) {
    throw Error(ErrorCode::BadDims, "nabla_evol K^perp needs dim = codim = 2");
  }
  double s = 0.0;
  for (int p = 0; p < 2; ++p) {
    for (int q = 0; q < 2; ++q) {
      s += (*this)(q, 0, p, 0) * (*this)(q, 1, p, 1) - (*this)(q, 1, p, 0) * (*this)(q, 0, p, 1);
    }
  }
  return s;
}

GradientMargins gradient_margins(const SffGradient& grad) {
  const double n = grad.dim();
  GradientMargins m;
  m.grad_a2 = grad.norm2();
  m.grad_h2 = grad.mean_norm2();
  m.m1 = m.grad_a2 - 3.0 / (n + 2.0) * m.grad_h2;
  m.m2 = (m.grad_a2 - m.grad_h2 / n) - 2.0 * (n - 1.0) / (3.0 * n) * m.grad_a2;
  if (grad.dim() == 2 && grad.codim() == 2) m.m3 = m.grad_a2 - 2.0 * grad.evol_kperp();
  return m;
}

}  // namespace pinchflow
