#pragma once

// Reaction terms of the curvature evolution equations and the Simons
// identity nonlinearity.  Every quantity with a closed form is also
// available as a literal index sum so the two routes can be compared.

#include <optional>
#include <vector>

#include "pinchflow/tensor.hpp"

namespace pinchflow {

struct ReactionTerms {
  double r1 = 0.0;  // sum_{a,b} (sum_ij h_ija h_ijb)^2 + |Rm^perp|^2
  double r2 = 0.0;  // sum_ij (sum_a H_a h_ija)^2
  std::optional<double> r3;        // K^perp (|A|^2 + 2|A°|^2 - 2b^2), dim = codim = 2
  double z_brute = 0.0;            // Simons nonlinearity by index summation
  std::optional<double> z_closed;  // (|H|^2 - |A|^2)|A°|^2 - 2 (K^perp)^2
  double rm_perp_2 = 0.0;
};

ReactionTerms reaction_terms(const SecondFundamentalForm& h);

struct KperpChecks {
  double reaction_brute = 0.0;
  double reaction_closed = 0.0;
  double laplacian_factor = 0.0;
  double li_li_margin = 0.0;
};

KperpChecks kperp_checks(const SecondFundamentalForm& h, double kbar);

// Primitives, exposed for the pinching lab and for tests.

/// sum_{a,b} (sum_ij h_ija h_ijb)^2
double normal_gram_square_sum(const SecondFundamentalForm& h);
/// |Rm^perp|^2 with R^perp_{ijab} = h_ipa h_jpb - h_jpa h_ipb.
double normal_curvature_norm2(const SecondFundamentalForm& h);
/// sum_ij (sum_a H_a h_ija)^2
double mean_weighted_square(const SecondFundamentalForm& h);
/// R_3 from the special frame.
double kperp_reaction_closed_r3(const SecondFundamentalForm& h);
/// The reaction of K^perp assembled from the per-component reaction R_ija of
/// the second fundamental form, including the -n kbar R^perp term.
double kperp_reaction_index_sum(const SecondFundamentalForm& h, double kbar);

/// Covariant derivative nabla_c h_{ab alpha} at one point; index order
/// (c, a, b, alpha).
class SffGradient {
 public:
  SffGradient() = default;
  SffGradient(int dim, int codim);

  int dim() const { return dim_; }
  int codim() const { return codim_; }
  double& operator()(int c, int a, int b, int alpha) { return v_[index(c, a, b, alpha)]; }
  double operator()(int c, int a, int b, int alpha) const { return v_[index(c, a, b, alpha)]; }

  double norm2() const;
  /// |nabla H|^2
  double mean_norm2() const;
  /// nabla_evol K^perp (dim = codim = 2).
  double evol_kperp() const;

 private:
  int index(int c, int a, int b, int alpha) const {
    return ((c * kMaxDim + a) * kMaxDim + b) * kMaxCodim + alpha;
  }
  int dim_ = 0;
  int codim_ = 0;
  std::vector<double> v_;
};

struct GradientMargins {
  double m1 = 0.0;  // |nabla A|^2 - 3/(n+2) |nabla H|^2
  double m2 = 0.0;  // |nabla A|^2 - |nabla H|^2 / n - 2(n-1)/(3n) |nabla A|^2
  std::optional<double> m3;  // |nabla A|^2 - 2 nabla_evol K^perp (dim = codim = 2)
  double grad_a2 = 0.0;
  double grad_h2 = 0.0;
};

GradientMargins gradient_margins(const SffGradient& grad);

}  // namespace pinchflow
