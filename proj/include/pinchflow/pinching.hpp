#pragma once

// Pinching cones, the reaction terms of their defining quantities, and
// sweeps that measure the sign of those reactions on the cone boundary.
//
//   Thm1:  Q = |A|^2 - alpha |H|^2 - beta kbar
//   Thm2:  Q = |A|^2 + 2 gamma |K^perp| - k |H|^2 - epsilon kbar   (n = k = 2)
//
// Q < 0 is the inside of the cone.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pinchflow/identities.hpp"
#include "pinchflow/tensor.hpp"

namespace pinchflow {

enum class ConeVariant { Thm1, Thm2 };

struct ConeParams {
  ConeVariant variant = ConeVariant::Thm1;
  int n = 2;
  double alpha = 0.0;
  double beta = 0.0;
  double k = 0.0;
  double gamma = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  double kbar = 1.0;

  /// alpha = 4/(3n), beta = n/2 for n = 2, 3; alpha = 1/(n-1), beta = 2 for n >= 4.
  static ConeParams thm1(int n, double kbar = 1.0);
  /// gamma = 1 - 4k/3 - delta, epsilon = 4(k - 1/2).
  static ConeParams thm2(double k, double delta = 0.0, double kbar = 1.0);

  /// Copy with k replaced and gamma, epsilon re-derived (Thm2).
  ConeParams with_k(double new_k) const;

  /// BadParams when the constants are out of range (n < 2, alpha <= 1/n,
  /// k <= 1/2, gamma < 0, kbar < 0).
  void validate() const;
};

std::string_view to_string(ConeVariant v);

double q_value(const PointGeometry& g, const ConeParams& p);
double q_value(const SecondFundamentalForm& h, const ConeParams& p);

/// Which expression supplies the reaction of K^perp in the Thm2 reaction.
enum class R3Source {
  Closed,    // K^perp (|A|^2 + 2|A°|^2 - 2b^2)
  IndexSum,  // the index sum over the reaction of h
};

/// Reaction terms of dQ/dt assembled from the identities primitives.
double reaction_of_q(const SecondFundamentalForm& h, const ConeParams& p,
                     R3Source r3 = R3Source::Closed);

/// |H|^2 solving Q = 0 for the given traceless data (negative means the
/// configuration cannot lie on the cone boundary).
double boundary_h2_thm1(double traceless2, const ConeParams& p);
double boundary_h2_thm2(double a, double b, double c, const ConeParams& p);

/// Second fundamental forms of the sweep families.  Thm1 uses codimension
/// two with A°_1 = a diag(1, -1, 0, ...) along nu_1 = H/|H| and
/// A°_- = [[b, c], [c, -b]] (+) 0 along nu_2; Thm2 uses the special frame.
SecondFundamentalForm thm1_family(int n, double a, double b, double c, double h2);
SecondFundamentalForm thm2_family(double a, double b, double c, double h2);

enum class Stratum {
  Full,   // the whole Q = 0 slice
  HZero,  // only H = 0, where Q = 0 forces |A°|^2 = beta kbar (Thm1)
};

struct SweepSpec {
  int resolution = 64;  // base grid points per angle
  int refine_rounds = 3;
  int refine_factor = 4;
  int refine_half_width = 4;  // local grid has 2 * half_width + 1 points per angle
  Stratum stratum = Stratum::Full;
  R3Source r3_source = R3Source::Closed;
  bool find_critical = true;
  int critical_resolution = 64;
  int critical_scan = 16;
  double critical_width = 1e-4;
  std::optional<double> critical_lo;
  std::optional<double> critical_hi;
  int threads = 0;
};

struct SweepSample {
  std::array<double, 3> angles{};
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double kbar = 0.0;
  double h2 = 0.0;
  double value = 0.0;
};

struct CriticalBracket {
  double lo = 0.0;
  double hi = 0.0;
  double sup_lo = 0.0;
  double sup_hi = 0.0;
};

struct CriticalReport {
  std::string parameter;  // "alpha", "beta" or "k"
  std::vector<std::pair<double, double>> scan;  // (parameter, sup); sup = -inf if empty
  std::vector<CriticalBracket> brackets;
  double width = 0.0;
};

struct LandscapeBin {
  double kbar_lo = 0.0;
  double kbar_hi = 0.0;
  long positive = 0;
  long feasible = 0;
  std::optional<double> sup;
};

struct SignLandscape {
  long positive = 0;
  long nonpositive = 0;
  long infeasible = 0;
  std::vector<LandscapeBin> bins;
};

struct SweepReport {
  ConeParams params;
  SweepSpec spec;
  double sup = 0.0;
  SweepSample argmax;
  long samples = 0;
  SignLandscape landscape;
  std::optional<CriticalReport> critical;
  std::vector<std::string> notes;
};

/// Supremum of reaction_of_q over the normalized Q = 0 slice.  Thm1 samples
/// 2(a^2 + b^2 + c^2) + kbar = 1 (that is |A°|^2 + kbar = 1), Thm2 samples
/// a^2 + b^2 + c^2 + kbar = 1, both through hyperspherical angles on
/// [0, pi/2]^3.  The result does not depend on the worker count.
SweepReport reaction_sweep(const ConeParams& params, const SweepSpec& spec);

/// Evaluates one sample point of the sweep family at the given angles.
std::optional<SweepSample> sweep_point(const ConeParams& params, Stratum stratum,
                                       R3Source r3, const std::array<double, 3>& angles);

struct DiscriminantReport {
  double delta_printed_1 = 0.0;
  double delta_printed_2 = 0.0;
  bool direct_negativity = false;
  double direct_max = 0.0;  // max of the quadratic form on the unit quarter circle
  std::array<double, 3> coefficients{};  // x^2, xy, y^2 in (|A°_-|^2, kbar)
};

/// Both discriminant expressions verbatim, plus a direct sweep of the
/// quadratic form -c x^2 + 4(B - n) x y - 2 beta (B - n) y^2 on x, y >= 0 with
/// B = beta / (n (alpha - 1/n)) and c = 3 (n < 4) or 2(n - 4) + 3 (n >= 4).
DiscriminantReport discriminant_report(int n, double alpha, double beta);

struct BlowupTime {
  double b0 = 0.0;
  double tau = 0.0;
  int n = 2;
  double t_star = 0.0;
  /// n b0 / (n - 8 b0 (t - tau)), evaluated as b0 / (1 - 8 b0 (t - tau) / n);
  /// +inf from t_star on.
  double operator()(double t) const;
};

BlowupTime blowup_time(double b0, double tau, int n);

/// h0 / (1 + csharp exp(-delta0 t / 2) d h0).
double harnack_bound(double h0, double csharp, double t, double delta0, double d);

}  // namespace pinchflow
