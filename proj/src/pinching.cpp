#include "pinchflow/pinching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "pinchflow/frames.hpp"
#include "pinchflow/parallel.hpp"

namespace pinchflow {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kSignTolerance = 1e-12;
constexpr int kLandscapeBins = 10;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

// Larger value wins; ties go to the lexicographically smaller angles so the
// reduction does not depend on evaluation order.
bool better(const SweepSample& x, const SweepSample& y) {
  if (x.value != y.value) return x.value > y.value;
  return x.angles < y.angles;
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

std::string_view to_string(ConeVariant v) { return v == ConeVariant::Thm1 ? "thm1" : "thm2"; }

ConeParams ConeParams::thm1(int n, double kbar) {
  ConeParams p;
  p.variant = ConeVariant::Thm1;
  p.n = n;
  p.kbar = kbar;
  if (n <= 3) {
    p.alpha = 4.0 / (3.0 * n);
    p.beta = n / 2.0;
  } else {
    p.alpha = 1.0 / (n - 1.0);
    p.beta = 2.0;
  }
  return p;
}

ConeParams ConeParams::thm2(double k, double delta, double kbar) {
  ConeParams p;
  p.variant = ConeVariant::Thm2;
  p.n = 2;
  p.delta = delta;
  p.kbar = kbar;
  return p.with_k(k);
}

ConeParams ConeParams::with_k(double new_k) const {
  ConeParams p = *this;
  p.k = new_k;
  p.gamma = 1.0 - 4.0 * new_k / 3.0 - delta;
  p.epsilon = 4.0 * (new_k - 0.5);
  return p;
}

void ConeParams::validate() const {
  if (!(kbar >= 0.0)) throw Error(ErrorCode::BadParams, "kbar must be nonnegative");
  if (variant == ConeVariant::Thm1) {
    if (n < 2 || n > kMaxDim) throw Error(ErrorCode::BadParams, "Thm1 needs 2 <= n <= 5");
    if (!(alpha > 1.0 / n)) throw Error(ErrorCode::BadParams, "Thm1 needs alpha > 1/n");
  } else {
    if (n != 2) throw Error(ErrorCode::BadParams, "Thm2 is a cone for n = 2");
    if (!(k > 0.5)) throw Error(ErrorCode::BadParams, "Thm2 needs k > 1/2");
    if (!(gamma >= 0.0)) throw Error(ErrorCode::BadParams, "Thm2 needs gamma >= 0");
    if (!(delta >= 0.0)) throw Error(ErrorCode::BadParams, "delta must be nonnegative");
  }
}

double q_value(const PointGeometry& g, const ConeParams& p) {
  if (p.variant == ConeVariant::Thm1) return g.norm_a2 - p.alpha * g.norm_h2 - p.beta * p.kbar;
  if (!g.kperp) throw Error(ErrorCode::BadDims, "Thm2 needs dim = codim = 2");
  return g.norm_a2 + 2.0 * p.gamma * std::abs(*g.kperp) - p.k * g.norm_h2 - p.epsilon * p.kbar;
}

double q_value(const SecondFundamentalForm& h, const ConeParams& p) {
  const double a2 = h.norm2();
  const double h2 = h.mean_curvature().squaredNorm();
  if (p.variant == ConeVariant::Thm1) return a2 - p.alpha * h2 - p.beta * p.kbar;
  if (h.dim() != 2 || h.codim() != 2) throw Error(ErrorCode::BadDims, "Thm2 needs dim = codim = 2");
  return a2 + 2.0 * p.gamma * std::abs(normal_curvature(h)) - p.k * h2 - p.epsilon * p.kbar;
}

double reaction_of_q(const SecondFundamentalForm& h, const ConeParams& p, R3Source r3) {
  const int n = h.dim();
  const double r1 = normal_gram_square_sum(h) + normal_curvature_norm2(h);
  const double r2 = mean_weighted_square(h);
  const double h2 = h.mean_curvature().squaredNorm();
  const double traceless = h.norm2() - h2 / n;
  const double kb = p.kbar;
  if (p.variant == ConeVariant::Thm1) {
    return 2.0 * r1 - 2.0 * p.alpha * r2 - 2.0 * n * kb * traceless -
           2.0 * n * (p.alpha - 1.0 / n) * kb * h2;
  }
  if (n != 2 || h.codim() != 2) throw Error(ErrorCode::BadDims, "Thm2 needs dim = codim = 2");
  const double kperp = normal_curvature(h);
  const double react3 =
      r3 == R3Source::Closed ? kperp_reaction_closed_r3(h) : kperp_reaction_index_sum(h, 0.0);
  return 2.0 * r1 + 2.0 * p.gamma * sign(kperp) * react3 - 2.0 * p.k * r2 -
         4.0 * kb * traceless + 2.0 * kb * h2 - 4.0 * p.k * kb * h2 -
         4.0 * p.gamma * kb * std::abs(kperp);
}

double boundary_h2_thm1(double traceless2, const ConeParams& p) {
  return (traceless2 - p.beta * p.kbar) / (p.alpha - 1.0 / p.n);
}

double boundary_h2_thm2(double a, double b, double c, const ConeParams& p) {
  const double traceless2 = 2.0 * (a * a + b * b + c * c);
  return (traceless2 + 2.0 * p.gamma * std::abs(2.0 * a * c) - p.epsilon * p.kbar) / (p.k - 0.5);
}

SecondFundamentalForm thm1_family(int n, double a, double b, double c, double h2) {
  SecondFundamentalForm h(n, 2);
  const double mean = std::sqrt(std::max(h2, 0.0)) / n;
  for (int i = 0; i < n; ++i) h.set(i, i, 0, mean);
  h.set(0, 0, 0, mean + a);
  h.set(1, 1, 0, mean - a);
  h.set(0, 0, 1, b);
  h.set(1, 1, 1, -b);
  h.set(0, 1, 1, c);
  return h;
}

SecondFundamentalForm thm2_family(double a, double b, double c, double h2) {
  return special_form(a, b, c, std::sqrt(std::max(h2, 0.0)));
}

std::optional<SweepSample> sweep_point(const ConeParams& params, Stratum stratum, R3Source r3,
                                       const std::array<double, 3>& angles) {
  SweepSample s;
  s.angles = angles;
  const double s1 = std::sin(angles[0]), c1 = std::cos(angles[0]);
  const double s2 = std::sin(angles[1]), c2 = std::cos(angles[1]);
  const double s3 = std::sin(angles[2]), c3 = std::cos(angles[2]);
  ConeParams p = params;

  if (stratum == Stratum::HZero) {
    if (params.variant != ConeVariant::Thm1) {
      throw Error(ErrorCode::BadParams, "the H = 0 stratum is defined for Thm1");
    }
    // Q = 0 with H = 0 and |A°|^2 + kbar = 1.
    s.kbar = 1.0 / (1.0 + params.beta);
    const double r = std::sqrt(params.beta * s.kbar / 2.0);
    s.a = r * c1;
    s.b = r * s1 * c2;
    s.c = r * s1 * s2;
    s.h2 = 0.0;
    p.kbar = s.kbar;
    s.value = reaction_of_q(thm1_family(params.n, s.a, s.b, s.c, 0.0), p, r3);
    return s;
  }

  const double x0 = c1, x1 = s1 * c2, x2 = s1 * s2 * c3, x3 = s1 * s2 * s3;
  s.kbar = x3 * x3;
  p.kbar = s.kbar;
  if (params.variant == ConeVariant::Thm1) {
    const double scale = 1.0 / std::numbers::sqrt2;
    s.a = scale * x0;
    s.b = scale * x1;
    s.c = scale * x2;
    s.h2 = boundary_h2_thm1(2.0 * (s.a * s.a + s.b * s.b + s.c * s.c), p);
    if (s.h2 < 0.0) return std::nullopt;
    s.value = reaction_of_q(thm1_family(params.n, s.a, s.b, s.c, s.h2), p, r3);
  } else {
    s.a = x0;
    s.b = x1;
    s.c = x2;
    s.h2 = boundary_h2_thm2(s.a, s.b, s.c, p);
    if (s.h2 < 0.0) return std::nullopt;
    s.value = reaction_of_q(thm2_family(s.a, s.b, s.c, s.h2), p, r3);
  }
  return s;
}

namespace {

struct Partial {
  std::optional<SweepSample> best;
  long evaluated = 0;
  SignLandscape landscape;
};

void absorb(std::optional<SweepSample>& best, const SweepSample& s) {
  if (!best || better(s, *best)) best = s;
}

Partial base_grid(const ConeParams& params, const SweepSpec& spec, bool with_landscape) {
  const int n_res = spec.resolution;
  const bool two_angles = spec.stratum == Stratum::HZero;
  const std::size_t total = two_angles ? static_cast<std::size_t>(n_res) * n_res
                                       : static_cast<std::size_t>(n_res) * n_res * n_res;
  const double step = kHalfPi / (n_res - 1);
  const int workers = worker_count(spec.threads);
  std::vector<Partial> parts(workers);
  for (auto& part : parts) part.landscape.bins.resize(kLandscapeBins);

  parallel_for(total, workers, [&](std::size_t begin, std::size_t end, int w) {
    Partial& part = parts[w];
    for (std::size_t idx = begin; idx < end; ++idx) {
      std::array<double, 3> ang{};
      if (two_angles) {
        ang = {step * static_cast<double>(idx / n_res), step * static_cast<double>(idx % n_res),
               0.0};
      } else {
        ang = {step * static_cast<double>(idx / (n_res * n_res)),
               step * static_cast<double>((idx / n_res) % n_res),
               step * static_cast<double>(idx % n_res)};
      }
      ++part.evaluated;
      const auto s = sweep_point(params, spec.stratum, spec.r3_source, ang);
      if (!s) {
        ++part.landscape.infeasible;
        continue;
      }
      absorb(part.best, *s);
      if (!with_landscape) continue;
      (s->value > 0.0 ? part.landscape.positive : part.landscape.nonpositive) += 1;
      const int bin = std::min(kLandscapeBins - 1, static_cast<int>(s->kbar * kLandscapeBins));
      LandscapeBin& b = part.landscape.bins[bin];
      ++b.feasible;
      if (s->value > 0.0) ++b.positive;
      if (!b.sup || s->value > *b.sup) b.sup = s->value;
    }
  });

  Partial out;
  out.landscape.bins.resize(kLandscapeBins);
  for (int b = 0; b < kLandscapeBins; ++b) {
    out.landscape.bins[b].kbar_lo = static_cast<double>(b) / kLandscapeBins;
    out.landscape.bins[b].kbar_hi = static_cast<double>(b + 1) / kLandscapeBins;
  }
  for (const Partial& part : parts) {
    out.evaluated += part.evaluated;
    if (part.best) absorb(out.best, *part.best);
    out.landscape.positive += part.landscape.positive;
    out.landscape.nonpositive += part.landscape.nonpositive;
    out.landscape.infeasible += part.landscape.infeasible;
    for (int b = 0; b < kLandscapeBins; ++b) {
      LandscapeBin& dst = out.landscape.bins[b];
      const LandscapeBin& src = part.landscape.bins[b];
      dst.positive += src.positive;
      dst.feasible += src.feasible;
      if (src.sup && (!dst.sup || *src.sup > *dst.sup)) dst.sup = src.sup;
    }
  }
  return out;
}

// Local grids around the incumbent, shrinking by refine_factor per round.
void refine(const ConeParams& params, const SweepSpec& spec, Partial& result) {
  const bool two_angles = spec.stratum == Stratum::HZero;
  double step = kHalfPi / (spec.resolution - 1);
  const int hw = spec.refine_half_width;
  const int side = 2 * hw + 1;
  for (int round = 0; round < spec.refine_rounds && result.best; ++round) {
    step /= spec.refine_factor;
    const std::array<double, 3> center = result.best->angles;
    for (int i = 0; i < side; ++i) {
      for (int j = 0; j < side; ++j) {
        for (int k = 0; k < (two_angles ? 1 : side); ++k) {
          std::array<double, 3> ang = {center[0] + (i - hw) * step, center[1] + (j - hw) * step,
                                       two_angles ? 0.0 : center[2] + (k - hw) * step};
          for (double& a : ang) a = std::clamp(a, 0.0, kHalfPi);
          ++result.evaluated;
          if (const auto s = sweep_point(params, spec.stratum, spec.r3_source, ang)) {
            absorb(result.best, *s);
          }
        }
      }
    }
  }
}

std::string critical_parameter(const ConeParams& p, Stratum stratum) {
  if (p.variant == ConeVariant::Thm2) return "k";
  return stratum == Stratum::HZero ? "beta" : "alpha";
}

ConeParams with_parameter(const ConeParams& p, const std::string& name, double value) {
  if (name == "k") return p.with_k(value);
  ConeParams q = p;
  (name == "alpha" ? q.alpha : q.beta) = value;
  return q;
}

double sup_at(const ConeParams& params, const SweepSpec& spec) {
  SweepSpec s = spec;
  s.resolution = spec.critical_resolution;
  Partial part = base_grid(params, s, false);
  refine(params, s, part);
  return part.best ? part.best->value : kNegInf;
}

CriticalReport critical_constant(const ConeParams& params, const SweepSpec& spec) {
  CriticalReport rep;
  rep.parameter = critical_parameter(params, spec.stratum);
  rep.width = spec.critical_width;
  double lo = 0.0, hi = 0.0;
  if (rep.parameter == "alpha") {
    lo = 1.0 / params.n + 2e-3;
    hi = 2.0 / params.n;
  } else if (rep.parameter == "beta") {
    lo = 0.05;
    hi = static_cast<double>(params.n);
  } else {
    lo = 0.5 + 2e-3;
    hi = 0.75;
  }
  lo = spec.critical_lo.value_or(lo);
  hi = spec.critical_hi.value_or(hi);
  if (!(hi > lo)) throw Error(ErrorCode::BadParams, "critical scan needs hi > lo");

  const int m = std::max(2, spec.critical_scan);
  for (int i = 0; i <= m; ++i) {
    const double x = lo + (hi - lo) * i / m;
    rep.scan.emplace_back(x, sup_at(with_parameter(params, rep.parameter, x), spec));
  }
  for (int i = 0; i < m; ++i) {
    auto [xl, sl] = rep.scan[i];
    auto [xh, sh] = rep.scan[i + 1];
    if ((sl > 0.0) == (sh > 0.0)) continue;
    while (xh - xl > spec.critical_width) {
      const double mid = 0.5 * (xl + xh);
      const double sm = sup_at(with_parameter(params, rep.parameter, mid), spec);
      if ((sm > 0.0) == (sl > 0.0)) {
        xl = mid;
        sl = sm;
      } else {
        xh = mid;
        sh = sm;
      }
    }
    rep.brackets.push_back({xl, xh, sl, sh});
  }
  return rep;
}

}  // namespace

SweepReport reaction_sweep(const ConeParams& params, const SweepSpec& spec) {
  params.validate();
  if (spec.resolution < 2) throw Error(ErrorCode::BadParams, "sweep resolution must be >= 2");
  if (spec.refine_factor < 2 || spec.refine_half_width < 1 || spec.refine_rounds < 0) {
    throw Error(ErrorCode::BadParams, "bad refinement settings");
  }
  if (spec.stratum == Stratum::HZero && params.variant != ConeVariant::Thm1) {
    throw Error(ErrorCode::BadParams, "the H = 0 stratum is defined for Thm1");
  }

  SweepReport rep;
  rep.params = params;
  rep.spec = spec;
  Partial part = base_grid(params, spec, true);
  if (!part.best) {
    throw Error(ErrorCode::EmptyFeasibleSet, "no sample of the Q = 0 slice has |H|^2 >= 0");
  }
  rep.landscape = part.landscape;
  refine(params, spec, part);
  rep.sup = part.best->value;
  rep.argmax = *part.best;
  rep.samples = part.evaluated;
  if (spec.find_critical) rep.critical = critical_constant(params, spec);

  auto& notes = rep.notes;
  if (params.variant == ConeVariant::Thm1) {
    notes.push_back(
        "family: codimension two, A°_1 = a diag(1,-1,0,...) along nu_1 = H/|H|, "
        "A°_- = [[b,c],[c,-b]] (+) 0 along nu_2; slice 2(a^2+b^2+c^2) + kbar = 1");
  } else {
    notes.push_back("family: special frame (a, b, c, |H|); slice a^2+b^2+c^2+kbar = 1");
    notes.push_back(std::string("R3 source: ") +
                    (spec.r3_source == R3Source::Closed
                         ? "closed form K^perp(|A|^2 + 2|A°|^2 - 2b^2)"
                         : "index sum over the reaction of h"));
  }
  if (spec.stratum == Stratum::HZero) {
    notes.push_back("stratum: H = 0, so Q = 0 forces |A°|^2 = beta kbar");
    const bool claimed_negative = params.beta < 2.0 * params.n / 3.0;
    const bool measured_negative = rep.sup < 0.0;
    notes.push_back("claim under test: negative on the H = 0 stratum iff beta < 2n/3 = " +
                    fmt(2.0 * params.n / 3.0) + "; beta = " + fmt(params.beta) + ", sup = " +
                    fmt(rep.sup) + ": " +
                    (claimed_negative == measured_negative ? "agreement" : "disagreement"));
  } else {
    notes.push_back("|H|^2 eliminated through Q = 0; samples with |H|^2 < 0 skipped");
    const std::string what = params.variant == ConeVariant::Thm1
                                 ? "alpha = " + fmt(params.alpha) + ", beta = " + fmt(params.beta)
                                 : "k = " + fmt(params.k) + ", gamma = " + fmt(params.gamma);
    // Slice values are O(1), so |sup| below kSignTolerance is a zero.
    std::string verdict = "agreement";
    if (rep.sup >= -kSignTolerance && rep.sup <= kSignTolerance) {
      verdict = "disagreement (sup is zero to rounding at kbar = " + fmt(rep.argmax.kbar) +
                ", so the reaction is not strictly negative there)";
    } else if (rep.sup > 0.0) {
      verdict = "disagreement";
    }
    notes.push_back("claim under test: reaction strictly negative on the cone boundary for " +
                    what + "; sup = " + fmt(rep.sup) + ": " + verdict);
  }
  if (rep.critical) {
    if (rep.critical->brackets.empty()) {
      notes.push_back("no sign change of sup found while scanning " + rep.critical->parameter);
      const auto low = std::min_element(
          rep.critical->scan.begin(), rep.critical->scan.end(),
          [](const auto& x, const auto& y) { return x.second < y.second; });
      if (low != rep.critical->scan.end()) {
        notes.push_back("smallest scanned sup " + fmt(low->second) + " at " +
                        rep.critical->parameter + " = " + fmt(low->first));
      }
    } else if (rep.critical->brackets.size() > 1) {
      notes.push_back("sign of sup changes more than once in " + rep.critical->parameter +
                      "; all brackets reported");
    }
  }
  return rep;
}

DiscriminantReport discriminant_report(int n, double alpha, double beta) {
  if (n < 2) throw Error(ErrorCode::BadParams, "n must be at least 2");
  if (!(alpha > 1.0 / n)) throw Error(ErrorCode::BadParams, "discriminant needs alpha > 1/n");
  DiscriminantReport r;
  const double big_b = beta / (n * (alpha - 1.0 / n));
  r.delta_printed_1 = 8.0 * (big_b - n) * (2.0 * big_b - 3.0 * beta);
  r.delta_printed_2 = 8.0 * (big_b - n) * (2.0 * big_b - (2.0 * (n - 4) + 3.0) * beta);

  const double c4 = n < 4 ? 3.0 : 2.0 * (n - 4) + 3.0;
  r.coefficients = {-c4, 4.0 * (big_b - n), -2.0 * beta * (big_b - n)};
  constexpr int kSteps = 4096;
  r.direct_max = kNegInf;
  for (int i = 0; i <= kSteps; ++i) {
    const double t = kHalfPi * i / kSteps;
    const double x = std::cos(t), y = std::sin(t);
    const double q = r.coefficients[0] * x * x + r.coefficients[1] * x * y +
                     r.coefficients[2] * y * y;
    r.direct_max = std::max(r.direct_max, q);
  }
  r.direct_negativity = r.direct_max < 0.0;
  return r;
}

double BlowupTime::operator()(double t) const {
  if (t >= t_star) return std::numeric_limits<double>::infinity();
  return b0 / (1.0 - 8.0 * b0 * (t - tau) / n);
}

BlowupTime blowup_time(double b0, double tau, int n) {
  if (!(b0 > 0.0)) throw Error(ErrorCode::BadParams, "b0 must be positive");
  BlowupTime b;
  b.b0 = b0;
  b.tau = tau;
  b.n = n;
  b.t_star = tau + n / (8.0 * b0);
  return b;
}

double harnack_bound(double h0, double csharp, double t, double delta0, double d) {
  return h0 / (1.0 + csharp * std::exp(-delta0 * t / 2.0) * d * h0);
}

}  // namespace pinchflow
