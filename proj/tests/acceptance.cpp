// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,6,...] [--allow-fail 2,...]
//
// Exits nonzero if a criterion fails that is not listed in --allow-fail.
// Listed criteria still print their FAIL line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pinchflow/canonical.hpp"
#include "pinchflow/cli.hpp"
#include "pinchflow/field.hpp"
#include "pinchflow/flow.hpp"
#include "pinchflow/frames.hpp"
#include "pinchflow/identities.hpp"
#include "pinchflow/pinching.hpp"

using namespace pinchflow;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// The seeded population shared by criteria 1 and 2.
std::vector<SecondFundamentalForm> population(std::uint64_t seed, int count, bool traceless) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<SecondFundamentalForm> out;
  out.reserve(count);
  for (int t = 0; t < count; ++t) {
    std::vector<double> c(8);
    for (double& x : c) x = u(rng);
    SecondFundamentalForm h = SecondFundamentalForm::from_components(2, 2, c);
    if (traceless) {
      const NormalVector mean = h.mean_curvature();
      for (int a = 0; a < 2; ++a) {
        for (int i = 0; i < 2; ++i) h.set(i, i, a, h(i, i, a) - mean(a) / 2.0);
      }
    }
    out.push_back(h);
  }
  return out;
}

constexpr std::uint64_t kSeed = 20240607;
constexpr int kTrials = 10000;

Verdict simons() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const auto& h : population(kSeed, kTrials, false)) {
    const ReactionTerms r = reaction_terms(h);
    worst = std::max(worst, std::abs(r.z_brute - *r.z_closed) / (1.0 + std::abs(r.z_brute)));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && secs < 5.0,
          "max relative residual " + sci(worst) + " (<= 1e-10), " + fmt("%.3f", secs) +
              " s (< 5 s)"};
}

Verdict kperp() {
  double closed = 0.0, rm = 0.0, abc = 0.0;
  for (const auto& h : population(kSeed, kTrials, false)) {
    const KperpChecks k = kperp_checks(h, 1.0);
    closed = std::max(closed, std::abs(k.reaction_brute - k.reaction_closed) /
                                  (1.0 + std::abs(k.reaction_brute)));
    const double kp = normal_curvature(h);
    const double rm2 = reaction_terms(h).rm_perp_2;
    rm = std::max(rm, std::abs(rm2 - 4.0 * kp * kp) / (1.0 + rm2));
    const ABCFrame f = specialize(h);
    abc = std::max(abc, std::abs(std::abs(kp) - 2.0 * f.a * std::abs(f.c)) / (1.0 + std::abs(kp)));
  }
  const bool ok = closed <= 1e-10 && rm <= 1e-10 && abc <= 1e-10;
  return {ok, "brute vs closed K^perp reaction " + sci(closed) + ", |Rm^perp|^2 vs 4K^2 " +
                  sci(rm) + ", |K^perp| vs 2a|c| " + sci(abc) + " (each <= 1e-10)"};
}

Verdict li_li() {
  double worst = INFINITY;
  for (const auto& h : population(kSeed + 1, kTrials, true)) {
    worst = std::min(worst, kperp_checks(h, 1.0).li_li_margin);
  }
  return {worst >= -1e-12, "min (3/2)|A°|^4 - R1 = " + sci(worst) + " (>= -1e-12)"};
}

Verdict canonical_invariants() {
  double cl = 0.0, ve = 0.0, factor = 0.0, classify = 0.0;
  const CanonicalSurface clifford = make_surface(SurfaceKind::CliffordTorus);
  const CanonicalSurface veronese = make_surface(SurfaceKind::Veronese);
  auto branch_gap = [](const PointGeometry& g) {
    const double root = std::sqrt(1.0 - 2.0 * *g.kperp * *g.kperp);
    return std::min(std::abs(g.norm_a2 - (1.0 + root)), std::abs(g.norm_a2 - (1.0 - root)));
  };
  for (int a = 0; a < 12; ++a) {
    for (int b = 0; b < 12; ++b) {
      const double u[2] = {2.0 * kPi * (a + 0.3) / 12.0, 2.0 * kPi * (b + 0.7) / 12.0};
      const PointGeometry c = point_geometry(clifford.jet(u));
      cl = std::max({cl, std::abs(c.norm_a2 - 2.0), std::sqrt(c.norm_h2), std::abs(*c.kperp),
                     std::abs(*c.gauss)});
      classify = std::max(classify, branch_gap(c));

      const double w[2] = {0.05 + (kPi - 0.1) * (a + 0.5) / 12.0, u[1]};
      const PointGeometry v = point_geometry(veronese.jet(w));
      ve = std::max({ve, std::abs(v.norm_a2 - 4.0 / 3.0), std::sqrt(v.norm_h2),
                     std::abs(std::abs(*v.kperp) - 2.0 / 3.0), std::abs(*v.gauss - 1.0 / 3.0)});
      factor = std::max(factor, std::abs(kperp_checks(v.sff, 1.0).laplacian_factor));
      classify = std::max(classify, branch_gap(v));
    }
  }
  const bool ok = cl <= 1e-9 && ve <= 1e-9 && factor <= 1e-9 && classify <= 1e-9;
  return {ok, "Clifford " + sci(cl) + ", Veronese " + sci(ve) + ", dK^perp factor " +
                  sci(factor) + ", classification " + sci(classify) + " (each <= 1e-9)"};
}

double grid_a2_error(const CanonicalSurface& s, int res) {
  const bool sphere = s.topology() == Topology::Sphere;
  const GeometryField f = geometry_field(s.sample(res, sphere ? 2 * res : res));
  double worst = 0.0;
  for (const auto& p : f.points) {
    if (p) worst = std::max(worst, std::abs(p->norm_a2 - s.reference().norm_a2));
  }
  return worst;
}

Verdict convergence() {
  bool ok = true;
  std::string detail;
  for (SurfaceKind k : {SurfaceKind::GeodesicSphere, SurfaceKind::CliffordTorus,
                        SurfaceKind::FlatTorus, SurfaceKind::Veronese}) {
    const CanonicalSurface s = make_surface(k);
    const double e64 = grid_a2_error(s, 64), e128 = grid_a2_error(s, 128);
    ok = ok && e64 <= 1e-4 && e64 >= 3.0 * e128;
    detail += std::string(detail.empty() ? "" : "; ") + std::string(surface_name(k)) + " " +
              sci(e64) + " -> " + sci(e128) + " (x" + fmt("%.1f", e64 / e128) + ")";
  }
  return {ok, detail + " (64 <= 1e-4, factor >= 3)"};
}

Verdict flow_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const CanonicalSurface sphere = make_surface(SurfaceKind::GeodesicSphere);
  const double rho0 = kPi / 3.0;
  RunOptions o;
  o.step.cfl = 0.2;
  o.step.ceiling = 1e2;
  o.step.threads = 1;
  o.monitor.threads = 1;
  o.monitor.gradients = false;
  o.stride = 50;
  o.t_max = 1.0;
  const AmbientVector c = sphere.center();
  double radius_err = 0.0;
  const RunResult r = run(sphere.sample(64, 128), o, [&](const FlowState& st, const MonitorRecord&) {
    if (st.t >= 0.3) return;
    const double expect = sphere_ode_oracle(rho0, 2, st.t);
    const GridSurface& s = st.surface;
    for (int i = 0; i < s.nu(); ++i) {
      for (int j = 0; j < s.nv(); ++j) {
        const double rho = std::acos(std::clamp(Eigen::VectorXd(s.sample(i, j)).dot(c), -1.0, 1.0));
        radius_err = std::max(radius_err, std::abs(rho - expect));
      }
    }
  });
  const double secs = seconds_since(t0);
  const double tstar = std::log(2.0) / 2.0;
  const double rel = r.extinction_time ? std::abs(*r.extinction_time - tstar) / tstar : INFINITY;
  const bool ok = rel <= 0.02 && radius_err <= 1e-2 && secs < 60.0;
  return {ok, "outcome " + std::string(to_string(r.outcome)) + ", T = " +
                  fmt("%.5f", r.extinction_time.value_or(NAN)) + " vs " + fmt("%.5f", tstar) +
                  " (rel " + sci(rel) + " <= 0.02), radius error " + sci(radius_err) +
                  " before t = 0.3 (<= 1e-2), " + fmt("%.1f", secs) + " s single-threaded (< 60 s)"};
}

double drift_rate(const GridSurface& initial, double t_end) {
  FlowState st;
  st.surface = initial;
  StepOptions o;
  o.max_dt = INFINITY;
  while (st.t < t_end) {
    o.max_dt = t_end - st.t;
    st = step(st, o);
  }
  return (st.surface.data() - initial.data()).colwise().norm().maxCoeff() / st.t;
}

Verdict stationary() {
  SurfaceParams eq;
  eq.rho = kPi / 2.0;
  const double t_end = 0.1;
  const double e = drift_rate(make_surface(SurfaceKind::GeodesicSphere, eq).sample(64, 64), t_end);
  const double c = drift_rate(make_surface(SurfaceKind::CliffordTorus).sample(64, 64), t_end);
  return {e <= 1e-6 && c <= 1e-6, "equatorial sphere " + sci(e) + ", Clifford torus " + sci(c) +
                                      " per unit time over t in [0, 0.1] (<= 1e-6)"};
}

Verdict pinching() {
  const GridSurface s =
      perturb(make_surface(SurfaceKind::GeodesicSphere), 32, 64, PerturbMode{}, 0.01);
  RunOptions o;
  o.step.ceiling = 1e3;
  o.monitor.cone = ConeParams::thm1(2);
  o.stride = 10;
  const RunResult r = run(s, o);
  double q_worst = -INFINITY;
  for (const auto& rec : r.records) q_worst = std::max(q_worst, rec.q_max);
  const double q0 = r.records.front().q_max;
  const double ratio = r.records.back().ratio_max;
  const bool ok = q0 < 0.0 && q_worst < 0.0 && r.outcome == Outcome::Shrinking &&
                  std::abs(ratio - 0.5) <= 0.05;
  return {ok, "initial Q max " + fmt("%.4f", q0) + ", largest Q max over " +
                  std::to_string(r.records.size()) + " records " + fmt("%.4f", q_worst) +
                  " (< 0), outcome " + std::string(to_string(r.outcome)) + ", final ratio_max " +
                  fmt("%.5f", ratio) + " (within 0.05 of 1/2)"};
}

Verdict gradients() {
  struct Case {
    std::string name;
    GridSurface s;
  };
  std::vector<Case> cases;
  const PerturbMode mode{};
  for (SurfaceKind k : {SurfaceKind::GeodesicSphere, SurfaceKind::CliffordTorus,
                        SurfaceKind::FlatTorus, SurfaceKind::Veronese}) {
    const CanonicalSurface s = make_surface(k);
    const int nv = s.topology() == Topology::Sphere ? 256 : 128;
    cases.push_back({std::string(surface_name(k)), s.sample(128, nv)});
    cases.push_back({std::string(surface_name(k)) + "+0.01", perturb(s, 128, nv, mode, 0.01)});
  }
  double m1 = INFINITY, m2 = INFINITY, m3 = INFINITY;
  std::string worst_case;
  for (const auto& c : cases) {
    const MarginSummary r = gradient_margin_field(c.s, geometry_field(c.s));
    const double low = std::min({r.m1_min, r.m2_min, r.m3_min.value_or(INFINITY)});
    if (low < std::min({m1, m2, m3})) worst_case = c.name;
    m1 = std::min(m1, r.m1_min);
    m2 = std::min(m2, r.m2_min);
    m3 = std::min(m3, r.m3_min.value_or(INFINITY));
  }
  const bool ok = m1 >= -1e-6 && m2 >= -1e-6 && m3 >= -1e-6;
  return {ok, "min m1 " + sci(m1) + ", m2 " + sci(m2) + ", m3 " + sci(m3) + " over " +
                  std::to_string(cases.size()) + " fields at 128 rows, lowest on " + worst_case +
                  " (>= -1e-6)"};
}

Verdict sweeps() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path root = fs::temp_directory_path() / "pinchflow_acceptance_sweeps";
  fs::remove_all(root);
  struct Run {
    std::string name;
    cli::Json params;
  };
  const std::vector<Run> runs = {
      {"thm1_n4", {{"variant", "thm1"}, {"n", 4}, {"alpha", 1.0 / 3.0}, {"beta", 2.0}, {"resolution", 200}}},
      {"thm1_n2", {{"variant", "thm1"}, {"n", 2}, {"alpha", 2.0 / 3.0}, {"beta", 1.0}, {"resolution", 200}}},
      {"thm2", {{"variant", "thm2"}, {"k", 29.0 / 40.0}, {"resolution", 200}}},
  };
  bool ok = true;
  std::string detail;
  for (const auto& run : runs) {
    const fs::path dir = root / run.name;
    const cli::Json config{{"command", "sweep"}, {"seed", 1}, {"output_dir", dir.string()},
                           {"params", run.params}};
    std::ostringstream out, err;
    std::string first;
    bool same = true;
    for (int pass = 0; pass < 2; ++pass) {
      if (cli::execute(config, out, err) != cli::kPassed) ok = false;
      std::ifstream f(dir / "sweep.json");
      std::stringstream bytes;
      bytes << f.rdbuf();
      if (pass == 0) first = bytes.str();
      else same = same && bytes.str() == first;
    }
    const cli::Json j = cli::Json::parse(first);
    bool complete = j.contains("sup") && j["sup"].is_number() && j.contains("argmax") &&
                    j["samples"].get<long>() >= 200L * 200 * 200;
    bool claim = false;
    for (const auto& n : j["notes"]) {
      const std::string s = n.get<std::string>();
      claim = claim || (s.find("claim under test") != std::string::npos &&
                        s.find("agreement") != std::string::npos);
    }
    complete = complete && claim;
    if (run.params["variant"] == "thm1") {
      complete = complete && j["critical"].is_object() && !j["critical"]["scan"].empty();
    } else {
      complete = complete && j["landscape"]["bins"].size() > 0;
    }
    ok = ok && complete && same;
    std::string verdict;
    for (const auto& n : j["notes"]) {
      const std::string s = n.get<std::string>();
      if (s.find("claim under test") != std::string::npos) {
        verdict = s.find("disagreement") != std::string::npos ? "disagreement" : "agreement";
      }
    }
    detail += std::string(detail.empty() ? "" : "; ") + run.name + " sup " +
              fmt("%.3e", j["sup"].get<double>()) + " " + verdict + ", " +
              std::to_string(j["critical"].is_object() ? j["critical"]["brackets"].size() : 0) +
              " brackets" + (complete ? "" : ", incomplete") + (same ? "" : ", not reproducible");
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 600.0;
  return {ok, detail + "; byte-identical reruns; " + fmt("%.1f", secs) + " s for six 200^3 sweeps (< 600 s)"};
}

Verdict utilities() {
  const BlowupTime b = blowup_time(1.0, 0.0, 2);
  const double h = harnack_bound(2.0, 1.0, 0.0, 0.0, 0.5);
  const BlowupTime c = blowup_time(0.7, 0.3, 3);
  const bool ok = b.t_star == 0.25 && h == 1.0 && c(0.3) == 0.7 &&
                  blowup_time(0.5, 1.0, 4).t_star == 2.0;
  return {ok, "t_star " + fmt("%.17g", b.t_star) + " (0.25), Harnack bound " + fmt("%.17g", h) +
                  " (1.0), b(tau) = b0 exactly"};
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, allowed;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--only") only = parse_list(argv[i + 1]);
    else if (flag == "--allow-fail") allowed = parse_list(argv[i + 1]);
    else {
      std::fprintf(stderr, "unknown flag %s\n", flag.c_str());
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"Simons nonlinearity oracle", simons},
      {"K^perp reaction oracle", kperp},
      {"Li-Li bound", li_li},
      {"canonical invariants", canonical_invariants},
      {"discrete convergence", convergence},
      {"flow vs ODE oracle", flow_oracle},
      {"stationary fixtures", stationary},
      {"pinching preservation", pinching},
      {"gradient inequalities", gradients},
      {"sweep reporting", sweeps},
      {"utility formulas", utilities},
  };

  int unexpected = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %d: %s: %s%s\n", v.pass ? "PASS" : "FAIL", id,
                criteria[k].first.c_str(), v.detail.c_str(),
                !v.pass && allowed.count(id) ? " [allowed to fail]" : "");
    std::fflush(stdout);
    if (!v.pass && !allowed.count(id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
