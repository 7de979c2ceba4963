#include "pinchflow/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pinchflow/canonical.hpp"
#include "pinchflow/errors.hpp"
#include "pinchflow/field.hpp"
#include "pinchflow/flow.hpp"
#include "pinchflow/frames.hpp"
#include "pinchflow/identities.hpp"
#include "pinchflow/pinching.hpp"

namespace pinchflow::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kCommands[] = {"verify", "canonical", "sweep", "flow", "report"};

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

std::string fixed(double v, int digits = 6) {
  if (std::abs(v) < 0.5 * std::pow(10.0, -digits)) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// JSON has no inf or nan.
Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

void write_json(const fs::path& path, const Json& j) {
  std::ofstream f(path);
  if (!f) config_error("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

std::string config_comment(const Json& config) { return "# config: " + config.dump(); }

// ---------------------------------------------------------------- config

Json coerce(const std::string& key, const Json& def, const Json& v) {
  auto bad = [&](const char* want) {
    config_error("param '" + key + "' must be " + want + ", got " + v.dump());
  };
  if (def.is_null()) {
    if (v.is_null()) return v;
    if (!v.is_number()) bad("a number or null");
    return Json(v.get<double>());
  }
  if (def.is_boolean()) {
    if (!v.is_boolean()) bad("a boolean");
    return v;
  }
  if (def.is_number_integer()) {
    if (v.is_number_integer()) return v;
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9e15) return Json(static_cast<long long>(d));
    }
    bad("an integer");
  }
  if (def.is_number()) {
    if (!v.is_number()) bad("a number");
    return Json(v.get<double>());
  }
  if (!v.is_string()) bad("a string");
  return v;
}

// Flag text to JSON of the default's type.
Json parse_flag(const std::string& key, const Json& def, const std::string& text) {
  auto strict_double = [&](const std::string& s) {
    std::size_t pos = 0;
    double d = 0.0;
    try {
      d = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size()) config_error("param '" + key + "': '" + s + "' is not a number");
    return d;
  };
  if (def.is_null()) {
    if (text == "none" || text == "null") return Json(nullptr);
    return Json(strict_double(text));
  }
  if (def.is_boolean()) {
    if (text == "true" || text == "1" || text == "on") return Json(true);
    if (text == "false" || text == "0" || text == "off") return Json(false);
    config_error("param '" + key + "': '" + text + "' is not a boolean");
  }
  if (def.is_number_integer()) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != text.size()) {
      config_error("param '" + key + "': '" + text + "' is not an integer");
    }
    return Json(v);
  }
  if (def.is_number()) return Json(strict_double(text));
  return Json(text);
}

std::string flag_name(const std::string& key) {
  std::string s = key;
  std::replace(s.begin(), s.end(), '_', '-');
  return "--" + s;
}

// ---------------------------------------------------------------- verify

struct Invariant {
  std::string name;
  std::string description;
  double tolerance = 0.0;
  double worst = 0.0;
  long trials = 0;
  bool claim = false;  // reported, but does not set the exit status

  void observe(double residual) {
    ++trials;
    if (!(residual <= worst)) worst = std::isnan(residual) ? INFINITY : residual;
  }
  bool passed() const { return worst <= tolerance; }
};

SecondFundamentalForm random_sff(std::mt19937_64& rng, int n, int k) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>(n * n * k));
  for (double& x : c) x = u(rng);
  return SecondFundamentalForm::from_components(n, k, c);
}

SecondFundamentalForm traceless(const SecondFundamentalForm& h) {
  const NormalVector mean = h.mean_curvature();
  SecondFundamentalForm out = h;
  for (int a = 0; a < h.codim(); ++a) {
    for (int i = 0; i < h.dim(); ++i) out.set(i, i, a, h(i, i, a) - mean(a) / h.dim());
  }
  return out;
}

double rel(double x, double ref) { return std::abs(x - ref) / (1.0 + std::abs(ref)); }

int run_verify(const Json& config, const fs::path& dir, std::ostream& out) {
  const Json& p = config["params"];
  const long trials = p["trials"].get<long>();
  const double kbar = p["kbar"].get<double>();
  if (trials < 1) config_error("trials must be positive");
  if (kbar < 0.0) config_error("kbar must be nonnegative");

  std::vector<Invariant> inv = {
      {"simons_nonlinearity", "index-sum Z vs (|H|^2-|A|^2)|A°|^2 - 2(K^perp)^2, relative", 1e-10},
      {"kperp_reaction", "index-sum reaction of K^perp vs K^perp(|A|^2+2|A°|^2) - 2 kbar K^perp, relative", 1e-10},
      {"kperp_reaction_printed_form",
       "index-sum reaction of K^perp vs K^perp(|A|^2+2|A°|^2-2b^2) - 2 kbar K^perp, relative", 1e-10,
       0.0, 0, true},
      {"normal_curvature_norm", "|Rm^perp|^2 vs 4 (K^perp)^2, relative", 1e-10},
      {"kperp_special_frame", "|K^perp| vs 2a|c| in the special frame, relative", 1e-10},
      {"li_li_bound", "R1 - (3/2)|A°|^4 on traceless h (positive part)", 1e-12},
      {"special_frame_roundtrip", "max |reconstruct(specialize(h)) - h|, relative", 1e-12},
      {"special_frame_normalization", "max(-a, 0) + ||H| - h_norm|", 1e-12},
      {"reaction_homogeneity", "reaction of Q under h -> l h, kbar -> l^2 kbar vs l^4, relative", 1e-12},
  };
  auto get = [&](std::string_view name) -> Invariant& {
    for (auto& i : inv) {
      if (i.name == name) return i;
    }
    throw std::logic_error("unknown invariant");
  };

  std::mt19937_64 rng(config["seed"].get<std::uint64_t>());
  std::uniform_real_distribution<double> lambda(0.5, 2.0);
  const ConeParams cones[2] = {ConeParams::thm1(2, kbar), ConeParams::thm2(29.0 / 40.0, 0.0, kbar)};
  for (long t = 0; t < trials; ++t) {
    const SecondFundamentalForm h = random_sff(rng, 2, 2);
    const ReactionTerms r = reaction_terms(h);
    get("simons_nonlinearity").observe(rel(*r.z_closed, r.z_brute));

    const KperpChecks k = kperp_checks(h, kbar);
    const double a2 = h.norm2();
    const double kperp = normal_curvature(h);
    const double traceless2 = a2 - h.mean_curvature().squaredNorm() / 2.0;
    get("kperp_reaction")
        .observe(rel(kperp * (a2 + 2.0 * traceless2) - 2.0 * kbar * kperp, k.reaction_brute));
    get("kperp_reaction_printed_form").observe(rel(k.reaction_closed, k.reaction_brute));

    get("normal_curvature_norm").observe(rel(4.0 * kperp * kperp, r.rm_perp_2));

    const ABCFrame f = specialize(h);
    get("kperp_special_frame").observe(rel(2.0 * f.a * std::abs(f.c), std::abs(kperp)));

    const SecondFundamentalForm back = reconstruct(f);
    double diff = 0.0, scale = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          diff = std::max(diff, std::abs(back(i, j, a) - h(i, j, a)));
          scale = std::max(scale, std::abs(h(i, j, a)));
        }
      }
    }
    get("special_frame_roundtrip").observe(diff / (1.0 + scale));
    get("special_frame_normalization")
        .observe(std::max(-f.a, 0.0) + std::abs(h.mean_curvature().norm() - f.h_norm));

    const double li = kperp_checks(traceless(random_sff(rng, 2, 2)), kbar).li_li_margin;
    get("li_li_bound").observe(std::max(-li, 0.0));

    const double l = lambda(rng);
    for (const ConeParams& c : cones) {
      ConeParams scaled = c;
      scaled.kbar = l * l * c.kbar;
      const double expect = std::pow(l, 4) * reaction_of_q(h, c);
      get("reaction_homogeneity").observe(rel(reaction_of_q(h.scaled(l), scaled), expect));
    }
  }

  Json list = Json::array(), claims = Json::array();
  bool all = true;
  out << "invariant                      max residual  tolerance  status\n";
  for (const auto& i : inv) {
    if (!i.claim) all = all && i.passed();
    (i.claim ? claims : list)
        .push_back({{"name", i.name},
                    {"description", i.description},
                    {"evaluations", i.trials},
                    {"max_residual", number(i.worst)},
                    {"tolerance", i.tolerance},
                    {"passed", i.passed()}});
    char line[160];
    std::snprintf(line, sizeof line, "%-30s %12.3e  %9.1e  %s%s\n", i.name.c_str(), i.worst,
                  i.tolerance, i.passed() ? "PASS" : "FAIL", i.claim ? " (claim under test)" : "");
    out << line;
  }
  write_json(dir / "verify.json", Json{{"config", config},
                                       {"invariants", list},
                                       {"claims", claims},
                                       {"passed", all}});
  return all ? kPassed : kCheckFailed;
}

// ---------------------------------------------------------------- canonical

struct Row {
  std::string quantity;
  double reference = 0.0;
  double analytic_dev = 0.0;  // max |computed - reference| over analytic samples
  double analytic_value = 0.0;
  std::optional<double> discrete_dev;
};

bool sphere_chart(SurfaceKind k) { return k == SurfaceKind::GeodesicSphere || k == SurfaceKind::Veronese; }

Json canonical_surface(SurfaceKind kind, const Json& p, std::ostream& out, bool& ok) {
  SurfaceParams sp;
  sp.rho = p["rho"].get<double>();
  sp.n = p["n"].get<int>();
  sp.m = p["m"].get<int>();
  sp.r1 = p["r1"].get<double>();
  sp.r2 = p["r2"].get<double>();
  const CanonicalSurface s = make_surface(kind, sp);
  const ReferenceInvariants& ref = s.reference();
  const int samples = p["samples"].get<int>();
  const int res = p["resolution"].get<int>();
  const double kbar = 1.0;
  if (samples < 1) config_error("samples must be positive");

  // Sample points avoid the chart poles on sphere charts.
  const bool sph = sphere_chart(kind);
  std::vector<std::vector<double>> pts;
  for (int a = 0; a < samples; ++a) {
    for (int b = 0; b < samples; ++b) {
      const double x = (a + 0.5) / samples;
      const double y = 2.0 * std::numbers::pi * (b + 0.5) / samples;
      const double first = sph ? 0.1 + (std::numbers::pi - 0.2) * x : 2.0 * std::numbers::pi * x;
      std::vector<double> u(s.dim(), first);
      u.back() = y;
      pts.push_back(u);
    }
  }

  std::vector<Row> rows;
  rows.push_back(Row{"|A|^2", ref.norm_a2, 0.0, 0.0, std::nullopt});
  rows.push_back(Row{"|H|^2", ref.norm_h2, 0.0, 0.0, std::nullopt});
  rows.push_back(Row{"|traceless A|^2", ref.norm_traceless_a2, 0.0, 0.0, std::nullopt});
  if (ref.kperp_abs) rows.push_back(Row{"|K^perp|", *ref.kperp_abs, 0.0, 0.0, std::nullopt});
  if (ref.gauss) rows.push_back(Row{"K", *ref.gauss, 0.0, 0.0, std::nullopt});
  const bool classify = ref.minimal && ref.kperp_abs.has_value();
  if (classify) rows.push_back(Row{"|A|^2 - (1 +/- sqrt(1 - 2 K^perp^2))", 0.0, 0.0, 0.0, std::nullopt});
  const bool factor = kind == SurfaceKind::Veronese;
  if (factor) rows.push_back(Row{"2 kbar - b^2 - 3a^2 - 3c^2", 0.0, 0.0, 0.0, std::nullopt});

  auto values = [&](const PointGeometry& g) {
    std::vector<double> v = {g.norm_a2, g.norm_h2, g.norm_traceless_a2};
    if (ref.kperp_abs) v.push_back(std::abs(*g.kperp));
    if (ref.gauss) v.push_back(*g.gauss);
    if (classify) {
      const double root = std::sqrt(std::max(0.0, 1.0 - 2.0 * *g.kperp * *g.kperp));
      v.push_back(std::min(std::abs(g.norm_a2 - 1.0 - root), std::abs(g.norm_a2 - 1.0 + root)));
    }
    if (factor) v.push_back(kperp_checks(g.sff, kbar).laplacian_factor);
    return v;
  };

  std::string branch;
  for (const auto& u : pts) {
    const PointGeometry g = point_geometry(s.jet(u), kbar);
    const std::vector<double> v = values(g);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double dev = std::abs(v[r] - rows[r].reference);
      if (&u == &pts.front() || !(dev <= rows[r].analytic_dev)) {
        rows[r].analytic_dev = std::isnan(dev) ? INFINITY : std::max(dev, rows[r].analytic_dev);
        rows[r].analytic_value = v[r];
      }
    }
    if (classify && branch.empty()) {
      const double root = std::sqrt(std::max(0.0, 1.0 - 2.0 * *g.kperp * *g.kperp));
      branch = std::abs(g.norm_a2 - 1.0 - root) <= std::abs(g.norm_a2 - 1.0 + root) ? "plus" : "minus";
    }
  }

  // Discrete check on the sampled grid, sphere charts at res x 2 res.
  std::optional<std::array<int, 2>> grid;
  if (res > 0 && s.dim() == 2) {
    const int nu = res, nv = sph ? 2 * res : res;
    grid = std::array<int, 2>{nu, nv};
    const GeometryField field = geometry_field(s.sample(nu, nv), kbar);
    for (auto& r : rows) r.discrete_dev = 0.0;
    for (const auto& pt : field.points) {
      if (!pt) continue;
      const std::vector<double> v = values(*pt);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        rows[r].discrete_dev = std::max(*rows[r].discrete_dev, std::abs(v[r] - rows[r].reference));
      }
    }
  }

  const double atol = p["analytic_tolerance"].get<double>();
  const double dtol = p["discrete_tolerance"].get<double>();
  bool passed = true;
  out << "surface " << surface_name(kind) << "\n";
  out << "  quantity                               computed     reference   max dev     grid err\n";
  Json jrows = Json::array();
  for (const auto& r : rows) {
    const bool row_ok = r.analytic_dev <= atol && (!r.discrete_dev || *r.discrete_dev <= dtol);
    passed = passed && row_ok;
    char line[200];
    std::snprintf(line, sizeof line, "  %-36s %10s  %10s  %10s  %10s  %s\n", r.quantity.c_str(),
                  fixed(r.analytic_value).c_str(), fixed(r.reference).c_str(),
                  sci(r.analytic_dev).c_str(), r.discrete_dev ? sci(*r.discrete_dev).c_str() : "-",
                  row_ok ? "PASS" : "FAIL");
    out << line;
    jrows.push_back({{"quantity", r.quantity},
                     {"reference", r.reference},
                     {"computed", number(r.analytic_value)},
                     {"analytic_max_deviation", number(r.analytic_dev)},
                     {"discrete_max_deviation", number(r.discrete_dev)},
                     {"passed", row_ok}});
  }
  if (classify) out << "  classification branch: " << branch << "\n";
  ok = ok && passed;
  Json j{{"surface", std::string(surface_name(kind))},
         {"minimal", ref.minimal},
         {"analytic_samples", static_cast<long>(pts.size())},
         {"grid", grid ? Json(*grid) : Json(nullptr)},
         {"rows", jrows},
         {"passed", passed}};
  if (classify) j["classification_branch"] = branch;
  return j;
}

int run_canonical(const Json& config, const fs::path& dir, std::ostream& out) {
  const Json& p = config["params"];
  const std::string name = p["surface"].get<std::string>();
  std::vector<SurfaceKind> kinds;
  if (name == "all") {
    kinds = {SurfaceKind::GeodesicSphere, SurfaceKind::CliffordTorus, SurfaceKind::FlatTorus,
             SurfaceKind::Veronese};
  } else {
    kinds = {surface_kind(name)};
  }
  bool ok = true;
  Json surfaces = Json::array();
  for (SurfaceKind k : kinds) surfaces.push_back(canonical_surface(k, p, out, ok));
  write_json(dir / "canonical.json",
             Json{{"config", config}, {"surfaces", surfaces}, {"passed", ok}});
  return ok ? kPassed : kCheckFailed;
}

// ---------------------------------------------------------------- sweep

Json sample_json(const SweepSample& s) {
  return {{"angles", s.angles}, {"a", s.a},   {"b", s.b},         {"c", s.c},
          {"kbar", s.kbar},     {"h2", s.h2}, {"value", s.value}};
}

int run_sweep(const Json& config, const fs::path& dir, std::ostream& out) {
  const Json& p = config["params"];
  const std::string variant = p["variant"].get<std::string>();
  const double kbar = p["kbar"].get<double>();
  ConeParams cone;
  if (variant == "thm1") {
    cone = ConeParams::thm1(p["n"].get<int>(), kbar);
    if (!p["alpha"].is_null()) cone.alpha = p["alpha"].get<double>();
    if (!p["beta"].is_null()) cone.beta = p["beta"].get<double>();
  } else if (variant == "thm2") {
    if (p["n"].get<int>() != 2) config_error("thm2 sweeps need n = 2");
    cone = ConeParams::thm2(p["k"].get<double>(), p["delta"].get<double>(), kbar);
  } else {
    config_error("variant must be thm1 or thm2");
  }

  SweepSpec spec;
  spec.resolution = p["resolution"].get<int>();
  spec.refine_rounds = p["refine_rounds"].get<int>();
  spec.refine_factor = p["refine_factor"].get<int>();
  spec.refine_half_width = p["refine_half_width"].get<int>();
  const std::string stratum = p["stratum"].get<std::string>();
  if (stratum == "full") spec.stratum = Stratum::Full;
  else if (stratum == "h-zero") spec.stratum = Stratum::HZero;
  else config_error("stratum must be full or h-zero");
  const std::string r3 = p["r3_source"].get<std::string>();
  if (r3 == "closed") spec.r3_source = R3Source::Closed;
  else if (r3 == "index-sum") spec.r3_source = R3Source::IndexSum;
  else config_error("r3_source must be closed or index-sum");
  spec.find_critical = p["find_critical"].get<bool>();
  spec.critical_resolution = p["critical_resolution"].get<int>();
  spec.critical_scan = p["critical_scan"].get<int>();
  spec.critical_width = p["critical_width"].get<double>();
  if (!p["critical_lo"].is_null()) spec.critical_lo = p["critical_lo"].get<double>();
  if (!p["critical_hi"].is_null()) spec.critical_hi = p["critical_hi"].get<double>();
  spec.threads = p["threads"].get<int>();
  if (spec.resolution < 2 || spec.refine_rounds < 0 || spec.refine_factor < 2 ||
      spec.refine_half_width < 1 || spec.critical_resolution < 2 || spec.critical_scan < 2 ||
      !(spec.critical_width > 0.0)) {
    config_error("sweep resolution settings out of range");
  }

  const SweepReport rep = reaction_sweep(cone, spec);

  Json params{{"variant", std::string(to_string(cone.variant))},
              {"n", cone.n},
              {"alpha", cone.alpha},
              {"beta", cone.beta},
              {"k", cone.k},
              {"gamma", cone.gamma},
              {"epsilon", cone.epsilon},
              {"delta", cone.delta},
              {"kbar", cone.kbar}};
  Json landscape{{"positive", rep.landscape.positive},
                 {"nonpositive", rep.landscape.nonpositive},
                 {"infeasible", rep.landscape.infeasible},
                 {"bins", Json::array()}};
  for (const auto& b : rep.landscape.bins) {
    landscape["bins"].push_back({{"kbar_lo", b.kbar_lo},
                                 {"kbar_hi", b.kbar_hi},
                                 {"positive", b.positive},
                                 {"feasible", b.feasible},
                                 {"sup", number(b.sup)}});
  }
  Json critical = nullptr;
  if (rep.critical) {
    const CriticalReport& c = *rep.critical;
    Json scan = Json::array(), brackets = Json::array();
    for (const auto& [x, sup] : c.scan) scan.push_back({x, number(sup)});
    for (const auto& b : c.brackets) {
      brackets.push_back(
          {{"lo", b.lo}, {"hi", b.hi}, {"sup_lo", number(b.sup_lo)}, {"sup_hi", number(b.sup_hi)}});
    }
    critical = {{"parameter", c.parameter}, {"width", c.width}, {"scan", scan}, {"brackets", brackets}};
  }
  Json j{{"config", config},     {"params", params},   {"sup", rep.sup},
         {"argmax", sample_json(rep.argmax)}, {"samples", rep.samples},
         {"landscape", landscape}, {"critical", critical}, {"notes", rep.notes}};
  if (cone.variant == ConeVariant::Thm1 && cone.alpha > 1.0 / cone.n) {
    const DiscriminantReport d = discriminant_report(cone.n, cone.alpha, cone.beta);
    j["discriminant"] = {{"delta_printed_1", d.delta_printed_1},
                         {"delta_printed_2", d.delta_printed_2},
                         {"direct_negativity", d.direct_negativity},
                         {"direct_max", d.direct_max},
                         {"coefficients", d.coefficients}};
  }
  write_json(dir / "sweep.json", j);

  out << "sweep " << to_string(cone.variant) << ": sup " << rep.sup << " over " << rep.samples
      << " samples\n";
  out << "  argmax a=" << rep.argmax.a << " b=" << rep.argmax.b << " c=" << rep.argmax.c
      << " kbar=" << rep.argmax.kbar << " |H|^2=" << rep.argmax.h2 << "\n";
  if (rep.critical) {
    for (const auto& b : rep.critical->brackets) {
      out << "  critical " << rep.critical->parameter << " in [" << b.lo << ", " << b.hi << "]\n";
    }
  }
  for (const auto& n : rep.notes) out << "  note: " << n << "\n";
  return kPassed;
}

// ---------------------------------------------------------------- flow

int run_flow(const Json& config, const fs::path& dir, std::ostream& out) {
  const Json& p = config["params"];
  const std::string initial = p["initial"].get<std::string>();
  const std::string name = p["surface"].get<std::string>();
  // A snapshot's clock is not carried over; runs start at t = 0.
  GridSurface surface;
  std::optional<CanonicalSurface> canon;
  const double amplitude = p["perturb_amplitude"].get<double>();
  if (!initial.empty()) {
    std::ifstream f(initial);
    if (!f) config_error("cannot read initial snapshot " + initial);
    surface = read_snapshot(f).surface;
  } else {
    SurfaceParams sp;
    sp.rho = p["rho"].get<double>();
    sp.r1 = p["r1"].get<double>();
    sp.r2 = p["r2"].get<double>();
    canon = make_surface(surface_kind(name), sp);
    const int nu = p["nu"].get<int>();
    int nv = p["nv"].get<int>();
    if (nv == 0) nv = canon->topology() == Topology::Sphere ? 2 * nu : nu;
    if (nu < 8 || nv < 8) config_error("grids need at least 8 points per direction");
    PerturbMode mode;
    mode.ku = p["perturb_ku"].get<int>();
    mode.kv = p["perturb_kv"].get<int>();
    mode.axis = p["perturb_axis"].get<int>();
    surface = amplitude != 0.0 ? perturb(*canon, nu, nv, mode, amplitude) : canon->sample(nu, nv);
  }

  RunOptions o;
  o.step.scheme = scheme_from_string(p["scheme"].get<std::string>());
  o.step.cfl = p["cfl"].get<double>();
  o.step.ceiling = p["ceiling"].get<double>();
  o.step.filter = p["filter"].get<bool>();
  o.step.threads = p["threads"].get<int>();
  o.t_max = p["t_max"].get<double>();
  o.stride = p["stride"].get<int>();
  o.flat_threshold = p["flat_threshold"].get<double>();
  o.sustain = p["sustain"].get<int>();
  o.shrink_area_fraction = p["shrink_area_fraction"].get<double>();
  o.ratio_tolerance = p["ratio_tolerance"].get<double>();
  o.max_steps = p["max_steps"].get<long>();
  const std::string cone = p["cone"].get<std::string>();
  if (cone == "thm1") o.monitor.cone = ConeParams::thm1(2);
  else if (cone == "thm2") o.monitor.cone = ConeParams::thm2(p["k"].get<double>());
  else if (cone != "none") config_error("cone must be thm1, thm2 or none");
  if (o.monitor.cone) o.monitor.cone->validate();
  o.monitor.sigma = p["sigma"].get<double>();
  o.monitor.ratio_threshold = p["ratio_threshold"].get<double>();
  o.monitor.harnack.csharp = p["harnack_csharp"].get<double>();
  o.monitor.harnack.delta0 = p["harnack_delta0"].get<double>();
  o.monitor.harnack.gamma = p["harnack_gamma"].get<double>();
  o.monitor.harnack.h_sharp = p["harnack_h_sharp"].get<double>();
  o.monitor.gradients = p["gradients"].get<bool>();
  o.monitor.threads = o.step.threads;
  if (!(o.step.cfl > 0.0) || !(o.t_max > 0.0) || o.stride < 1 || o.sustain < 1 || o.max_steps < 1) {
    config_error("flow settings out of range");
  }
  const bool oracle = canon && canon->kind() == SurfaceKind::GeodesicSphere && amplitude == 0.0;
  if (oracle) o.monitor.center = canon->center();

  const int every = p["snapshot_every"].get<int>();
  const fs::path snapdir = dir / "snapshots";
  fs::create_directories(snapdir);
  const std::string comment = config_comment(config);
  Json snapshots = Json::array();
  auto snapshot = [&](const FlowState& st) {
    char name[64];
    std::snprintf(name, sizeof name, "step_%09ld.txt", st.step_index);
    const std::string rel_name = std::string("snapshots/") + name;
    if (!snapshots.empty() && snapshots.back() == rel_name) return;
    std::ofstream f(snapdir / name);
    write_snapshot(f, st);
    f << comment << '\n';
    snapshots.push_back(rel_name);
  };

  FlowState start;
  start.surface = surface;
  snapshot(start);
  long count = 0;
  RunResult res = run(surface, o, [&](const FlowState& st, const MonitorRecord&) {
    if (every > 0 && count > 0 && count % every == 0) snapshot(st);
    ++count;
  });
  snapshot(res.final_state);

  {
    std::ofstream f(dir / "monitor.csv");
    f << comment << '\n';
    write_monitor_csv(f, res.records);
  }

  Json violations = Json::array();
  for (const auto& v : res.pinching_violations) {
    violations.push_back({{"t", v.t}, {"i", v.i}, {"j", v.j}, {"q", v.q}});
  }
  const MonitorRecord& first = res.records.front();
  const MonitorRecord& last = res.records.back();
  Json j{{"config", config},
         {"outcome", std::string(to_string(res.outcome))},
         {"reason", res.reason},
         {"t_final", res.final_state.t},
         {"steps", res.final_state.step_index},
         {"records", static_cast<long>(res.records.size())},
         {"extinction_time", number(res.extinction_time)},
         {"area_initial", first.area},
         {"area_final", last.area},
         {"a2_max_final", last.a2_max},
         {"ratio_max_final", number(last.ratio_max)},
         {"q_max_initial", number(first.q_max)},
         {"q_max_final", number(last.q_max)},
         {"pinching_violations", violations},
         {"max_displacement_rate", res.max_displacement_rate},
         {"monitor_csv", "monitor.csv"},
         {"snapshots", snapshots}};
  out << "outcome " << to_string(res.outcome) << " at t = " << res.final_state.t << " after "
      << res.final_state.step_index << " steps (" << res.reason << ")\n";

  if (oracle) {
    const double rho0 = canon->params().rho;
    const int n = canon->params().n;
    const double tstar = sphere_extinction_time(rho0, n);
    const double window = p["oracle_window"].get<double>() * tstar;
    double worst = 0.0;
    for (const auto& r : res.records) {
      if (!(r.t < window) || !r.mean_radius) continue;
      worst = std::max(worst, std::abs(*r.mean_radius - sphere_ode_oracle(rho0, n, r.t)));
    }
    Json orc{{"extinction_time", number(tstar)},
             {"radius_window", number(window)},
             {"radius_max_error", worst}};
    if (res.extinction_time && std::isfinite(tstar)) {
      orc["extinction_relative_error"] = std::abs(*res.extinction_time - tstar) / tstar;
    }
    j["oracle"] = orc;
    out << "  ODE oracle: T* = " << tstar << ", radius error " << worst;
    if (res.extinction_time) out << ", measured T = " << *res.extinction_time;
    out << "\n";
  }
  write_json(dir / "flow.json", j);
  if (res.outcome == Outcome::NumericalBlowup) return kNumericalAbort;
  return res.pinching_violations.empty() ? kPassed : kCheckFailed;
}

// ---------------------------------------------------------------- report

std::string summarize(const fs::path& path, const Json& j) {
  std::ostringstream s;
  const std::string cmd = j["config"].value("command", "?");
  s << "== " << path.generic_string() << " (" << cmd << ")\n";
  if (j["config"].contains("params")) s << "config: " << j["config"].dump() << "\n";
  if (cmd == "verify") {
    for (const char* group : {"invariants", "claims"}) {
      if (!j.contains(group)) continue;
      for (const auto& i : j[group]) {
        s << "  " << i["name"].get<std::string>() << ": max residual " << i["max_residual"].dump()
          << (i["passed"].get<bool>() ? " PASS" : " FAIL")
          << (std::string(group) == "claims" ? " (claim under test)" : "") << "\n";
      }
    }
  } else if (cmd == "canonical") {
    for (const auto& surf : j["surfaces"]) {
      s << "  " << surf["surface"].get<std::string>() << ":";
      for (const auto& r : surf["rows"]) {
        s << " " << r["quantity"].get<std::string>() << "=" << r["computed"].dump();
      }
      s << (surf["passed"].get<bool>() ? " PASS" : " FAIL") << "\n";
    }
  } else if (cmd == "sweep") {
    s << "  sup " << j["sup"].dump() << " over " << j["samples"].dump() << " samples\n";
    for (const auto& n : j["notes"]) s << "  note: " << n.get<std::string>() << "\n";
  } else if (cmd == "flow") {
    s << "  outcome " << j["outcome"].get<std::string>() << " at t = " << j["t_final"].dump()
      << ", extinction time " << j["extinction_time"].dump() << ", pinching violations "
      << j["pinching_violations"].size() << "\n";
    if (j.contains("oracle")) s << "  oracle " << j["oracle"].dump() << "\n";
  }
  if (j.contains("passed")) s << "  passed: " << (j["passed"].get<bool>() ? "yes" : "no") << "\n";
  return s.str();
}

int run_report(const Json& config, const fs::path& dir, std::ostream& out) {
  std::string input = config["params"]["input"].get<std::string>();
  if (input.empty()) input = config["output_dir"].get<std::string>();
  if (!fs::is_directory(input)) config_error("report input is not a directory: " + input);
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(input)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string text;
  for (const auto& f : files) {
    std::ifstream in(f);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::parse_error&) {
      continue;
    }
    if (!j.is_object() || !j.contains("config") || !j["config"].is_object()) continue;
    if (j["config"].value("command", "") == "report") continue;
    text += summarize(fs::relative(f, input), j);
  }
  if (text.empty()) config_error("no pinchflow artifacts under " + input);
  const std::string full = config_comment(config) + "\n" + text;
  std::ofstream(dir / "report.txt") << full;
  out << text;
  return kPassed;
}

}  // namespace

// ---------------------------------------------------------------- public

Json default_params(std::string_view command) {
  if (command == "verify") return {{"trials", 10000}, {"kbar", 1.0}};
  if (command == "canonical") {
    return {{"surface", "all"},
            {"rho", std::numbers::pi / 3.0},
            {"n", 2},
            {"m", 4},
            {"r1", 0.6},
            {"r2", 0.8},
            {"samples", 16},
            {"resolution", 64},
            {"analytic_tolerance", 1e-9},
            {"discrete_tolerance", 1e-4}};
  }
  if (command == "sweep") {
    return {{"variant", "thm1"},
            {"n", 2},
            {"alpha", nullptr},
            {"beta", nullptr},
            {"k", 0.725},
            {"delta", 0.0},
            {"kbar", 1.0},
            {"resolution", 64},
            {"refine_rounds", 3},
            {"refine_factor", 4},
            {"refine_half_width", 4},
            {"stratum", "full"},
            {"r3_source", "closed"},
            {"find_critical", true},
            {"critical_resolution", 64},
            {"critical_scan", 16},
            {"critical_width", 1e-4},
            {"critical_lo", nullptr},
            {"critical_hi", nullptr},
            {"threads", 0}};
  }
  if (command == "flow") {
    return {{"surface", "geodesic-sphere"},
            {"initial", ""},
            {"rho", std::numbers::pi / 3.0},
            {"r1", 0.6},
            {"r2", 0.8},
            {"nu", 32},
            {"nv", 0},
            {"perturb_amplitude", 0.0},
            {"perturb_ku", 2},
            {"perturb_kv", 2},
            {"perturb_axis", -1},
            {"scheme", "euler"},
            {"cfl", 0.2},
            {"ceiling", 1e6},
            {"filter", true},
            {"t_max", 1.0},
            {"stride", 10},
            {"flat_threshold", 1e-4},
            {"sustain", 50},
            {"shrink_area_fraction", 0.05},
            {"ratio_tolerance", 0.05},
            {"max_steps", 50000000},
            {"cone", "thm1"},
            {"k", 0.725},
            {"sigma", 0.1},
            {"ratio_threshold", 1e-3},
            {"harnack_csharp", 1.0},
            {"harnack_delta0", 0.1},
            {"harnack_gamma", 2.0},
            {"harnack_h_sharp", 0.0},
            {"gradients", true},
            {"oracle_window", 0.85},
            {"snapshot_every", 0},
            {"threads", 0}};
  }
  if (command == "report") return {{"input", ""}};
  config_error("unknown command '" + std::string(command) + "'");
}

Json resolve_config(const Json& config) {
  if (!config.is_object()) config_error("config must be a JSON object");
  for (const auto& [key, _] : config.items()) {
    if (key != "command" && key != "seed" && key != "output_dir" && key != "params") {
      config_error("unknown config key '" + key + "'");
    }
  }
  if (!config.contains("command") || !config["command"].is_string()) {
    config_error("config needs a string 'command'");
  }
  const std::string command = config["command"].get<std::string>();
  Json params = default_params(command);
  if (config.contains("params")) {
    const Json& given = config["params"];
    if (!given.is_object()) config_error("'params' must be an object");
    for (const auto& [key, value] : given.items()) {
      if (!params.contains(key)) config_error("unknown param '" + key + "' for " + command);
      params[key] = coerce(key, params[key], value);
    }
  }
  Json out;
  out["command"] = command;
  const Json seed = config.contains("seed") ? config["seed"] : Json(0);
  if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<long long>() < 0)) {
    config_error("'seed' must be a nonnegative integer");
  }
  out["seed"] = seed.get<std::uint64_t>();
  const Json dir = config.contains("output_dir") ? config["output_dir"] : Json("pinchflow-out");
  if (!dir.is_string() || dir.get<std::string>().empty()) {
    config_error("'output_dir' must be a nonempty string");
  }
  out["output_dir"] = dir;
  out["params"] = params;
  return out;
}

int execute(const Json& raw, std::ostream& out, std::ostream& err) {
  try {
    const Json config = resolve_config(raw);
    const fs::path dir = config["output_dir"].get<std::string>();
    fs::create_directories(dir);
    const std::string cmd = config["command"].get<std::string>();
    if (cmd == "verify") return run_verify(config, dir, out);
    if (cmd == "canonical") return run_canonical(config, dir, out);
    if (cmd == "sweep") return run_sweep(config, dir, out);
    if (cmd == "flow") return run_flow(config, dir, out);
    return run_report(config, dir, out);
  } catch (const Error& e) {
    err << "pinchflow: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::ConfigError:
      case ErrorCode::BadParams:
      case ErrorCode::BadDims:
        return kConfigError;
      default:
        return kNumericalAbort;
    }
  } catch (const fs::filesystem_error& e) {
    err << "pinchflow: " << e.what() << "\n";
    return kConfigError;
  } catch (const Json::exception& e) {
    err << "pinchflow: " << e.what() << "\n";
    return kConfigError;
  }
}

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"pinchflow: pinching cones and mean curvature flow in spheres"};
  app.require_subcommand(0, 1);
  app.fallthrough();
  std::string config_path, output_dir;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized suites");
  auto* dir_opt = app.add_option("--output-dir", output_dir, "directory for artifacts");

  // One flag per default param, typed by the default.
  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::map<std::string, CLI::Option*>> opts;
  std::map<std::string, CLI::App*> subs;
  for (std::string_view c : kCommands) {
    const std::string cmd(c);
    CLI::App* sub = app.add_subcommand(cmd);
    subs[cmd] = sub;
    const Json defaults = default_params(cmd);
    for (const auto& [key, def] : defaults.items()) {
      opts[cmd][key] = sub->add_option(flag_name(key), values[cmd][key], "default " + def.dump());
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPassed : kConfigError;
  }

  Json config = Json::object();
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) {
      err << "pinchflow: cannot read config " << config_path << "\n";
      return kConfigError;
    }
    try {
      config = Json::parse(f);
    } catch (const Json::parse_error& e) {
      err << "pinchflow: " << e.what() << "\n";
      return kConfigError;
    }
    if (!config.is_object()) {
      err << "pinchflow: config must be a JSON object\n";
      return kConfigError;
    }
  }
  std::string cmd;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) cmd = name;
  }
  if (cmd.empty()) {
    if (!config.contains("command")) {
      err << app.help();
      return kConfigError;
    }
  } else {
    if (config.contains("command") && config["command"] != cmd) {
      err << "pinchflow: config is for '" << config["command"].dump() << "', not " << cmd << "\n";
      return kConfigError;
    }
    config["command"] = cmd;
    try {
      const Json defaults = default_params(cmd);
      for (const auto& [key, opt] : opts[cmd]) {
        if (opt->count() == 0) continue;
        config["params"][key] = parse_flag(key, defaults[key], values[cmd][key]);
      }
    } catch (const Error& e) {
      err << "pinchflow: " << e.what() << "\n";
      return kConfigError;
    }
  }
  if (seed_opt->count()) config["seed"] = seed;
  if (dir_opt->count()) config["output_dir"] = output_dir;
  return execute(config, out, err);
}

}  // namespace pinchflow::cli
