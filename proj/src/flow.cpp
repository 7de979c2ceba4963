#include "pinchflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <queue>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "pinchflow/field.hpp"
#include "pinchflow/parallel.hpp"

namespace pinchflow {

namespace {

constexpr double kFirst[5] = {1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0};
constexpr double kSecond[5] = {-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0};

double dot(const double* x, const double* y, int m) {
  double s = 0.0;
  for (int c = 0; c < m; ++c) s += x[c] * y[c];
  return s;
}

// Velocity and |A|^2 at one sample without building normal frames.
double local_velocity(const GridSurface& s, int i, int j, double* out) {
  const int m = s.ambient_dim(), nv = s.nv();
  const double* data = s.data().data();
  // Stencil rows after wrapping or reflecting through a pole, and the
  // column shift a reflection implies.
  int row[5], shift[5];
  for (int a = -2; a <= 2; ++a) {
    const auto [ri, rj] = s.resolve(i + a, j);
    row[a + 2] = ri;
    shift[a + 2] = rj - j;
  }
  auto at = [&](int a, int b) {
    int col = j + b + shift[a + 2];
    if (col < 0) col += nv;
    if (col >= nv) col -= nv;
    return data + static_cast<std::ptrdiff_t>(row[a + 2] * nv + col) * m;
  };
  double f[kMaxAmbient], fu[kMaxAmbient] = {}, fv[kMaxAmbient] = {};
  double d2[3][kMaxAmbient] = {};  // uu, uv, vv
  const double* p = at(0, 0);
  for (int c = 0; c < m; ++c) f[c] = p[c];
  for (int o = -2; o <= 2; ++o) {
    const double* pu = at(o, 0);
    const double* pv = at(0, o);
    for (int c = 0; c < m; ++c) {
      fu[c] += kFirst[o + 2] * pu[c];
      d2[0][c] += kSecond[o + 2] * pu[c];
      fv[c] += kFirst[o + 2] * pv[c];
      d2[2][c] += kSecond[o + 2] * pv[c];
    }
  }
  for (int a = -2; a <= 2; ++a) {
    if (a == 0) continue;
    for (int b = -2; b <= 2; ++b) {
      if (b == 0) continue;
      const double w = kFirst[a + 2] * kFirst[b + 2];
      const double* q = at(a, b);
      for (int c = 0; c < m; ++c) d2[1][c] += w * q[c];
    }
  }
  const double du = s.du(), dv = s.dv();
  const double f2 = dot(f, f, m);
  for (int c = 0; c < m; ++c) {
    fu[c] /= du;
    fv[c] /= dv;
    d2[0][c] /= du * du;
    d2[1][c] /= du * dv;
    d2[2][c] /= dv * dv;
  }
  // Tangent vectors orthogonal to the position.
  const double pu = dot(f, fu, m) / f2, pv = dot(f, fv, m) / f2;
  for (int c = 0; c < m; ++c) {
    fu[c] -= pu * f[c];
    fv[c] -= pv * f[c];
  }
  const double g11 = dot(fu, fu, m), g12 = dot(fu, fv, m), g22 = dot(fv, fv, m);
  const double det = g11 * g22 - g12 * g12;
  if (!(det > kGramDetMin * g11 * g22)) {
    throw Error(ErrorCode::DegenerateJet, "degenerate metric at (" + std::to_string(i) + ", " +
                                              std::to_string(j) + ")");
  }
  const double gi[2][2] = {{g22 / det, -g12 / det}, {-g12 / det, g11 / det}};
  double nrm[3][kMaxAmbient];
  for (int k = 0; k < 3; ++k) {
    const double* w = d2[k];
    const double wf = dot(w, f, m) / f2, wu = dot(w, fu, m), wv = dot(w, fv, m);
    const double tu = gi[0][0] * wu + gi[0][1] * wv;
    const double tv = gi[1][0] * wu + gi[1][1] * wv;
    for (int c = 0; c < m; ++c) nrm[k][c] = w[c] - wf * f[c] - tu * fu[c] - tv * fv[c];
  }
  for (int c = 0; c < m; ++c) {
    out[c] = gi[0][0] * nrm[0][c] + 2.0 * gi[0][1] * nrm[1][c] + gi[1][1] * nrm[2][c];
  }
  // |A|^2 = g^ik g^jl <N_ij, N_kl>
  const int slot[2][2] = {{0, 1}, {1, 2}};
  double gram[3][3];
  for (int x = 0; x < 3; ++x) {
    for (int y = x; y < 3; ++y) gram[x][y] = gram[y][x] = dot(nrm[x], nrm[y], m);
  }
  double a2 = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) a2 += gi[a][c] * gi[b][d] * gram[slot[a][b]][slot[c][d]];
  return a2;
}

std::array<int, 2> coords(const GridSurface& s, std::size_t idx) {
  return {static_cast<int>(idx) / s.nv(), static_cast<int>(idx) % s.nv()};
}

void advance(GridSurface& s, const GridSurface& base, const Eigen::MatrixXd& v, double dt) {
  s.data() = base.data() + dt * v;
  s.renormalize();
  refresh_poles(s);
}

}  // namespace

std::string_view to_string(Scheme s) { return s == Scheme::Euler ? "euler" : "rk2"; }

Scheme scheme_from_string(std::string_view name) {
  if (name == "euler") return Scheme::Euler;
  if (name == "rk2") return Scheme::RK2;
  throw Error(ErrorCode::ConfigError, "unknown scheme " + std::string(name));
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Shrinking: return "Shrinking";
    case Outcome::ApproachTotallyGeodesic: return "ApproachTotallyGeodesic";
    case Outcome::Inconclusive: return "Inconclusive";
    case Outcome::NumericalBlowup: return "NumericalBlowup";
  }
  return "?";
}

VelocityField mcf_velocity(const GridSurface& s, int threads) {
  VelocityField out;
  out.velocity.setZero(s.ambient_dim(), s.size());
  const int workers = worker_count(threads);
  std::vector<double> best(workers, -1.0);
  std::vector<std::size_t> where(workers, 0);
  std::vector<char> bad(workers, 0);
  parallel_for(s.size(), workers, [&](std::size_t begin, std::size_t end, int w) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const auto [i, j] = coords(s, idx);
      if (s.is_pole_row(i)) continue;
      const double a2 = local_velocity(s, i, j, out.velocity.col(idx).data());
      if (std::isnan(a2)) {
        if (!bad[w]) bad[w] = 1, where[w] = idx;
      } else if (!bad[w] && a2 > best[w]) {
        best[w] = a2;
        where[w] = idx;
      }
    }
  });
  out.a2_max = -1.0;
  for (int w = 0; w < workers; ++w) {
    if (bad[w]) {
      out.finite = false;
      out.a2_max = std::numeric_limits<double>::quiet_NaN();
      out.a2_at = coords(s, where[w]);
      break;
    }
    if (best[w] > out.a2_max) {
      out.a2_max = best[w];
      out.a2_at = coords(s, where[w]);
    }
  }
  if (out.finite && !out.velocity.allFinite()) out.finite = false;
  return out;
}

void polar_filter(const GridSurface& s, Eigen::MatrixXd& field) {
  if (s.topology() != Topology::Sphere) return;
  const int nv = s.nv(), m = s.ambient_dim();
  thread_local Eigen::FFT<double> fft;
  thread_local std::vector<std::complex<double>> row, spec;
  row.resize(nv);
  for (int i = 1; i < s.nu() - 1; ++i) {
    const int keep = std::max(1, static_cast<int>(std::floor(0.5 * nv * std::sin(s.u(i)))));
    if (keep >= nv / 2) continue;
    // The mask is real and even in the wavenumber, so two real components
    // can share one complex transform.
    for (int c = 0; c < m; c += 2) {
      const bool pair = c + 1 < m;
      for (int j = 0; j < nv; ++j) {
        const int idx = s.index(i, j);
        row[j] = {field(c, idx), pair ? field(c + 1, idx) : 0.0};
      }
      fft.fwd(spec, row);
      for (int k = 0; k < nv; ++k) {
        if (std::min(k, nv - k) > keep) spec[k] = 0.0;
      }
      fft.inv(row, spec);
      for (int j = 0; j < nv; ++j) {
        const int idx = s.index(i, j);
        field(c, idx) = row[j].real();
        if (pair) field(c + 1, idx) = row[j].imag();
      }
    }
  }
}

void refresh_poles(GridSurface& s) {
  if (s.topology() != Topology::Sphere) return;
  const AmbientVector north = pole_estimate(s, true);
  const AmbientVector south = pole_estimate(s, false);
  for (int j = 0; j < s.nv(); ++j) {
    s.sample(0, j) = north;
    s.sample(s.nu() - 1, j) = south;
  }
}

double spacing2(const GridSurface& s) {
  return 1.0 / (1.0 / (s.du() * s.du()) + 1.0 / (s.dv() * s.dv()));
}

FlowState step(const FlowState& state, const StepOptions& o, StepInfo* info) {
  if (!(o.cfl > 0.0)) throw Error(ErrorCode::BadParams, "cfl must be positive");
  const GridSurface& s0 = state.surface;
  VelocityField v0 = mcf_velocity(s0, o.threads);
  if (!v0.finite) throw Error(ErrorCode::BlowupDetected, "non-finite velocity");
  if (v0.a2_max > o.ceiling) {
    throw Error(ErrorCode::BlowupDetected, "a2_max " + std::to_string(v0.a2_max) +
                                               " above ceiling " + std::to_string(o.ceiling));
  }
  if (o.filter) polar_filter(s0, v0.velocity);
  const double dt = std::min(o.max_dt, o.cfl * spacing2(s0) / std::max(1.0, v0.a2_max));

  FlowState next;
  next.t = state.t + dt;
  next.step_index = state.step_index + 1;
  next.dt_last = dt;
  next.surface = s0;
  advance(next.surface, s0, v0.velocity, dt);
  if (o.scheme == Scheme::RK2) {
    VelocityField v1 = mcf_velocity(next.surface, o.threads);
    if (!v1.finite) throw Error(ErrorCode::BlowupDetected, "non-finite velocity");
    if (o.filter) polar_filter(s0, v1.velocity);
    advance(next.surface, s0, 0.5 * (v0.velocity + v1.velocity), dt);
  }
  if (!next.surface.data().allFinite()) throw Error(ErrorCode::BlowupDetected, "non-finite samples");
  if (info) {
    info->a2_max = v0.a2_max;
    info->a2_at = v0.a2_at;
    info->max_displacement = (next.surface.data() - s0.data()).colwise().norm().maxCoeff();
  }
  return next;
}

double sphere_ode_oracle(double rho0, int n, double t) {
  if (!(rho0 > 0.0 && rho0 < std::numbers::pi) || n < 1) {
    throw Error(ErrorCode::BadParams, "rho0 must lie in (0, pi) and n >= 1");
  }
  const double arg = std::cos(rho0) * std::exp(n * t);
  if (!(arg > -1.0 && arg < 1.0)) throw Error(ErrorCode::Extinct, "sphere extinct before t");
  return std::acos(arg);
}

double sphere_extinction_time(double rho0, int n) {
  const double c = std::abs(std::cos(rho0));
  if (c == 0.0 || std::abs(rho0 - std::numbers::pi / 2.0) < 1e-15) {
    return std::numeric_limits<double>::infinity();
  }
  return -std::log(c) / n;
}

namespace {

// Grid distances from a source by Dijkstra over the 8-neighbourhood with
// great-circle edge lengths; stops beyond the radius.
std::vector<double> grid_distances(const GridSurface& s, int src, double radius) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(s.size(), inf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[src] = 0.0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    const auto [d, idx] = pq.top();
    pq.pop();
    if (d > dist[idx] || d > radius) continue;
    const int i = idx / s.nv(), j = idx % s.nv();
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        if (di == 0 && dj == 0) continue;
        int ni = i + di;
        if (s.topology() == Topology::Sphere && (ni < 0 || ni >= s.nu())) continue;
        const auto [ri, rj] = s.resolve(ni, j + dj);
        const int nidx = s.index(ri, rj);
        const double c = std::clamp(s.sample(i, j).dot(s.sample(ri, rj)), -1.0, 1.0);
        const double nd = d + std::acos(c);
        if (nd < dist[nidx]) {
          dist[nidx] = nd;
          pq.push({nd, nidx});
        }
      }
    }
  }
  return dist;
}

}  // namespace

MonitorRecord monitor(const FlowState& state, const MonitorOptions& o) {
  const GridSurface& s = state.surface;
  const GeometryField f = geometry_field(s, 1.0, o.threads);
  MonitorRecord r;
  r.t = state.t;
  r.step = state.step_index;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  bool first = true;
  double q_min = nan, q_max = nan;
  double radius_sum = 0.0;
  long count = 0;
  for (int i = 0; i < s.nu(); ++i) {
    for (int j = 0; j < s.nv(); ++j) {
      const auto& gp = f.at(i, j);
      if (!gp) continue;
      const PointGeometry& g = *gp;
      const double h = std::sqrt(g.norm_h2);
      r.area += std::sqrt(g.metric.determinant()) * s.du() * s.dv();
      if (first || h < r.h_min) r.h_min = h, r.h_min_at = {i, j};
      if (first || h > r.h_max) r.h_max = h, r.h_max_at = {i, j};
      if (first || g.norm_a2 > r.a2_max) r.a2_max = g.norm_a2, r.a2_max_at = {i, j};
      if (o.cone) {
        const double q = q_value(g, *o.cone);
        if (first || q < q_min) q_min = q;
        if (first || q > q_max) q_max = q, r.q_max_at = {i, j};
      }
      if (h > o.ratio_threshold) {
        const double ratio = g.norm_a2 / g.norm_h2;
        if (std::isnan(r.ratio_max) || ratio > r.ratio_max) r.ratio_max = ratio, r.ratio_max_at = {i, j};
      }
      if (g.kperp) {
        if (first || *g.kperp < r.kperp_min) r.kperp_min = *g.kperp;
        if (first || *g.kperp > r.kperp_max) r.kperp_max = *g.kperp;
      }
      if (o.center) radius_sum += std::acos(std::clamp(s.sample(i, j).dot(*o.center), -1.0, 1.0));
      ++count;
      first = false;
    }
  }
  r.q_min = q_min;
  r.q_max = q_max;
  if (o.center && count > 0) r.mean_radius = radius_sum / count;

  if (o.gradients) {
    // |nabla A|^2 / g^{2 - sigma} where g = |H|^2/(n-1) - |A|^2 + 2 kbar > 0.
    std::vector<double> ratio(s.size(), nan);
    parallel_for(s.size(), worker_count(o.threads), [&](std::size_t b, std::size_t e, int) {
      for (std::size_t idx = b; idx < e; ++idx) {
        const auto [i, j] = coords(s, idx);
        if (s.is_pole_row(i) || !gradient_available(s, i)) continue;
        const PointGeometry& g = *f.at(i, j);
        const double gq = g.norm_h2 / (g.dim - 1.0) - g.norm_a2 + 2.0;
        if (!(gq > 0.0)) continue;
        ratio[idx] = discrete_gradient(s, f, i, j).norm2() / std::pow(gq, 2.0 - o.sigma);
      }
    });
    for (double x : ratio) {
      if (!std::isnan(x) && (std::isnan(r.grad_ratio) || x > r.grad_ratio)) r.grad_ratio = x;
    }
  }

  const HarnackOptions& hk = o.harnack;
  if (count > 0 && hk.csharp > 0.0 && hk.gamma > 1.0 && r.h_max > 0.0 &&
      r.h_max >= hk.gamma * hk.h_sharp) {
    const double decay = hk.csharp * std::exp(-hk.delta0 * state.t / 2.0);
    const double radius = (hk.gamma - 1.0) / (decay * r.h_max);
    const std::vector<double> dist =
        grid_distances(s, s.index(r.h_max_at[0], r.h_max_at[1]), radius);
    for (int idx = 0; idx < s.size(); ++idx) {
      if (!(dist[idx] <= radius)) continue;
      const auto& gp = f.points[idx];
      if (!gp) continue;
      const double bound = harnack_bound(r.h_max, hk.csharp, state.t, hk.delta0, dist[idx]);
      if (std::sqrt(gp->norm_h2) < bound * (1.0 - 1e-12)) ++r.harnack_violations;
    }
  }
  return r;
}

RunResult run(const GridSurface& initial, const RunOptions& o,
              const std::function<void(const FlowState&, const MonitorRecord&)>& on_record) {
  if (o.stride < 1 || o.sustain < 1) throw Error(ErrorCode::BadParams, "stride and sustain must be positive");
  RunResult res;
  FlowState state;
  state.surface = initial;
  refresh_poles(state.surface);
  const int n = 2;
  const double area_floor_ratio = o.shrink_area_fraction;

  auto record = [&](const FlowState& st) {
    MonitorRecord r = monitor(st, o.monitor);
    if (o.monitor.cone && !res.records.empty() && res.records.front().q_max < 0.0 &&
        !(r.q_max < 0.0)) {
      res.pinching_violations.push_back({r.t, r.q_max_at[0], r.q_max_at[1], r.q_max});
    }
    res.records.push_back(r);
    if (on_record) on_record(st, r);
    return r;
  };

  auto classify_blowup = [&](const std::string& why) {
    if (res.records.empty() || res.records.back().step != state.step_index) {
      try {
        record(state);
      } catch (const Error&) {
        // Geometry of the last state is not computable; keep what we have.
      }
    }
    const MonitorRecord& last = res.records.back();
    const double area0 = res.records.front().area;
    const bool small = last.area < area_floor_ratio * area0;
    const bool round = std::abs(last.ratio_max - 1.0 / n) <= o.ratio_tolerance;
    if (small && round) {
      res.outcome = Outcome::Shrinking;
      res.reason = why + "; area fraction " + std::to_string(last.area / area0) +
                   ", ratio_max " + std::to_string(last.ratio_max);
      if (res.records.size() >= 2) {
        const MonitorRecord& a = res.records[res.records.size() - 2];
        if (a.area > last.area) {
          res.extinction_time = last.t + last.area * (last.t - a.t) / (a.area - last.area);
        }
      }
    } else {
      res.outcome = Outcome::NumericalBlowup;
      res.reason = why + (small ? "; ratio_max not near 1/n" : "; area not small");
    }
  };

  int flat_run = 0;
  try {
    record(state);
    while (true) {
      if (state.t >= o.t_max || state.step_index >= o.max_steps) {
        res.outcome = Outcome::Inconclusive;
        res.reason = state.t >= o.t_max ? "t_max reached" : "step budget exhausted";
        if (res.records.back().step != state.step_index) record(state);
        break;
      }
      StepInfo info;
      StepOptions so = o.step;
      so.max_dt = std::min(so.max_dt, o.t_max - state.t);
      try {
        state = step(state, so, &info);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BlowupDetected) throw;
        classify_blowup(e.what());
        break;
      }
      res.max_displacement_rate =
          std::max(res.max_displacement_rate, info.max_displacement / state.dt_last);
      if (state.step_index % o.stride == 0) {
        const MonitorRecord& r = record(state);
        flat_run = r.a2_max < o.flat_threshold ? flat_run + 1 : 0;
        if (flat_run >= o.sustain) {
          res.outcome = Outcome::ApproachTotallyGeodesic;
          res.reason = "a2_max below " + std::to_string(o.flat_threshold) + " for " +
                       std::to_string(o.sustain) + " records";
          break;
        }
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateJet) throw;
    res.outcome = Outcome::NumericalBlowup;
    res.reason = e.what();
  }
  res.final_state = state;
  return res;
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

void write_monitor_row(std::ostream& out, const MonitorRecord& r) {
  out << num(r.t) << ',' << num(r.area) << ',' << num(r.h_min) << ',' << num(r.h_max) << ','
      << num(r.a2_max) << ',' << num(r.q_min) << ',' << num(r.q_max) << ',' << num(r.ratio_max)
      << ',' << num(r.grad_ratio) << ',' << num(r.kperp_min) << ',' << num(r.kperp_max) << ','
      << r.harnack_violations << '\n';
}

void write_monitor_csv(std::ostream& out, const std::vector<MonitorRecord>& records) {
  out << kMonitorHeader << '\n';
  for (const auto& r : records) write_monitor_row(out, r);
}

void write_snapshot(std::ostream& out, const FlowState& st) {
  const GridSurface& s = st.surface;
  char buf[64];
  out << kSnapshotVersion << " topology=" << (s.topology() == Topology::Sphere ? "sphere" : "torus")
      << " nu=" << s.nu() << " nv=" << s.nv() << " ambient=" << s.ambient_dim();
  std::snprintf(buf, sizeof buf, " t=%.17g", st.t);
  out << buf << " step=" << st.step_index << '\n';
  for (int i = 0; i < s.nu(); ++i) {
    for (int j = 0; j < s.nv(); ++j) {
      out << i << ',' << j;
      for (int c = 0; c < s.ambient_dim(); ++c) {
        std::snprintf(buf, sizeof buf, ",%.17g", s.sample(i, j)(c));
        out << buf;
      }
      out << '\n';
    }
  }
}

FlowState read_snapshot(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(kSnapshotVersion, 0) != 0) {
    throw Error(ErrorCode::ConfigError, "not a snapshot of version '" +
                                            std::string(kSnapshotVersion) + "'");
  }
  std::istringstream hs(line.substr(kSnapshotVersion.size()));
  std::string topo;
  int nu = 0, nv = 0, m = 0;
  FlowState st;
  for (std::string tok; hs >> tok;) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "bad header token " + tok);
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "topology") topo = val;
    else if (key == "nu") nu = std::stoi(val);
    else if (key == "nv") nv = std::stoi(val);
    else if (key == "ambient") m = std::stoi(val);
    else if (key == "t") st.t = std::stod(val);
    else if (key == "step") st.step_index = std::stol(val);
    else throw Error(ErrorCode::ConfigError, "unknown header key " + key);
  }
  if (topo != "sphere" && topo != "torus") throw Error(ErrorCode::ConfigError, "bad topology");
  st.surface = GridSurface(topo == "sphere" ? Topology::Sphere : Topology::Torus, nu, nv, m);
  std::vector<char> seen(st.surface.size(), 0);
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != m + 2) throw Error(ErrorCode::ConfigError, "bad snapshot row");
    const int i = static_cast<int>(vals[0]), j = static_cast<int>(vals[1]);
    if (i < 0 || i >= nu || j < 0 || j >= nv) throw Error(ErrorCode::ConfigError, "index out of range");
    for (int c = 0; c < m; ++c) st.surface.sample(i, j)(c) = vals[c + 2];
    seen[st.surface.index(i, j)] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw Error(ErrorCode::ConfigError, "snapshot is missing samples");
  }
  return st;
}

}  // namespace pinchflow
