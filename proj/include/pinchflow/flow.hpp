#pragma once

// Mean curvature flow of grid surfaces in the unit sphere, monitors, and
// the radius ODE of shrinking geodesic spheres.

#include <array>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pinchflow/grid.hpp"
#include "pinchflow/pinching.hpp"

namespace pinchflow {

enum class Scheme { Euler, RK2 };
std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view name);

struct FlowState {
  double t = 0.0;
  long step_index = 0;
  GridSurface surface;
  double dt_last = 0.0;
};

struct VelocityField {
  Eigen::MatrixXd velocity;  // one column per sample; zero on pole rows
  double a2_max = 0.0;
  std::array<int, 2> a2_at{};
  bool finite = true;
};

/// Mean curvature vector in the sphere, P_N(g^ij F_ij), at every non-pole
/// sample, together with the largest |A|^2.
VelocityField mcf_velocity(const GridSurface& surface, int threads = 0);

/// Removes longitude modes |m| > max(1, nv/2 sin(theta)) from each sphere
/// row so the converging meridians do not set the time step.
void polar_filter(const GridSurface& surface, Eigen::MatrixXd& field);

/// Refreshes both pole rows of a sphere grid from their neighbouring rows.
void refresh_poles(GridSurface& surface);

/// 1 / (1/du^2 + 1/dv^2).
double spacing2(const GridSurface& surface);

struct StepOptions {
  Scheme scheme = Scheme::Euler;
  double cfl = 0.2;
  double ceiling = 1e6;
  bool filter = true;
  double max_dt = std::numeric_limits<double>::infinity();
  int threads = 0;
};

struct StepInfo {
  double a2_max = 0.0;  // at the start of the step
  std::array<int, 2> a2_at{};
  double max_displacement = 0.0;
};

/// One explicit step with dt = min(max_dt, cfl spacing2 / max(1, a2_max)).  Throws
/// BlowupDetected (state untouched) when a2_max exceeds the ceiling or the
/// velocity is not finite.
FlowState step(const FlowState& state, const StepOptions& options, StepInfo* info = nullptr);

/// arccos(cos(rho0) e^{n t}); Extinct once the argument leaves (-1, 1).
double sphere_ode_oracle(double rho0, int n, double t);
/// -ln|cos rho0| / n; +inf for the equator.
double sphere_extinction_time(double rho0, int n);

struct HarnackOptions {
  double csharp = 1.0;
  double delta0 = 0.1;
  double gamma = 2.0;
  double h_sharp = 0.0;
};

struct MonitorOptions {
  std::optional<ConeParams> cone;
  double sigma = 0.1;
  double ratio_threshold = 1e-3;
  HarnackOptions harnack;
  std::optional<AmbientVector> center;  // enables mean_radius
  bool gradients = true;
  int threads = 0;
};

struct MonitorRecord {
  double t = 0.0;
  long step = 0;
  double area = 0.0;
  double h_min = 0.0;
  double h_max = 0.0;
  double a2_max = 0.0;
  double q_min = std::numeric_limits<double>::quiet_NaN();
  double q_max = std::numeric_limits<double>::quiet_NaN();
  double ratio_max = std::numeric_limits<double>::quiet_NaN();
  double grad_ratio = std::numeric_limits<double>::quiet_NaN();
  double kperp_min = std::numeric_limits<double>::quiet_NaN();
  double kperp_max = std::numeric_limits<double>::quiet_NaN();
  long harnack_violations = 0;
  std::optional<double> mean_radius;
  std::array<int, 2> h_min_at{};
  std::array<int, 2> h_max_at{};
  std::array<int, 2> a2_max_at{};
  std::array<int, 2> q_max_at{};
  std::array<int, 2> ratio_max_at{};
};

MonitorRecord monitor(const FlowState& state, const MonitorOptions& options);

enum class Outcome { Shrinking, ApproachTotallyGeodesic, Inconclusive, NumericalBlowup };
std::string_view to_string(Outcome o);

struct RunOptions {
  StepOptions step;
  MonitorOptions monitor;
  double t_max = 1.0;
  int stride = 10;
  double flat_threshold = 1e-4;
  int sustain = 50;  // monitor records
  double shrink_area_fraction = 0.05;
  double ratio_tolerance = 0.05;
  long max_steps = 50'000'000;
};

struct PinchingViolation {
  double t = 0.0;
  int i = 0;
  int j = 0;
  double q = 0.0;
};

struct RunResult {
  std::vector<MonitorRecord> records;
  Outcome outcome = Outcome::Inconclusive;
  std::string reason;
  std::optional<double> extinction_time;  // area(t) extrapolated to zero
  std::vector<PinchingViolation> pinching_violations;
  FlowState final_state;
  double max_displacement_rate = 0.0;  // largest per-step displacement / dt
};

/// Evolves until an outcome is resolved.  on_record sees every monitor record.
RunResult run(const GridSurface& initial, const RunOptions& options,
              const std::function<void(const FlowState&, const MonitorRecord&)>& on_record = {});

inline constexpr std::string_view kMonitorHeader =
    "t,area,h_min,h_max,a2_max,q_min,q_max,ratio_max,grad_ratio,kperp_min,kperp_max,"
    "harnack_violations";
inline constexpr std::string_view kSnapshotVersion = "pinchflow-snapshot 1";

void write_monitor_row(std::ostream& out, const MonitorRecord& r);
void write_monitor_csv(std::ostream& out, const std::vector<MonitorRecord>& records);

/// Header line, then one "i,j,x0,...,xm" line per sample at full precision.
/// read_snapshot skips lines starting with '#'.
void write_snapshot(std::ostream& out, const FlowState& state);
FlowState read_snapshot(std::istream& in);

}  // namespace pinchflow
