#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flatgen/maneuvers.hpp"
#include "flatgen/minsnap.hpp"
#include "flatgen/vehicle.hpp"

namespace flatgen {

struct LimitViolation {
  double time = 0;
  std::string limit;  // omega_min | omega_max | delta_max | transform
  double value = 0;
  double bound = 0;
};

// Result of sampling a trajectory through the flat transform and testing
// every sample against the actuator envelope. Also aggregates the reference
// maxima used to characterize a maneuver (peak speed, load factor, body
// rate).
struct FeasibilityReport {
  bool feasible = false;
  double dt = 0;
  int samples = 0;
  double total_time = 0;
  double omega_peak = 0;      // largest prop speed demanded
  double omega_trough = 0;    // smallest prop speed demanded
  double flap_peak_abs = 0;   // largest |deflection| demanded
  double margin_omega_high = 0;  // omega_max - omega_peak
  double margin_omega_low = 0;   // omega_trough - omega_min
  double margin_flap = 0;        // delta_max - flap_peak_abs
  bool negative_thrust = false;
  bool near_limit = false;    // within 5% of a bound: advise finer sampling
  std::string abort_reason;   // transform failure note, empty when clean
  std::optional<LimitViolation> first_violation;
  double max_speed = 0;       // [m/s]
  double max_load_g = 0;      // ||a - g iz|| / g
  double max_rate_dps = 0;    // [deg/s]
};

FeasibilityReport check_trajectory(const Trajectory& traj,
                                   const VehicleParams& p, double dt = 5e-3);

// Time-scale search. The scan walks a geometric grid of scale factors
// applied to the base segment times, re-solving the waypoint problem at
// each scale (boundary derivative constraints keep their physical values),
// and bisects the boundary below the smallest feasible point.
struct ScalePoint {
  double c = 0;
  bool feasible = false;
};

struct ScaleScan {
  bool found = false;
  double c_star = 0;             // smallest feasible scale
  bool at_lower_bound = false;   // feasible at the scan floor: no boundary
  std::vector<ScalePoint> profile;
  std::vector<std::pair<double, double>> feasible_runs;  // maximal [lo, hi]
};

struct ScanOptions {
  double c_lo = 0.05;
  double c_hi = 20.0;
  double factor = 1.05;
  double bisect_rel_tol = 1e-4;
  double dt = 5e-3;
  bool full_profile = true;  // false: stop scanning at the first feasible c
};

ScaleScan scan_scale(const std::vector<Waypoint>& wps,
                     const std::vector<double>& base_times, double mu_psi,
                     const VehicleParams& p, const ScanOptions& opt = {});
ScaleScan min_feasible_scale(const ManeuverRecipe& recipe,
                             const VehicleParams& p,
                             const ScanOptions& opt = {});

// Full generation pipeline: time estimate, segment-time optimization, scale
// search (or the recipe's fixed total time), final solve and check.
struct GenerateOptions {
  double v_nominal = 4.0;
  double dt = 5e-3;
  ScanOptions scan;
  TimeOptOptions time_opt;
};

struct GeneratedManeuver {
  Trajectory trajectory;
  std::vector<double> base_times;  // optimized allocation before scaling
  double scale = 1.0;
  ScaleScan scan;                  // empty profile when total_time was fixed
  FeasibilityReport report;
};

GeneratedManeuver generate_maneuver(const ManeuverRecipe& recipe,
                                    const VehicleParams& p,
                                    const GenerateOptions& opt = {});

// Analytic constant-speed circles in the horizontal plane (radius r, speed
// v), distinguished by how yaw moves: turned with the velocity, held at
// right angles to it, or swept against the turn direction for a full roll.
enum class CircleMode { coordinated, knife_edge, rolling };

CircleMode circle_mode_from_string(const std::string& s);
std::string to_string(CircleMode m);

// Exact flat sample of the circle at time t (no polynomials involved).
FlatSample circle_sample(double r, double v, CircleMode mode, double t);

// One full revolution sampled at dt (or a short hover check when v ~ 0).
FeasibilityReport circle_check(double r, double v, CircleMode mode,
                               const VehicleParams& p, double dt = 5e-3);

struct SpeedScanOptions {
  double v_lo = 0.25;
  double v_hi = 60.0;
  double factor = 1.05;
  double bisect_rel_tol = 1e-4;
  double dt = 5e-3;
};

// Largest feasible circle speed (bisected against the first infeasible
// grid point above it). Returns v_hi when the whole scan is feasible.
double circle_max_speed(double r, CircleMode mode, const VehicleParams& p,
                        const SpeedScanOptions& opt = {});

// Closed-form ceiling for knife-edge circles: both props at the limit
// carrying the centripetal load alone.
double knife_edge_speed_bound(double r, const VehicleParams& p);

// Hover-to-hover minimum-time heatmap over start/end yaw. Cell [i][j] is
// the minimum feasible duration for the 6 m reposition from psi_start[i] to
// psi_end[j]. Cells are computed in parallel (FLATGEN_THREADS, default all
// cores); results are deterministic regardless of thread count.
struct Heatmap {
  std::vector<double> psi_start;
  std::vector<double> psi_end;
  Eigen::MatrixXd min_time;
};

Heatmap hover_to_hover_heatmap(const VehicleParams& p, int n = 9,
                               double dist = 6.0,
                               const ScanOptions& scan = {});

int thread_count_from_env();

}  // namespace flatgen
