#pragma once

#include <optional>
#include <vector>

#include "flatgen/flatness.hpp"
#include "flatgen/types.hpp"

namespace flatgen {

// One waypoint of the flat output. Position and yaw are always pinned;
// higher derivatives only when set. A direction constraint fixes the
// velocity's orientation but leaves its magnitude to the optimizer.
struct Waypoint {
  Vec3 position = Vec3::Zero();
  double yaw = 0;
  std::optional<Vec3> velocity;
  std::optional<Vec3> acceleration;
  std::optional<Vec3> jerk;
  std::optional<Vec3> snap;
  std::optional<Vec3> velocity_direction;  // unit vector, exclusive with velocity
  std::optional<double> yaw_rate;
  std::optional<double> yaw_acc;

  // Static hover: velocity through jerk and both yaw rates pinned to zero
  // (boundary snap is left to the optimizer).
  static Waypoint rest(const Vec3& pos, double yaw);
};

// Piecewise degree-9 polynomial over all four flat channels. Coefficients
// are stored in normalized segment time u = (t - t_start)/duration, one row
// per channel (x, y, z, yaw), so scaling a segment's duration rescales its
// time derivatives without touching the coefficients.
struct Trajectory {
  struct Segment {
    double duration = 0;
    Eigen::Matrix<double, 4, 10> coeffs = Eigen::Matrix<double, 4, 10>::Zero();
  };
  std::vector<Segment> segments;

  double total_time() const;
  // Segment index and local time for a global time in [0, total].
  int locate(double t, double* u) const;
};

// Evaluates position/yaw and derivatives through snap at global time t.
FlatSample sample_flat(const Trajectory& traj, double t);
// One-sided evaluation inside a chosen segment (u in [0,1]); lets tests take
// left/right limits at junctions.
FlatSample sample_in_segment(const Trajectory& traj, int segment, double u);

struct SolveResult {
  Trajectory trajectory;
  double cost = 0;  // integral of squared snap plus weighted squared yaw accel
};

// Closed-form minimum-snap solve: endpoint derivatives (through snap) are
// the decision variables, fixed entries come from the waypoints, free ones
// from the normal equations. Shared endpoint derivatives make junctions C4
// in position and C2 in yaw by construction.
SolveResult solve_min_snap(const std::vector<Waypoint>& wps,
                           const std::vector<double>& times,
                           double mu_psi = 1.0);

// Cost of an existing trajectory under the same objective.
double min_snap_cost(const Trajectory& traj, double mu_psi = 1.0);

// Chord-proportional time allocation at a nominal speed, with a floor for
// zero-length segments.
std::vector<double> initial_time_estimate(const std::vector<Waypoint>& wps,
                                          double v_nominal = 4.0,
                                          double zero_chord_time = 0.5);

struct TimeOptOptions {
  int max_iters = 200;
  double rel_step = 0.1;      // initial step, relative to mean duration
  double shrink = 0.5;        // backtracking factor
  int max_backtracks = 25;
  double fd_rel = 1e-6;       // finite-difference step, relative to total
  double min_duration = 1e-3; // hard floor on any segment duration [s]
  double tol = 1e-10;         // relative cost improvement to keep going
};

struct TimeOptResult {
  std::vector<double> times;
  double cost = 0;
  int iterations = 0;
  bool converged = false;
};

// Redistributes segment durations at fixed total using projected gradient
// descent with backtracking on the min-snap cost.
TimeOptResult optimize_segment_times(const std::vector<Waypoint>& wps,
                                     const std::vector<double>& initial,
                                     double mu_psi = 1.0,
                                     const TimeOptOptions& opt = {});

// Uniform time dilation: same geometric path, k-th derivatives scaled by
// c^-k. Exact by construction in the normalized-time representation.
Trajectory scale_time(const Trajectory& traj, double c);

}  // namespace flatgen
