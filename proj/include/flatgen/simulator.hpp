#pragma once

#include <vector>

#include "flatgen/flatness.hpp"
#include "flatgen/minsnap.hpp"
#include "flatgen/vehicle.hpp"

namespace flatgen {

enum class SimMode { flatness_consistent, full_model };

SimMode sim_mode_from_string(const std::string& s);
std::string to_string(SimMode m);

struct SimOptions {
  double step = 1e-4;              // RK4 macro step [s]
  SimMode mode = SimMode::flatness_consistent;
  double divergence_limit = 1e3;   // abort when ||x|| exceeds this [m]
};

struct SimSample {
  double t = 0;
  VehicleState state;      // integrated state
  ControlInput input;      // open-loop input applied at this time
  double res_trans = 0;    // instantaneous EOM residuals at the reference
  double res_rot = 0;      //   (relative; see tracking docs)
};

struct SimTrace {
  std::vector<SimSample> samples;
  bool aborted = false;
  double abort_time = 0;
  double max_quat_drift = 0;  // worst pre-renormalization |1 - ||q|||
};

// Reference signals precomputed on the integration grid (including half
// steps) with one branch state marching through the whole trajectory, so
// restarts deep into a maneuver stay on the correct attitude sheet.
class ReferenceTable {
 public:
  ReferenceTable(const Trajectory& traj, const VehicleParams& p, double step);

  int steps() const { return n_steps_; }
  double step_size() const { return step_; }
  double time_at(int k) const { return k * step_; }
  // Reference at grid index k (half = midpoint of step k).
  const FullStateInput& at(int k) const { return grid_.at(k); }
  const FullStateInput& at_half(int k) const { return half_.at(k); }
  const FlatSample& flat_at(int k) const { return flat_.at(k); }

 private:
  double step_;
  int n_steps_;
  std::vector<FullStateInput> grid_;
  std::vector<FullStateInput> half_;
  std::vector<FlatSample> flat_;
};

// Open-loop playback: the vehicle starts on the reference and is driven by
// the transform's inputs alone (no feedback). The consistent mode drops the
// model terms the transform cannot see; the full model keeps them.
SimTrace integrate_open_loop(const Trajectory& traj, const VehicleParams& p,
                             const SimOptions& opt = {});

// Round-trip verification in windows: the state is reset to the reference
// at the start of every window and integrated open-loop to its end; errors
// are measured against the reference inside the window. Open-loop flight is
// unstable, so short windows are the honest way to compare.
struct WindowStat {
  double t0 = 0, t1 = 0;
  double max_pos_err = 0;  // [m]
  double max_att_err = 0;  // geodesic angle [rad]
};

struct RoundTrip {
  std::vector<WindowStat> windows;
  double max_pos_err = 0;
  double max_att_err = 0;
  double max_quat_drift = 0;
};

RoundTrip windowed_round_trip(const Trajectory& traj, const VehicleParams& p,
                              double window = 0.5, const SimOptions& opt = {});

// Summary statistics of a playback against its reference trajectory.
struct TrackingMetrics {
  double duration = 0;
  double max_pos_err = 0;
  double rms_pos_err = 0;
  double max_speed = 0;     // reference peak speed [m/s]
  double max_load_g = 0;    // reference peak specific force [g]
  double max_rate_dps = 0;  // reference peak body rate [deg/s]
};

TrackingMetrics tracking_metrics(const SimTrace& trace, const Trajectory& traj,
                                 const VehicleParams& p);

}  // namespace flatgen
