#pragma once

#include "flatgen/types.hpp"
#include "flatgen/vehicle.hpp"

namespace flatgen {

// One point of the flat output and its derivatives: position through snap,
// yaw through yaw acceleration.
struct FlatSample {
  double t = 0;
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  Vec3 j = Vec3::Zero();
  Vec3 s = Vec3::Zero();
  double psi = 0, psi_d = 0, psi_dd = 0;
};

// Roll and pitch come out of atan2 up to a multiple of pi. The branch state
// remembers the previously resolved angles so consecutive samples stay on
// the continuous sheet (and can unwrap through full turns). Fresh instances
// assume an upright hover.
struct BranchState {
  double phi = 0.0;
  double theta_bar = 1.5707963267948966;
};

// Picks the representative of `raw + k*pi` closest to `prev`.
inline double resolve_branch(double raw, double prev) {
  constexpr double pi = 3.141592653589793238462643383279502884;
  return raw + pi * std::round((prev - raw) / pi);
}

struct FlatnessOptions {
  double speed_eps = 1e-6;     // smoothing floor inside ||v||
  double force_eps = 1e-12;    // degenerate desired-force threshold
  double euler_cos_min = 1e-8; // |cos(roll)| below this is degenerate
  double flap_cond_max = 1e8;  // flap matrix condition number limit
};

// Every quantity the chain computes between flat sample and body moment;
// exposed for tests and diagnostics.
struct FlatnessIntermediates {
  Vec3 f_i, f_i_d, f_i_dd;      // desired force and derivatives, world frame
  double beta_x = 0, beta_z = 0, beta_x_d = 0, beta_z_d = 0, beta_x_dd = 0,
         beta_z_dd = 0;
  double phi = 0, phi_d = 0, phi_dd = 0;
  Vec3 f_phi, f_phi_d, f_phi_dd;  // force in the yaw/roll-aligned frame
  Vec3 v_phi, v_phi_d, v_phi_dd;  // velocity in the same frame
  double speed = 0, speed_d = 0, speed_dd = 0;  // smoothed airspeed chain
  double tau_x = 0, tau_z = 0, tau_x_d = 0, tau_z_d = 0;
  double sigma_x = 0, sigma_z = 0, sigma_x_d = 0, sigma_z_d = 0,
         sigma_x_dd = 0, sigma_z_dd = 0;
  double theta_bar = 0, theta_bar_d = 0, theta_bar_dd = 0;
  double thrust = 0;              // total demanded thrust T
  Vec3 omega, omega_dot;          // body rates and accelerations
  Vec3 moment;                    // body moment J*wd + w x J*w
  Vec3 v_alpha;                   // velocity in the zero-lift frame
};

// Output of the inverse map: full rigid-body state plus the inputs that
// realize the sampled flat output under the reduced (flatness-consistent)
// wrench.
struct FullStateInput {
  VehicleState state;
  Vec3 omega_dot = Vec3::Zero();
  Vec3 moment = Vec3::Zero();     // demanded body moment
  double phi = 0, theta = 0;      // resolved roll / pitch (theta_bar+alpha_0)
  double thrust = 0;              // total thrust T
  double thrust_diff = 0;         // differential thrust T1 - T2
  double t1 = 0, t2 = 0;          // per-motor demand, may be negative
  ControlInput input;             // omegas clamp negative demand to zero
  bool negative_thrust = false;
  double flap_z_residual = 0;     // yaw moment left unassigned to the flaps
};

// Stage entry points (each is a thin view over the full chain).
Vec3 desired_force_world(const FlatSample& q, const VehicleParams& p);
double roll_from_force(const Vec3& f_i, double psi, double prev_phi,
                       const FlatnessOptions& opt = {});
struct PitchThrust { double theta_bar = 0; double thrust = 0; };
PitchThrust pitch_thrust_from_force(const Vec3& f_phi, const Vec3& v_phi,
                                    double speed, const VehicleParams& p,
                                    double prev_theta_bar,
                                    const FlatnessOptions& opt = {});

// Full chain: flat sample -> intermediates (attitude, rates, accelerations,
// moment). Advances the branch state.
FlatnessIntermediates flat_intermediates(const FlatSample& q,
                                         const VehicleParams& p,
                                         BranchState& branch,
                                         const FlatnessOptions& opt = {});

// Input extraction given the demanded moment and total thrust.
struct InputSolution {
  double thrust_diff = 0;
  double t1 = 0, t2 = 0;
  double omega1 = 0, omega2 = 0;
  bool negative_thrust = false;
  double delta1 = 0, delta2 = 0;
  double flap_z_residual = 0;
};
InputSolution inputs_from_moment(const Vec3& moment, double thrust,
                                 const Vec3& v_alpha, double speed,
                                 const VehicleParams& p,
                                 const FlatnessOptions& opt = {});

// The complete inverse map.
FullStateInput flat_to_full(const FlatSample& q, const VehicleParams& p,
                            BranchState& branch,
                            const FlatnessOptions& opt = {});

}  // namespace flatgen
