#pragma once

#include <cmath>
#include <string>

#include "flatgen/types.hpp"

namespace flatgen {

// Physical description of the vehicle: rigid body, two motors with
// counter-rotating props on the wing leading edge, two trailing-edge flaps,
// and the global aerodynamic coefficients. Field names match the keys of
// the parameter file one-to-one (the inertia tensor is assembled from its
// six upper-triangular entries Jxx..Jzz).
struct VehicleParams {
  double m = 0;          // vehicle mass [kg]
  double g = 0;          // gravitational acceleration [m/s^2]
  Mat3 inertia = Mat3::Zero();  // body inertia tensor [kg m^2]
  double alpha_0 = 0;    // zero-lift line offset below the body x-axis [rad]
  double alpha_t = 0;    // thrust line tilt above the body x-axis [rad]
  double c_t = 0;        // prop thrust per squared speed [N s^2]
  double c_mu = 0;       // prop torque per squared speed [N m s^2]
  double c_dt = 0;       // prop-wash drag fraction of thrust [-]
  double c_lt = 0;       // prop-wash lift recovery fraction [-]
  double c_dv = 0;       // airspeed drag coefficient [N s^2/m^2]
  double c_lv = 0;       // airspeed lift coefficient [N s^2/m^2]
  double c_flap_t = 0;   // flap effectiveness on prop-wash lift [1/rad]
  double c_flap_v = 0;   // flap effectiveness on airspeed lift [N s^2/m^2/rad]
  double c_mu_t = 0;     // pitch moment arm of total thrust [m]
  double l_ty = 0;       // motor lateral arm [m]
  double l_dx = 0;       // flap longitudinal arm [m]
  double l_dy = 0;       // flap lateral arm [m]
  double omega_min = 0;  // prop speed floor [rad/s]
  double omega_max = 0;  // prop speed ceiling [rad/s]
  double delta_max = 0;  // flap deflection limit [rad]

  // Combined tilt of the thrust line above the zero-lift x-axis.
  double alpha_bar() const { return alpha_0 + alpha_t; }
  // Zero-lift-frame force per unit thrust: x (forward) and z (downward)
  // components, and their ratio used throughout the pitch solve.
  double thrust_forward() const { return std::cos(alpha_bar()) * (1.0 - c_dt); }
  double thrust_lift() const { return std::sin(alpha_bar()) * (c_lt - 1.0); }
  double eta() const { return thrust_lift() / thrust_forward(); }

  void validate() const;  // throws std::invalid_argument on nonsense
};

// Parses the flat `key = value` parameter file (SI units, '#' comments).
// Unknown or missing keys are errors.
VehicleParams load_params(const std::string& path);
VehicleParams params_from_string(const std::string& text);

struct ControlInput {
  double omega1 = 0, omega2 = 0;  // prop speeds, >= 0 [rad/s]
  double delta1 = 0, delta2 = 0;  // flap deflections, + = lift increase [rad]
};

struct VehicleState {
  Vec3 x = Vec3::Zero();        // position, world frame (z down)
  Vec3 v = Vec3::Zero();        // velocity, world frame
  Quat q = Quat::Identity();    // body-to-world attitude
  Vec3 omega = Vec3::Zero();    // angular rates, body frame
};

// Selects which force/moment contributions enter the model. The reduced
// setting drops the two terms the flat transform leaves unassigned: the
// direct flap force and the flap yaw moment.
struct ModelTerms {
  bool flap_force = true;
  bool flap_yaw_moment = true;
  static ModelTerms full() { return {}; }
  static ModelTerms flatness_consistent() { return {false, false}; }
};

struct MotorOutput {
  double t1 = 0, t2 = 0;    // thrusts [N]
  double mu1 = 0, mu2 = 0;  // reaction torques about the thrust axis [N m]
};

// Prop thrust/torque from speeds; negative speeds are rejected.
MotorOutput motor_output(double omega1, double omega2, const VehicleParams& p);

// Flap effectiveness nu_i: z-force in the zero-lift frame per unit
// deflection. Negative in normal flight (positive deflection lifts).
double flap_effectiveness(double thrust, double v_alpha_x, double speed,
                          const VehicleParams& p);

// Force contributions, all expressed in the zero-lift frame. v_alpha is the
// velocity in that frame and speed its norm (callers may substitute a
// smoothed norm). Thrusts are taken as given so that the linear extension
// for negative demanded thrust is the caller's choice.
Vec3 thrust_force_zl(double thrust, const VehicleParams& p);
Vec3 wing_force_zl(const Vec3& v_alpha, double speed, const VehicleParams& p);
Vec3 flap_force_zl(double nu1, double nu2, double delta1, double delta2);
Vec3 force_zero_lift(const Vec3& v_alpha, double speed, double t1, double t2,
                     double delta1, double delta2, const VehicleParams& p,
                     const ModelTerms& terms = {});

// Moment contributions about the CG, body frame.
Vec3 thrust_moment_body(double t1, double t2, const VehicleParams& p);
Vec3 motor_torque_moment_body(double mu_sum, const VehicleParams& p);
Vec3 flap_moment_body(double nu1, double nu2, double delta1, double delta2,
                      const VehicleParams& p, const ModelTerms& terms = {});
Vec3 moment_body(const Vec3& v_alpha, double speed, double t1, double t2,
                 double mu_sum, double delta1, double delta2,
                 const VehicleParams& p, const ModelTerms& terms = {});

// Fixed zero-lift-to-body rotation (-alpha_0 about body y).
Mat3 rot_body_from_zl(const VehicleParams& p);

struct StateDerivative {
  Vec3 xdot = Vec3::Zero();
  Vec3 vdot = Vec3::Zero();
  Vec4 qdot = Vec4::Zero();  // (w, x, y, z) order
  Vec3 omegadot = Vec3::Zero();
};

// Rigid-body equations of motion under the phi-theory wrench. The attitude
// quaternion must be unit to 1e-6.
StateDerivative state_derivative(const VehicleState& s, const ControlInput& u,
                                 const VehicleParams& p,
                                 const ModelTerms& terms = {});

}  // namespace flatgen
