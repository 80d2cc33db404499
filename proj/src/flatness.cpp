#include "flatgen/flatness.hpp"

#include <cmath>

#include "flatgen/rotations.hpp"

namespace flatgen {

namespace {
const Vec3 kEx(1, 0, 0), kEy(0, 1, 0), kEz(0, 0, 1);
}

Vec3 desired_force_world(const FlatSample& q, const VehicleParams& p) {
  return p.m * (q.a - p.g * kEz);
}

double roll_from_force(const Vec3& f_i, double psi, double prev_phi,
                       const FlatnessOptions& opt) {
  const double beta_x = -std::sin(psi) * f_i.x() + std::cos(psi) * f_i.y();
  const double beta_z = f_i.z();
  if (std::abs(beta_x) < opt.force_eps && std::abs(beta_z) < opt.force_eps)
    throw TransformError(TransformError::Kind::degenerate_force,
                         "desired force vanished in the roll plane");
  return resolve_branch(-std::atan2(beta_x, beta_z), prev_phi);
}

PitchThrust pitch_thrust_from_force(const Vec3& f_phi, const Vec3& v_phi,
                                    double speed, const VehicleParams& p,
                                    double prev_theta_bar,
                                    const FlatnessOptions& opt) {
  const double eta = p.eta();
  const double sigma_x = eta * (f_phi.x() + p.c_dv * speed * v_phi.x()) -
                         p.c_lv * speed * v_phi.z() - f_phi.z();
  const double sigma_z = eta * (f_phi.z() + p.c_dv * speed * v_phi.z()) +
                         p.c_lv * speed * v_phi.x() + f_phi.x();
  if (std::abs(sigma_x) < opt.force_eps && std::abs(sigma_z) < opt.force_eps)
    throw TransformError(TransformError::Kind::degenerate_force,
                         "pitch-defining force vanished");
  PitchThrust out;
  out.theta_bar = resolve_branch(std::atan2(sigma_x, sigma_z), prev_theta_bar);
  const double ct = std::cos(out.theta_bar), st = std::sin(out.theta_bar);
  out.thrust = (ct * f_phi.x() - st * f_phi.z() +
                p.c_dv * speed * (ct * v_phi.x() - st * v_phi.z())) /
               p.thrust_forward();
  return out;
}

FlatnessIntermediates flat_intermediates(const FlatSample& q,
                                         const VehicleParams& p,
                                         BranchState& branch,
                                         const FlatnessOptions& opt) {
  FlatnessIntermediates im;

  // Desired force in the world frame and its first two derivatives follow
  // directly from the translational dynamics.
  im.f_i = p.m * (q.a - p.g * kEz);
  im.f_i_d = p.m * q.j;
  im.f_i_dd = p.m * q.s;

  // Roll aligns the force with the vertical plane of the yawed frame: the
  // wing produces no lateral force, so the force's lateral component (seen
  // from the yawed frame) must be rotated away.
  const double sps = std::sin(q.psi), cps = std::cos(q.psi);
  im.beta_x = -sps * im.f_i.x() + cps * im.f_i.y();
  im.beta_z = im.f_i.z();
  if (std::abs(im.beta_x) < opt.force_eps && std::abs(im.beta_z) < opt.force_eps)
    throw TransformError(TransformError::Kind::degenerate_force,
                         "desired force vanished in the roll plane");
  im.phi = resolve_branch(-std::atan2(im.beta_x, im.beta_z), branch.phi);
  branch.phi = im.phi;
  if (std::abs(std::cos(im.phi)) < opt.euler_cos_min)
    throw TransformError(TransformError::Kind::euler_degenerate,
                         "body y-axis vertical: yaw/pitch split undefined");

  im.beta_x_d = -cps * q.psi_d * im.f_i.x() - sps * im.f_i_d.x() -
                sps * q.psi_d * im.f_i.y() + cps * im.f_i_d.y();
  im.beta_z_d = im.f_i_d.z();
  const double b2 = im.beta_x * im.beta_x + im.beta_z * im.beta_z;
  const double bnum = im.beta_x_d * im.beta_z - im.beta_x * im.beta_z_d;
  im.phi_d = -bnum / b2;

  im.beta_x_dd =
      (sps * q.psi_d * q.psi_d - cps * q.psi_dd) * im.f_i.x() -
      2.0 * cps * q.psi_d * im.f_i_d.x() - sps * im.f_i_dd.x() -
      (cps * q.psi_d * q.psi_d + sps * q.psi_dd) * im.f_i.y() -
      2.0 * sps * q.psi_d * im.f_i_d.y() + cps * im.f_i_dd.y();
  im.beta_z_dd = im.f_i_dd.z();
  const double bnum_d = im.beta_x_dd * im.beta_z - im.beta_x * im.beta_z_dd;
  im.phi_dd = (bnum * (2.0 * im.beta_x * im.beta_x_d +
                       2.0 * im.beta_z * im.beta_z_d) -
               bnum_d * b2) /
              (b2 * b2);

  // Rotate force and velocity into the yaw/roll-aligned frame, carrying the
  // derivatives of the rotation along.
  const Mat3 rx = rot_x(-im.phi), rz = rot_z(-q.psi);
  const Mat3 rx_d = rot_deriv(kEx, -im.phi_d, rx);
  const Mat3 rz_d = rot_deriv(kEz, -q.psi_d, rz);
  const Mat3 rx_dd = rot_deriv2(kEx, -im.phi_d, -im.phi_dd, rx);
  const Mat3 rz_dd = rot_deriv2(kEz, -q.psi_d, -q.psi_dd, rz);
  const Mat3 r = rx * rz;
  const Mat3 r_d = rx_d * rz + rx * rz_d;
  const Mat3 r_dd = rx_dd * rz + 2.0 * rx_d * rz_d + rx * rz_dd;

  im.f_phi = r * im.f_i;
  im.f_phi_d = r_d * im.f_i + r * im.f_i_d;
  im.f_phi_dd = r_dd * im.f_i + 2.0 * r_d * im.f_i_d + r * im.f_i_dd;
  im.v_phi = r * q.v;
  im.v_phi_d = r_d * q.v + r * q.a;
  im.v_phi_dd = r_dd * q.v + 2.0 * r_d * q.a + r * q.j;

  // Smoothed airspeed keeps the chain differentiable through hover.
  const double eps2 = opt.speed_eps * opt.speed_eps;
  im.speed = std::sqrt(q.v.squaredNorm() + eps2);
  im.speed_d = q.v.dot(q.a) / im.speed;
  im.speed_dd = (q.a.squaredNorm() + q.v.dot(q.j)) / im.speed -
                q.v.dot(q.a) * im.speed_d / (im.speed * im.speed);

  // Pitch balances the in-plane force against thrust plus the airspeed
  // lift/drag pair; thrust follows from the same balance.
  const double eta = p.eta();
  im.sigma_x = eta * (im.f_phi.x() + p.c_dv * im.speed * im.v_phi.x()) -
               p.c_lv * im.speed * im.v_phi.z() - im.f_phi.z();
  im.sigma_z = eta * (im.f_phi.z() + p.c_dv * im.speed * im.v_phi.z()) +
               p.c_lv * im.speed * im.v_phi.x() + im.f_phi.x();
  if (std::abs(im.sigma_x) < opt.force_eps &&
      std::abs(im.sigma_z) < opt.force_eps)
    throw TransformError(TransformError::Kind::degenerate_force,
                         "pitch-defining force vanished");
  im.theta_bar =
      resolve_branch(std::atan2(im.sigma_x, im.sigma_z), branch.theta_bar);
  branch.theta_bar = im.theta_bar;
  {
    const double ct = std::cos(im.theta_bar), st = std::sin(im.theta_bar);
    im.thrust = (ct * im.f_phi.x() - st * im.f_phi.z() +
                 p.c_dv * im.speed * (ct * im.v_phi.x() - st * im.v_phi.z())) /
                p.thrust_forward();
  }

  im.tau_x = im.speed_d * im.v_phi.x() + im.speed * im.v_phi_d.x();
  im.tau_z = im.speed_d * im.v_phi.z() + im.speed * im.v_phi_d.z();
  im.sigma_x_d = eta * (im.f_phi_d.x() + p.c_dv * im.tau_x) -
                 p.c_lv * im.tau_z - im.f_phi_d.z();
  im.sigma_z_d = eta * (im.f_phi_d.z() + p.c_dv * im.tau_z) +
                 p.c_lv * im.tau_x + im.f_phi_d.x();
  const double s2 = im.sigma_x * im.sigma_x + im.sigma_z * im.sigma_z;
  const double snum = im.sigma_x_d * im.sigma_z - im.sigma_x * im.sigma_z_d;
  im.theta_bar_d = snum / s2;

  im.tau_x_d = im.speed_dd * im.v_phi.x() + 2.0 * im.speed_d * im.v_phi_d.x() +
               im.speed * im.v_phi_dd.x();
  im.tau_z_d = im.speed_dd * im.v_phi.z() + 2.0 * im.speed_d * im.v_phi_d.z() +
               im.speed * im.v_phi_dd.z();
  im.sigma_x_dd = eta * (im.f_phi_dd.x() + p.c_dv * im.tau_x_d) -
                  p.c_lv * im.tau_z_d - im.f_phi_dd.z();
  im.sigma_z_dd = eta * (im.f_phi_dd.z() + p.c_dv * im.tau_z_d) +
                  p.c_lv * im.tau_x_d + im.f_phi_dd.x();
  const double snum_d = im.sigma_x_dd * im.sigma_z - im.sigma_x * im.sigma_z_dd;
  im.theta_bar_dd =
      (snum_d * s2 -
       snum * (2.0 * im.sigma_x * im.sigma_x_d +
               2.0 * im.sigma_z * im.sigma_z_d)) /
      (s2 * s2);

  // Assemble body rates and accelerations from the Euler-angle rates.
  const double theta = im.theta_bar + p.alpha_0;
  const Mat3 r_th = rot_y(-theta);                 // pitch frame <- roll frame
  const Mat3 r_tp = r_th * rot_x(-im.phi);         // pitch frame <- yaw frame
  im.omega = Vec3(0, im.theta_bar_d, 0) + r_th * Vec3(im.phi_d, 0, 0) +
             r_tp * Vec3(0, 0, q.psi_d);
  const Mat3 r_th_d = rot_deriv(kEy, -im.theta_bar_d, r_th);
  const Mat3 r_tp_d =
      r_th_d * rot_x(-im.phi) + r_th * rot_deriv(kEx, -im.phi_d, rot_x(-im.phi));
  im.omega_dot = Vec3(0, im.theta_bar_dd, 0) + r_th_d * Vec3(im.phi_d, 0, 0) +
                 r_th * Vec3(im.phi_dd, 0, 0) + r_tp_d * Vec3(0, 0, q.psi_d) +
                 r_tp * Vec3(0, 0, q.psi_dd);

  im.moment = p.inertia * im.omega_dot + im.omega.cross(p.inertia * im.omega);

  // Velocity in the zero-lift frame feeds the input extraction.
  im.v_alpha = rot_y(-im.theta_bar) * im.v_phi;
  return im;
}

InputSolution inputs_from_moment(const Vec3& moment, double thrust,
                                 const Vec3& v_alpha, double speed,
                                 const VehicleParams& p,
                                 const FlatnessOptions& opt) {
  InputSolution out;
  // Yaw balance fixes the thrust split: differential thrust acts through
  // both the motor-torque z-component and the longitudinal force asymmetry.
  const double c0 = std::cos(p.alpha_0), s0 = std::sin(p.alpha_0);
  const double denom =
      -std::sin(p.alpha_t) * (p.c_mu / p.c_t) +
      p.l_ty * (c0 * p.thrust_forward() - s0 * p.thrust_lift());
  out.thrust_diff = moment.z() / denom;
  out.t1 = 0.5 * (thrust + out.thrust_diff);
  out.t2 = 0.5 * (thrust - out.thrust_diff);
  out.negative_thrust = (out.t1 < 0.0) || (out.t2 < 0.0);
  out.omega1 = std::sqrt(std::max(out.t1, 0.0) / p.c_t);
  out.omega2 = std::sqrt(std::max(out.t2, 0.0) / p.c_t);

  // Whatever moment the thrust split and motor torques do not produce is
  // assigned to the flaps (x and y components; the flap yaw moment stays
  // unassigned and is reported as a residual).
  const Vec3 m_t = thrust_moment_body(out.t1, out.t2, p);
  const Vec3 m_mu = motor_torque_moment_body((p.c_mu / p.c_t) * out.thrust_diff, p);
  const Vec3 m_d = moment - m_t - m_mu;

  const double nu1 = flap_effectiveness(out.t1, v_alpha.x(), speed, p);
  const double nu2 = flap_effectiveness(out.t2, v_alpha.x(), speed, p);
  Eigen::Matrix2d a;
  a << -p.l_dy * c0 * nu1, p.l_dy * c0 * nu2, p.l_dx * nu1, p.l_dx * nu2;
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smin = svd.singularValues()(1), smax = svd.singularValues()(0);
  if (!(smin > 0.0) || smax / smin > opt.flap_cond_max)
    throw TransformError(TransformError::Kind::singular_flap_matrix,
                         "flap effectiveness matrix is singular");
  const Eigen::Vector2d d = svd.solve(Eigen::Vector2d(m_d.x(), m_d.y()));
  out.delta1 = d(0);
  out.delta2 = d(1);
  // Yaw moment the flaps actually produce but the chain does not account for.
  out.flap_z_residual =
      p.l_dy * s0 * (nu2 * out.delta2 - nu1 * out.delta1);
  return out;
}

FullStateInput flat_to_full(const FlatSample& q, const VehicleParams& p,
                            BranchState& branch, const FlatnessOptions& opt) {
  const FlatnessIntermediates im = flat_intermediates(q, p, branch, opt);

  FullStateInput out;
  out.phi = im.phi;
  out.theta = im.theta_bar + p.alpha_0;
  out.state.x = q.x;
  out.state.v = q.v;
  out.state.q = Quat(rot_zxy(q.psi, im.phi, out.theta));
  out.state.omega = im.omega;
  out.omega_dot = im.omega_dot;
  out.moment = im.moment;
  out.thrust = im.thrust;

  const InputSolution sol =
      inputs_from_moment(im.moment, im.thrust, im.v_alpha, im.speed, p, opt);
  out.thrust_diff = sol.thrust_diff;
  out.t1 = sol.t1;
  out.t2 = sol.t2;
  out.negative_thrust = sol.negative_thrust;
  out.flap_z_residual = sol.flap_z_residual;
  out.input.omega1 = sol.omega1;
  out.input.omega2 = sol.omega2;
  out.input.delta1 = sol.delta1;
  out.input.delta2 = sol.delta2;
  return out;
}

}  // namespace flatgen
