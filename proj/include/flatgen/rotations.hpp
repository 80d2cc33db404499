#pragma once

#include <cmath>

#include "flatgen/types.hpp"

namespace flatgen {

inline Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

inline Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

inline Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

inline Vec3 vee(const Mat3& m) {
  return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

// Body-to-world rotation for the yaw-roll-pitch sequence: world z (yaw),
// then rotated x (roll), then rotated y (pitch).
inline Mat3 rot_zxy(double psi, double phi, double theta) {
  return rot_z(psi) * rot_x(phi) * rot_y(theta);
}

// First/second time derivatives of a single-axis rotation R(q(t)) about the
// fixed axis e: dR = qd [e]x R,  ddR = qdd [e]x R + qd^2 [e]x [e]x R.
inline Mat3 rot_deriv(const Vec3& axis, double qd, const Mat3& r) {
  return qd * skew(axis) * r;
}

inline Mat3 rot_deriv2(const Vec3& axis, double qd, double qdd, const Mat3& r) {
  const Mat3 ax = skew(axis);
  return qdd * ax * r + qd * qd * ax * ax * r;
}

// Quaternion kinematics xi_dot = 1/2 xi ∘ (0, Omega) with body rates Omega,
// on plain 4-vectors ordered (w, x, y, z) for use inside integrators.
inline Vec4 quat_derivative(const Vec4& q, const Vec3& w) {
  Vec4 qd;
  qd(0) = 0.5 * (-q(1) * w.x() - q(2) * w.y() - q(3) * w.z());
  qd(1) = 0.5 * (q(0) * w.x() + q(2) * w.z() - q(3) * w.y());
  qd(2) = 0.5 * (q(0) * w.y() - q(1) * w.z() + q(3) * w.x());
  qd(3) = 0.5 * (q(0) * w.z() + q(1) * w.y() - q(2) * w.x());
  return qd;
}

inline Vec4 quat_to_vec(const Quat& q) { return Vec4(q.w(), q.x(), q.y(), q.z()); }

inline Quat vec_to_quat(const Vec4& v) { return Quat(v(0), v(1), v(2), v(3)); }

// Geodesic angle between two rotations, in radians.
inline double rotation_angle(const Quat& a, const Quat& b) {
  const double d = std::min(1.0, std::abs(a.dot(b)));
  return 2.0 * std::acos(d);
}

}  // namespace flatgen
