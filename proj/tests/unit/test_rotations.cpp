#include <doctest.h>

#include <cmath>

#include "flatgen/flatness.hpp"
#include "flatgen/rotations.hpp"

using namespace flatgen;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

bool approx(const Mat3& a, const Mat3& b, double tol) {
  return (a - b).cwiseAbs().maxCoeff() < tol;
}
}  // namespace

TEST_CASE("single-axis rotations are proper and hit known vectors") {
  for (double a : {-2.1, -0.3, 0.0, 0.7, 2.9}) {
    for (const Mat3& r : {rot_x(a), rot_y(a), rot_z(a)}) {
      CHECK(approx(r * r.transpose(), Mat3::Identity(), 1e-14));
      CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  // Quarter turns, right-handed axes.
  CHECK((rot_z(kPi / 2) * Vec3::UnitX() - Vec3::UnitY()).norm() < 1e-15);
  CHECK((rot_x(kPi / 2) * Vec3::UnitY() - Vec3::UnitZ()).norm() < 1e-15);
  CHECK((rot_y(kPi / 2) * Vec3::UnitZ() - Vec3::UnitX()).norm() < 1e-15);
}

TEST_CASE("zxy composition matches the explicit product") {
  const double psi = 0.4, phi = -0.8, theta = 1.1;
  CHECK(approx(rot_zxy(psi, phi, theta),
               rot_z(psi) * rot_x(phi) * rot_y(theta), 1e-15));
  // Yaw-only: body x in the horizontal plane.
  const Vec3 bx = rot_zxy(0.3, 0, 0) * Vec3::UnitX();
  CHECK(bx.x() == doctest::Approx(std::cos(0.3)));
  CHECK(bx.y() == doctest::Approx(std::sin(0.3)));
  CHECK(bx.z() == doctest::Approx(0.0));
}

TEST_CASE("skew and vee invert each other and reproduce the cross product") {
  const Vec3 v(0.3, -1.2, 2.0), w(-0.7, 0.1, 0.9);
  CHECK((vee(skew(v)) - v).norm() == 0.0);
  CHECK((skew(v) * w - v.cross(w)).norm() < 1e-15);
}

TEST_CASE("rotation derivatives match finite differences") {
  // q(t) = 0.3 + 0.7 t - 0.2 t^2 about each axis.
  const auto q = [](double t) { return 0.3 + 0.7 * t - 0.2 * t * t; };
  const auto qd = [](double t) { return 0.7 - 0.4 * t; };
  const double qdd = -0.4;
  const double t0 = 0.6, h = 1e-5;

  struct Case {
    Vec3 axis;
    Mat3 (*rot)(double);
  };
  const Case cases[] = {{Vec3::UnitX(), rot_x},
                        {Vec3::UnitY(), rot_y},
                        {Vec3::UnitZ(), rot_z}};
  for (const Case& c : cases) {
    const Mat3 r = c.rot(q(t0));
    const Mat3 fd1 = (c.rot(q(t0 + h)) - c.rot(q(t0 - h))) / (2 * h);
    const Mat3 fd2 =
        (c.rot(q(t0 + h)) - 2.0 * r + c.rot(q(t0 - h))) / (h * h);
    CHECK(approx(rot_deriv(c.axis, qd(t0), r), fd1, 1e-9));
    CHECK(approx(rot_deriv2(c.axis, qd(t0), qdd, r), fd2, 1e-5));
  }
}

TEST_CASE("quaternion kinematics preserve the norm and match Eigen") {
  const Quat q = Quat(0.8, -0.2, 0.5, 0.27).normalized();
  const Vec3 w(0.4, -1.1, 2.2);
  const Vec4 qv = quat_to_vec(q);
  const Vec4 qd = quat_derivative(qv, w);

  // d/dt ||q||^2 = 2 q . qd = 0.
  CHECK(std::abs(qv.dot(qd)) < 1e-15);

  // Against the Hamilton product q ∘ (0, w) / 2.
  const Quat wq(0, w.x(), w.y(), w.z());
  const Quat prod = q * wq;
  CHECK(qd(0) == doctest::Approx(0.5 * prod.w()).epsilon(1e-12));
  CHECK(qd(1) == doctest::Approx(0.5 * prod.x()).epsilon(1e-12));
  CHECK(qd(2) == doctest::Approx(0.5 * prod.y()).epsilon(1e-12));
  CHECK(qd(3) == doctest::Approx(0.5 * prod.z()).epsilon(1e-12));

  // Consistency with R_dot = R [w]x: integrate one tiny step.
  const double h = 1e-6;
  const Quat q2 = vec_to_quat((qv + h * qd).normalized());
  const Mat3 r_pred = q.toRotationMatrix() *
                      (Mat3::Identity() + h * skew(w));
  CHECK(approx(q2.toRotationMatrix(), r_pred, 1e-11));
}

TEST_CASE("geodesic angle handles the double cover") {
  const Quat a = Quat(Eigen::AngleAxisd(0.0, Vec3::UnitX()));
  for (double ang : {0.0, 0.3, 1.7}) {
    const Quat b = Quat(Eigen::AngleAxisd(ang, Vec3::UnitZ()));
    CHECK(rotation_angle(a, b) == doctest::Approx(ang).epsilon(1e-12));
    const Quat bneg(-b.w(), -b.x(), -b.y(), -b.z());
    CHECK(rotation_angle(a, bneg) == doctest::Approx(ang).epsilon(1e-12));
  }
}

TEST_CASE("branch resolution picks the nearest mod-pi representative") {
  CHECK(resolve_branch(0.2, 0.0) == doctest::Approx(0.2));
  CHECK(resolve_branch(0.2, kPi) == doctest::Approx(0.2 + kPi));
  CHECK(resolve_branch(-2.3561944901923449, 0.0) ==
        doctest::Approx(kPi / 4).epsilon(1e-12));  // -3pi/4 resolved near 0
  CHECK(resolve_branch(2.9, 6.1) == doctest::Approx(2.9 + kPi).epsilon(1e-12));
  // Large unwind: many turns away.
  CHECK(resolve_branch(0.1, 10 * kPi + 0.3) ==
        doctest::Approx(10 * kPi + 0.1).epsilon(1e-12));
}
