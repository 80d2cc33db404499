#include "flatgen/vehicle.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "flatgen/rotations.hpp"

namespace flatgen {

namespace {

const std::set<std::string> kScalarKeys = {
    "m",        "g",        "alpha_0",   "alpha_t",  "c_t",      "c_mu",
    "c_dt",     "c_lt",     "c_dv",      "c_lv",     "c_flap_t", "c_flap_v",
    "c_mu_t",   "l_ty",     "l_dx",      "l_dy",     "omega_min",
    "omega_max", "delta_max"};

const std::set<std::string> kInertiaKeys = {"Jxx", "Jxy", "Jxz",
                                            "Jyy", "Jyz", "Jzz"};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void VehicleParams::validate() const {
  auto req = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("vehicle params: ") + what);
  };
  req(m > 0, "mass must be positive");
  req(g > 0, "gravity must be positive");
  req(c_t > 0, "c_t must be positive");
  req(c_mu >= 0, "c_mu must be non-negative");
  req(c_dt >= 0 && c_dt < 1, "c_dt must lie in [0,1)");
  req(c_lt >= 0 && c_lt < 1, "c_lt must lie in [0,1)");
  req(c_dv >= 0 && c_lv >= 0, "airspeed coefficients must be non-negative");
  req(l_ty > 0 && l_dx > 0 && l_dy > 0, "moment arms must be positive");
  req(omega_max > omega_min && omega_min >= 0, "prop speed envelope invalid");
  req(delta_max > 0, "delta_max must be positive");
  req(std::abs(alpha_0) < 0.5 && std::abs(alpha_t) < 0.5,
      "tilt angles implausibly large");
  Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
  req(es.eigenvalues().minCoeff() > 0, "inertia must be positive definite");
}

VehicleParams params_from_string(const std::string& text) {
  std::map<std::string, double> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("param file line " + std::to_string(lineno) +
                                  ": expected `name = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!kScalarKeys.count(key) && !kInertiaKeys.count(key))
      throw std::invalid_argument("param file line " + std::to_string(lineno) +
                                  ": unknown key `" + key + "`");
    if (kv.count(key))
      throw std::invalid_argument("param file line " + std::to_string(lineno) +
                                  ": duplicate key `" + key + "`");
    size_t used = 0;
    double parsed = 0;
    try {
      parsed = std::stod(val, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != val.size() || val.empty())
      throw std::invalid_argument("param file line " + std::to_string(lineno) +
                                  ": bad numeric value `" + val + "`");
    kv[key] = parsed;
  }
  for (const auto& k : kScalarKeys)
    if (!kv.count(k))
      throw std::invalid_argument("param file: missing key `" + k + "`");
  for (const auto& k : kInertiaKeys)
    if (!kv.count(k))
      throw std::invalid_argument("param file: missing key `" + k + "`");

  VehicleParams p;
  p.m = kv["m"];
  p.g = kv["g"];
  p.alpha_0 = kv["alpha_0"];
  p.alpha_t = kv["alpha_t"];
  p.c_t = kv["c_t"];
  p.c_mu = kv["c_mu"];
  p.c_dt = kv["c_dt"];
  p.c_lt = kv["c_lt"];
  p.c_dv = kv["c_dv"];
  p.c_lv = kv["c_lv"];
  p.c_flap_t = kv["c_flap_t"];
  p.c_flap_v = kv["c_flap_v"];
  p.c_mu_t = kv["c_mu_t"];
  p.l_ty = kv["l_ty"];
  p.l_dx = kv["l_dx"];
  p.l_dy = kv["l_dy"];
  p.omega_min = kv["omega_min"];
  p.omega_max = kv["omega_max"];
  p.delta_max = kv["delta_max"];
  p.inertia << kv["Jxx"], kv["Jxy"], kv["Jxz"],
               kv["Jxy"], kv["Jyy"], kv["Jyz"],
               kv["Jxz"], kv["Jyz"], kv["Jzz"];
  p.validate();
  return p;
}

VehicleParams load_params(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open param file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return params_from_string(ss.str());
}

MotorOutput motor_output(double omega1, double omega2, const VehicleParams& p) {
  if (omega1 < 0 || omega2 < 0)
    throw std::domain_error("prop speeds must be non-negative");
  MotorOutput out;
  out.t1 = p.c_t * omega1 * omega1;
  out.t2 = p.c_t * omega2 * omega2;
  // Counter-rotating pair: motor 1 reacts positively about the thrust axis,
  // motor 2 negatively, so equal speeds cancel.
  out.mu1 = p.c_mu * omega1 * omega1;
  out.mu2 = -p.c_mu * omega2 * omega2;
  return out;
}

double flap_effectiveness(double thrust, double v_alpha_x, double speed,
                          const VehicleParams& p) {
  return -(p.c_flap_t * std::cos(p.alpha_bar()) * thrust +
           p.c_flap_v * speed * v_alpha_x);
}

Vec3 thrust_force_zl(double thrust, const VehicleParams& p) {
  return Vec3(p.thrust_forward() * thrust, 0.0, p.thrust_lift() * thrust);
}

Vec3 wing_force_zl(const Vec3& v_alpha, double speed, const VehicleParams& p) {
  return Vec3(-p.c_dv * speed * v_alpha.x(), 0.0, -p.c_lv * speed * v_alpha.z());
}

Vec3 flap_force_zl(double nu1, double nu2, double delta1, double delta2) {
  return Vec3(0.0, 0.0, nu1 * delta1 + nu2 * delta2);
}

Vec3 force_zero_lift(const Vec3& v_alpha, double speed, double t1, double t2,
                     double delta1, double delta2, const VehicleParams& p,
                     const ModelTerms& terms) {
  Vec3 f = thrust_force_zl(t1 + t2, p) + wing_force_zl(v_alpha, speed, p);
  if (terms.flap_force) {
    const double nu1 = flap_effectiveness(t1, v_alpha.x(), speed, p);
    const double nu2 = flap_effectiveness(t2, v_alpha.x(), speed, p);
    f += flap_force_zl(nu1, nu2, delta1, delta2);
  }
  return f;
}

Mat3 rot_body_from_zl(const VehicleParams& p) { return rot_y(-p.alpha_0); }

Vec3 thrust_moment_body(double t1, double t2, const VehicleParams& p) {
  // Per-unit-thrust force components of a motor, rotated into the body frame.
  const double fx = p.thrust_forward();  // zero-lift x per unit thrust
  const double fz = p.thrust_lift();     // zero-lift z per unit thrust
  const double c0 = std::cos(p.alpha_0), s0 = std::sin(p.alpha_0);
  const double body_z = s0 * fx + c0 * fz;  // i_z . R(f per unit thrust)
  const double body_x = c0 * fx - s0 * fz;
  return Vec3(p.l_ty * body_z * (t2 - t1), p.c_mu_t * (t1 + t2),
              p.l_ty * body_x * (t1 - t2));
}

Vec3 motor_torque_moment_body(double mu_sum, const VehicleParams& p) {
  return Vec3(std::cos(p.alpha_t), 0.0, -std::sin(p.alpha_t)) * mu_sum;
}

Vec3 flap_moment_body(double nu1, double nu2, double delta1, double delta2,
                      const VehicleParams& p, const ModelTerms& terms) {
  const double f1 = nu1 * delta1;  // zero-lift z-force of each flap
  const double f2 = nu2 * delta2;
  Vec3 m(p.l_dy * std::cos(p.alpha_0) * (f2 - f1), p.l_dx * (f1 + f2),
         p.l_dy * std::sin(p.alpha_0) * (f2 - f1));
  if (!terms.flap_yaw_moment) m.z() = 0.0;
  return m;
}

Vec3 moment_body(const Vec3& v_alpha, double speed, double t1, double t2,
                 double mu_sum, double delta1, double delta2,
                 const VehicleParams& p, const ModelTerms& terms) {
  const double nu1 = flap_effectiveness(t1, v_alpha.x(), speed, p);
  const double nu2 = flap_effectiveness(t2, v_alpha.x(), speed, p);
  return thrust_moment_body(t1, t2, p) + motor_torque_moment_body(mu_sum, p) +
         flap_moment_body(nu1, nu2, delta1, delta2, p, terms);
}

StateDerivative state_derivative(const VehicleState& s, const ControlInput& u,
                                 const VehicleParams& p,
                                 const ModelTerms& terms) {
  if (std::abs(s.q.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("attitude quaternion drifted off unit norm");
  const MotorOutput mo = motor_output(u.omega1, u.omega2, p);

  const Mat3 r_ib = s.q.toRotationMatrix();
  const Mat3 r_ia = r_ib * rot_body_from_zl(p);
  const Vec3 v_alpha = r_ia.transpose() * s.v;
  const double speed = s.v.norm();

  const Vec3 f_alpha = force_zero_lift(v_alpha, speed, mo.t1, mo.t2, u.delta1,
                                       u.delta2, p, terms);
  const Vec3 m_b = moment_body(v_alpha, speed, mo.t1, mo.t2, mo.mu1 + mo.mu2,
                               u.delta1, u.delta2, p, terms);

  StateDerivative d;
  d.xdot = s.v;
  d.vdot = Vec3(0, 0, p.g) + r_ia * f_alpha / p.m;
  d.qdot = quat_derivative(quat_to_vec(s.q), s.omega);
  d.omegadot = p.inertia.ldlt().solve(m_b - s.omega.cross(p.inertia * s.omega));
  return d;
}

}  // namespace flatgen
