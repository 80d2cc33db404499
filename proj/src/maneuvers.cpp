#include "flatgen/maneuvers.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace flatgen {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

Waypoint through(const Vec3& pos, double yaw) {
  Waypoint w;
  w.position = pos;
  w.yaw = yaw;
  return w;
}

Waypoint cruise(const Vec3& pos, const Vec3& vel, double yaw) {
  Waypoint w = through(pos, yaw);
  w.velocity = vel;
  return w;
}

Waypoint tangent(const Vec3& pos, const Vec3& dir, double yaw) {
  Waypoint w = through(pos, yaw);
  w.velocity_direction = dir;
  return w;
}

}  // namespace

double wrap_angle(double a) {
  double w = std::fmod(a, 2.0 * kPi);
  if (w <= -kPi)
    w += 2.0 * kPi;
  else if (w > kPi)
    w -= 2.0 * kPi;
  return w;
}

ManeuverRecipe loop_recipe() {
  // Vertical circle of 1 m radius in the x-z plane, entered and exited at
  // the bottom moving forward; the velocity direction is pinned tangential
  // at each quarter point. Hover lead-in and lead-out on both sides.
  ManeuverRecipe r;
  r.name = "loop";
  r.waypoints = {
      Waypoint::rest(Vec3(-2.5, 0, 0), 0),
      tangent(Vec3(0, 0, 0), Vec3(1, 0, 0), 0),
      tangent(Vec3(1, 0, -1), Vec3(0, 0, -1), 0),
      tangent(Vec3(0, 0, -2), Vec3(-1, 0, 0), 0),
      tangent(Vec3(-1, 0, -1), Vec3(0, 0, 1), 0),
      tangent(Vec3(0, 0, 0), Vec3(1, 0, 0), 0),
      Waypoint::rest(Vec3(2.5, 0, 0), 0),
  };
  return r;
}

ManeuverRecipe knife_edge_recipe() {
  // Straight line at 5 m/s; the mid-course yaw waypoints swing the wing
  // vertical, hold it there, and recover. Yaw rate is pinned at the two
  // hold waypoints so the knife-edge segment stays level.
  ManeuverRecipe r;
  r.name = "knife_edge";
  const Vec3 v(5, 0, 0);
  Waypoint hold1 = cruise(Vec3(5.5, 0, 0), v, kPi / 2);
  hold1.yaw_rate = 0.0;
  Waypoint hold2 = cruise(Vec3(8.5, 0, 0), v, kPi / 2);
  hold2.yaw_rate = 0.0;
  r.waypoints = {
      Waypoint::rest(Vec3(0, 0, 0), 0),
      cruise(Vec3(3, 0, 0), v, 0),
      hold1,
      hold2,
      cruise(Vec3(11, 0, 0), v, 0),
      Waypoint::rest(Vec3(14, 0, 0), 0),
  };
  return r;
}

ManeuverRecipe climbing_turn_recipe() {
  // 270 degree climbing turn: straight coordinated flight into a waypoint,
  // a full three-quarter turn gaining 1 m of height to a waypoint directly
  // above it, and a straight exit perpendicular to the entry.
  ManeuverRecipe r;
  r.name = "climbing_turn";
  r.waypoints = {
      Waypoint::rest(Vec3(0, 0, 0), 0),
      cruise(Vec3(4, 0, 0), Vec3(5, 0, 0), 0),
      cruise(Vec3(4, 0, -1), Vec3(0, -5, 0), 1.5 * kPi),
      Waypoint::rest(Vec3(4, -4, -1), 1.5 * kPi),
  };
  return r;
}

ManeuverRecipe immelmann_recipe() {
  // Half loop up from level flight (1.5 m radius, tangent directions pinned
  // so speed can follow the time scale), leaving the vehicle inverted over
  // the entry line, then a yaw sweep to pi rolls it upright on the way out.
  ManeuverRecipe r;
  r.name = "immelmann";
  r.waypoints = {
      Waypoint::rest(Vec3(0, 0, 0), 0),
      tangent(Vec3(3, 0, 0), Vec3(1, 0, 0), 0),
      tangent(Vec3(4.5, 0, -1.5), Vec3(0, 0, -1), 0),
      tangent(Vec3(3, 0, -3), Vec3(-1, 0, 0), 0),
      tangent(Vec3(0.5, 0, -3), Vec3(-1, 0, 0), kPi),
      Waypoint::rest(Vec3(-2.5, 0, -3), kPi),
  };
  return r;
}

ManeuverRecipe split_s_recipe() {
  // The Immelmann run in reverse: yaw sweep to inverted on the top leg,
  // then a downward half loop (1.5 m radius, direction-only waypoints)
  // exits in regular coordinated flight heading the other way.
  ManeuverRecipe r;
  r.name = "split_s";
  r.waypoints = {
      Waypoint::rest(Vec3(0, 0, -4), 0),
      tangent(Vec3(2.5, 0, -4), Vec3(1, 0, 0), 0),
      tangent(Vec3(5, 0, -4), Vec3(1, 0, 0), kPi),
      tangent(Vec3(6.5, 0, -2.5), Vec3(0, 0, 1), kPi),
      tangent(Vec3(5, 0, -1), Vec3(-1, 0, 0), kPi),
      Waypoint::rest(Vec3(2, 0, -1), kPi),
  };
  return r;
}

ManeuverRecipe diff_thrust_turn_recipe() {
  // Out and back along a line: the turn-around point is a coinciding
  // waypoint pair with opposite velocity and a half-turn yaw change.
  ManeuverRecipe r;
  r.name = "diff_thrust_turn";
  r.waypoints = {
      Waypoint::rest(Vec3(0, 0, 0), 0),
      cruise(Vec3(6, 0, 0), Vec3(8, 0, 0), 0),
      cruise(Vec3(6, 0, 0), Vec3(-8, 0, 0), kPi),
      Waypoint::rest(Vec3(0, 0, 0), kPi),
  };
  return r;
}

ManeuverRecipe hover_to_hover_recipe(double d, double psi_start,
                                     double psi_end) {
  ManeuverRecipe r;
  r.name = "hover_to_hover";
  // Shortest rotation toward the requested heading. An exact half-turn is a
  // tie; keeping the sign of the raw difference makes mirrored requests
  // (psi_start, psi_end) -> (-psi_start, -psi_end) sweep mirrored ways.
  const double psi_final =
      psi_start + std::remainder(psi_end - psi_start, 2 * kPi);
  r.waypoints = {
      Waypoint::rest(Vec3(0, 0, 0), psi_start),
      Waypoint::rest(Vec3(d, 0, 0), psi_final),
  };
  return r;
}

ManeuverRecipe race_recipe(const std::vector<Gate>& gates) {
  if (gates.empty())
    throw std::invalid_argument("race recipe: need at least one gate");
  ManeuverRecipe r;
  r.name = "race";
  r.waypoints.push_back(Waypoint::rest(Vec3(0, 0, 0), 0));
  double psi_prev = 0;
  for (const auto& g : gates) {
    if (g.normal.head<2>().norm() < 1e-9)
      throw std::invalid_argument("race recipe: gate normal must not be vertical");
    double heading = std::atan2(g.normal.y(), g.normal.x());
    if (g.knife_edge) heading += kPi / 2;
    const double psi = psi_prev + wrap_angle(heading - psi_prev);
    Waypoint w = tangent(g.position, g.normal.normalized(), psi);
    r.waypoints.push_back(w);
    psi_prev = psi;
  }
  const double psi_home = psi_prev + wrap_angle(0.0 - psi_prev);
  r.waypoints.push_back(Waypoint::rest(Vec3(0, 0, 0), psi_home));
  return r;
}

ManeuverRecipe race_recipe() {
  std::vector<Gate> gates = {
      {Vec3(8, -2, -1.5), Vec3(1, 0, 0), false},
      {Vec3(14, 3, -2.0), Vec3(0, 1, 0), false},
      {Vec3(8, 8, -1.5), Vec3(-1, 0, 0), false},
      {Vec3(2, 3, -1.5), Vec3(0, -1, 0), true},
  };
  ManeuverRecipe r = race_recipe(gates);
  r.name = "race";
  return r;
}

std::vector<std::string> builtin_maneuver_names() {
  return {"loop",      "knife_edge", "climbing_turn", "immelmann",
          "split_s",   "diff_thrust_turn", "hover_to_hover", "race"};
}

ManeuverRecipe make_builtin(const std::string& name) {
  if (name == "loop") return loop_recipe();
  if (name == "knife_edge") return knife_edge_recipe();
  if (name == "climbing_turn") return climbing_turn_recipe();
  if (name == "immelmann") return immelmann_recipe();
  if (name == "split_s") return split_s_recipe();
  if (name == "diff_thrust_turn") return diff_thrust_turn_recipe();
  if (name == "hover_to_hover") return hover_to_hover_recipe(6.0, 0.0, 0.0);
  if (name == "race") return race_recipe();
  throw std::invalid_argument("unknown maneuver: " + name);
}

namespace {

using nlohmann::json;

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument("recipe: expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::string recipe_to_json_string(const ManeuverRecipe& recipe) {
  json j;
  j["name"] = recipe.name;
  j["mu_psi"] = recipe.mu_psi;
  if (recipe.total_time)
    j["total_time"] = *recipe.total_time;
  else
    j["total_time"] = nullptr;
  j["waypoints"] = json::array();
  for (const auto& w : recipe.waypoints) {
    json jw;
    jw["position"] = vec_to_json(w.position);
    jw["yaw"] = w.yaw;
    if (w.velocity) jw["velocity"] = vec_to_json(*w.velocity);
    if (w.velocity_direction)
      jw["velocity_direction"] = vec_to_json(*w.velocity_direction);
    if (w.acceleration) jw["acceleration"] = vec_to_json(*w.acceleration);
    if (w.jerk) jw["jerk"] = vec_to_json(*w.jerk);
    if (w.snap) jw["snap"] = vec_to_json(*w.snap);
    if (w.yaw_rate) jw["yaw_rate"] = *w.yaw_rate;
    if (w.yaw_acc) jw["yaw_acc"] = *w.yaw_acc;
    j["waypoints"].push_back(jw);
  }
  return j.dump(2) + "\n";
}

ManeuverRecipe recipe_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("recipe: invalid JSON: ") + e.what());
  }
  ManeuverRecipe r;
  r.name = j.value("name", std::string("custom"));
  r.mu_psi = j.value("mu_psi", 1.0);
  if (j.contains("total_time") && !j["total_time"].is_null())
    r.total_time = j["total_time"].get<double>();
  if (!j.contains("waypoints") || !j["waypoints"].is_array())
    throw std::invalid_argument("recipe: missing waypoints array");
  for (const auto& jw : j["waypoints"]) {
    Waypoint w;
    if (!jw.contains("position"))
      throw std::invalid_argument("recipe: waypoint missing position");
    w.position = vec_from_json(jw["position"]);
    w.yaw = jw.value("yaw", 0.0);
    if (jw.contains("velocity")) w.velocity = vec_from_json(jw["velocity"]);
    if (jw.contains("velocity_direction"))
      w.velocity_direction = vec_from_json(jw["velocity_direction"]);
    if (jw.contains("acceleration"))
      w.acceleration = vec_from_json(jw["acceleration"]);
    if (jw.contains("jerk")) w.jerk = vec_from_json(jw["jerk"]);
    if (jw.contains("snap")) w.snap = vec_from_json(jw["snap"]);
    if (jw.contains("yaw_rate")) w.yaw_rate = jw["yaw_rate"].get<double>();
    if (jw.contains("yaw_acc")) w.yaw_acc = jw["yaw_acc"].get<double>();
    r.waypoints.push_back(w);
  }
  if (r.waypoints.size() < 2)
    throw std::invalid_argument("recipe: need at least two waypoints");
  return r;
}

ManeuverRecipe load_recipe(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open recipe file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return recipe_from_json_string(ss.str());
}

}  // namespace flatgen
