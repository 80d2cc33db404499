#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flatgen/minsnap.hpp"

namespace flatgen {

// A named waypoint problem: everything the generation pipeline needs except
// the vehicle. If total_time is set the trajectory is generated at exactly
// that duration; otherwise the duration is minimized against the actuator
// envelope.
struct ManeuverRecipe {
  std::string name;
  std::vector<Waypoint> waypoints;
  double mu_psi = 1.0;
  std::optional<double> total_time;
};

// Wraps an angle into (-pi, pi]; exact half-turn ties resolve to +pi.
double wrap_angle(double a);

// Aerobatic catalogue. Geometry is fixed; timing comes from the pipeline.
ManeuverRecipe loop_recipe();
ManeuverRecipe knife_edge_recipe();
ManeuverRecipe climbing_turn_recipe();
ManeuverRecipe immelmann_recipe();
ManeuverRecipe split_s_recipe();
ManeuverRecipe diff_thrust_turn_recipe();

// Straight-line reposition between hovers d metres apart, yawing through
// the minimal rotation from psi_start to psi_end.
ManeuverRecipe hover_to_hover_recipe(double d, double psi_start, double psi_end);

// Race course: each gate is crossed along its normal, either nose-first
// (coordinated) or wings-vertical (knife-edge, yaw offset +pi/2). Start and
// end hover at the same point.
struct Gate {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitX();
  bool knife_edge = false;
};
ManeuverRecipe race_recipe(const std::vector<Gate>& gates);
ManeuverRecipe race_recipe();  // built-in four-gate course

std::vector<std::string> builtin_maneuver_names();
ManeuverRecipe make_builtin(const std::string& name);

// JSON recipe interchange.
ManeuverRecipe recipe_from_json_string(const std::string& text);
ManeuverRecipe load_recipe(const std::string& path);
std::string recipe_to_json_string(const ManeuverRecipe& recipe);

}  // namespace flatgen
