// Python bindings for the trajectory toolkit. The module mirrors the C++
// surface closely: parameter loading, the waypoint/min-snap solver, the
// flat transform, feasibility scans and the open-loop simulator.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flatgen/feasibility.hpp"
#include "flatgen/flatness.hpp"
#include "flatgen/io.hpp"
#include "flatgen/maneuvers.hpp"
#include "flatgen/minsnap.hpp"
#include "flatgen/simulator.hpp"
#include "flatgen/vehicle.hpp"

namespace py = pybind11;
using namespace flatgen;

namespace {

Vec4 quat_coeffs(const Quat& q) { return Vec4(q.w(), q.x(), q.y(), q.z()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Aerobatic trajectory toolkit for a tailsitter flying wing "
            "(world frame is north-east-down).";

  // --- vehicle ----------------------------------------------------------
  py::class_<VehicleParams>(m, "VehicleParams")
      .def(py::init<>())
      .def_readwrite("m", &VehicleParams::m)
      .def_readwrite("g", &VehicleParams::g)
      .def_readwrite("inertia", &VehicleParams::inertia)
      .def_readwrite("alpha_0", &VehicleParams::alpha_0)
      .def_readwrite("alpha_t", &VehicleParams::alpha_t)
      .def_readwrite("c_t", &VehicleParams::c_t)
      .def_readwrite("c_mu", &VehicleParams::c_mu)
      .def_readwrite("c_dt", &VehicleParams::c_dt)
      .def_readwrite("c_lt", &VehicleParams::c_lt)
      .def_readwrite("c_dv", &VehicleParams::c_dv)
      .def_readwrite("c_lv", &VehicleParams::c_lv)
      .def_readwrite("c_flap_t", &VehicleParams::c_flap_t)
      .def_readwrite("c_flap_v", &VehicleParams::c_flap_v)
      .def_readwrite("c_mu_t", &VehicleParams::c_mu_t)
      .def_readwrite("l_ty", &VehicleParams::l_ty)
      .def_readwrite("l_dx", &VehicleParams::l_dx)
      .def_readwrite("l_dy", &VehicleParams::l_dy)
      .def_readwrite("omega_min", &VehicleParams::omega_min)
      .def_readwrite("omega_max", &VehicleParams::omega_max)
      .def_readwrite("delta_max", &VehicleParams::delta_max)
      .def("alpha_bar", &VehicleParams::alpha_bar)
      .def("thrust_forward", &VehicleParams::thrust_forward)
      .def("thrust_lift", &VehicleParams::thrust_lift)
      .def("eta", &VehicleParams::eta)
      .def("validate", &VehicleParams::validate);
  m.def("load_params", &load_params, py::arg("path"));
  m.def("params_from_string", &params_from_string, py::arg("text"));

  py::class_<ControlInput>(m, "ControlInput")
      .def(py::init<>())
      .def_readwrite("omega1", &ControlInput::omega1)
      .def_readwrite("omega2", &ControlInput::omega2)
      .def_readwrite("delta1", &ControlInput::delta1)
      .def_readwrite("delta2", &ControlInput::delta2);

  py::class_<VehicleState>(m, "VehicleState")
      .def(py::init<>())
      .def_readwrite("x", &VehicleState::x)
      .def_readwrite("v", &VehicleState::v)
      .def_readwrite("omega", &VehicleState::omega)
      .def_property(
          "q", [](const VehicleState& s) { return quat_coeffs(s.q); },
          [](VehicleState& s, const Vec4& wxyz) {
            s.q = Quat(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
          },
          "attitude quaternion as (w, x, y, z)");

  // --- flat output / waypoints -------------------------------------------
  py::class_<FlatSample>(m, "FlatSample")
      .def(py::init<>())
      .def_readwrite("t", &FlatSample::t)
      .def_readwrite("x", &FlatSample::x)
      .def_readwrite("v", &FlatSample::v)
      .def_readwrite("a", &FlatSample::a)
      .def_readwrite("j", &FlatSample::j)
      .def_readwrite("s", &FlatSample::s)
      .def_readwrite("psi", &FlatSample::psi)
      .def_readwrite("psi_d", &FlatSample::psi_d)
      .def_readwrite("psi_dd", &FlatSample::psi_dd);

  py::class_<Waypoint>(m, "Waypoint")
      .def(py::init<>())
      .def_readwrite("position", &Waypoint::position)
      .def_readwrite("yaw", &Waypoint::yaw)
      .def_readwrite("velocity", &Waypoint::velocity)
      .def_readwrite("acceleration", &Waypoint::acceleration)
      .def_readwrite("jerk", &Waypoint::jerk)
      .def_readwrite("snap", &Waypoint::snap)
      .def_readwrite("velocity_direction", &Waypoint::velocity_direction)
      .def_readwrite("yaw_rate", &Waypoint::yaw_rate)
      .def_readwrite("yaw_acc", &Waypoint::yaw_acc)
      .def_static("rest", &Waypoint::rest, py::arg("position"),
                  py::arg("yaw"));

  py::class_<Trajectory::Segment>(m, "Segment")
      .def_readwrite("duration", &Trajectory::Segment::duration)
      .def_readwrite("coeffs", &Trajectory::Segment::coeffs);

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init<>())
      .def_readwrite("segments", &Trajectory::segments)
      .def("total_time", &Trajectory::total_time);

  m.def("sample_flat", &sample_flat, py::arg("trajectory"), py::arg("t"));
  m.def(
      "solve_min_snap",
      [](const std::vector<Waypoint>& wps, const std::vector<double>& times,
         double mu_psi) {
        const SolveResult r = solve_min_snap(wps, times, mu_psi);
        return py::make_tuple(r.trajectory, r.cost);
      },
      py::arg("waypoints"), py::arg("times"), py::arg("mu_psi") = 1.0,
      "returns (trajectory, cost)");
  m.def("min_snap_cost", &min_snap_cost, py::arg("trajectory"),
        py::arg("mu_psi") = 1.0);
  m.def("initial_time_estimate", &initial_time_estimate, py::arg("waypoints"),
        py::arg("v_nominal") = 4.0, py::arg("zero_chord_time") = 0.5);
  m.def("scale_time", &scale_time, py::arg("trajectory"), py::arg("c"));

  // --- flat transform -----------------------------------------------------
  py::class_<BranchState>(m, "BranchState")
      .def(py::init<>())
      .def_readwrite("phi", &BranchState::phi)
      .def_readwrite("theta_bar", &BranchState::theta_bar);

  py::class_<FullStateInput>(m, "FullStateInput")
      .def_readonly("state", &FullStateInput::state)
      .def_readonly("omega_dot", &FullStateInput::omega_dot)
      .def_readonly("moment", &FullStateInput::moment)
      .def_readonly("phi", &FullStateInput::phi)
      .def_readonly("theta", &FullStateInput::theta)
      .def_readonly("thrust", &FullStateInput::thrust)
      .def_readonly("thrust_diff", &FullStateInput::thrust_diff)
      .def_readonly("t1", &FullStateInput::t1)
      .def_readonly("t2", &FullStateInput::t2)
      .def_readonly("input", &FullStateInput::input)
      .def_readonly("negative_thrust", &FullStateInput::negative_thrust)
      .def_readonly("flap_z_residual", &FullStateInput::flap_z_residual);

  m.def(
      "flat_to_full",
      [](const FlatSample& q, const VehicleParams& p, BranchState& branch) {
        return flat_to_full(q, p, branch);
      },
      py::arg("sample"), py::arg("params"), py::arg("branch"));

  // --- maneuvers ----------------------------------------------------------
  py::class_<ManeuverRecipe>(m, "ManeuverRecipe")
      .def(py::init<>())
      .def_readwrite("name", &ManeuverRecipe::name)
      .def_readwrite("waypoints", &ManeuverRecipe::waypoints)
      .def_readwrite("mu_psi", &ManeuverRecipe::mu_psi)
      .def_readwrite("total_time", &ManeuverRecipe::total_time);

  m.def("builtin_maneuver_names", &builtin_maneuver_names);
  m.def("make_builtin", &make_builtin, py::arg("name"));
  m.def("hover_to_hover_recipe", &hover_to_hover_recipe, py::arg("dist"),
        py::arg("psi_start"), py::arg("psi_end"));
  m.def("load_recipe", &load_recipe, py::arg("path"));
  m.def("recipe_from_json", &recipe_from_json_string, py::arg("text"));
  m.def("recipe_to_json", &recipe_to_json_string, py::arg("recipe"));

  // --- feasibility ----------------------------------------------------------
  py::class_<LimitViolation>(m, "LimitViolation")
      .def_readonly("time", &LimitViolation::time)
      .def_readonly("limit", &LimitViolation::limit)
      .def_readonly("value", &LimitViolation::value)
      .def_readonly("bound", &LimitViolation::bound);

  py::class_<FeasibilityReport>(m, "FeasibilityReport")
      .def_readonly("feasible", &FeasibilityReport::feasible)
      .def_readonly("dt", &FeasibilityReport::dt)
      .def_readonly("samples", &FeasibilityReport::samples)
      .def_readonly("total_time", &FeasibilityReport::total_time)
      .def_readonly("omega_peak", &FeasibilityReport::omega_peak)
      .def_readonly("omega_trough", &FeasibilityReport::omega_trough)
      .def_readonly("flap_peak_abs", &FeasibilityReport::flap_peak_abs)
      .def_readonly("margin_omega_high", &FeasibilityReport::margin_omega_high)
      .def_readonly("margin_omega_low", &FeasibilityReport::margin_omega_low)
      .def_readonly("margin_flap", &FeasibilityReport::margin_flap)
      .def_readonly("negative_thrust", &FeasibilityReport::negative_thrust)
      .def_readonly("near_limit", &FeasibilityReport::near_limit)
      .def_readonly("abort_reason", &FeasibilityReport::abort_reason)
      .def_readonly("first_violation", &FeasibilityReport::first_violation)
      .def_readonly("max_speed", &FeasibilityReport::max_speed)
      .def_readonly("max_load_g", &FeasibilityReport::max_load_g)
      .def_readonly("max_rate_dps", &FeasibilityReport::max_rate_dps);

  m.def("check_trajectory", &check_trajectory, py::arg("trajectory"),
        py::arg("params"), py::arg("dt") = 5e-3);

  py::class_<ScalePoint>(m, "ScalePoint")
      .def_readonly("c", &ScalePoint::c)
      .def_readonly("feasible", &ScalePoint::feasible);

  py::class_<ScaleScan>(m, "ScaleScan")
      .def_readonly("found", &ScaleScan::found)
      .def_readonly("c_star", &ScaleScan::c_star)
      .def_readonly("at_lower_bound", &ScaleScan::at_lower_bound)
      .def_readonly("profile", &ScaleScan::profile)
      .def_readonly("feasible_runs", &ScaleScan::feasible_runs);

  m.def(
      "min_feasible_scale",
      [](const ManeuverRecipe& recipe, const VehicleParams& p) {
        return min_feasible_scale(recipe, p);
      },
      py::arg("recipe"), py::arg("params"));

  py::class_<GeneratedManeuver>(m, "GeneratedManeuver")
      .def_readonly("trajectory", &GeneratedManeuver::trajectory)
      .def_readonly("base_times", &GeneratedManeuver::base_times)
      .def_readonly("scale", &GeneratedManeuver::scale)
      .def_readonly("scan", &GeneratedManeuver::scan)
      .def_readonly("report", &GeneratedManeuver::report);

  m.def(
      "generate_maneuver",
      [](const ManeuverRecipe& recipe, const VehicleParams& p) {
        return generate_maneuver(recipe, p);
      },
      py::arg("recipe"), py::arg("params"));

  py::enum_<CircleMode>(m, "CircleMode")
      .value("coordinated", CircleMode::coordinated)
      .value("knife_edge", CircleMode::knife_edge)
      .value("rolling", CircleMode::rolling);

  m.def("circle_sample", &circle_sample, py::arg("radius"), py::arg("speed"),
        py::arg("mode"), py::arg("t"));
  m.def("circle_check", &circle_check, py::arg("radius"), py::arg("speed"),
        py::arg("mode"), py::arg("params"), py::arg("dt") = 5e-3);
  m.def(
      "circle_max_speed",
      [](double r, CircleMode mode, const VehicleParams& p) {
        return circle_max_speed(r, mode, p);
      },
      py::arg("radius"), py::arg("mode"), py::arg("params"));
  m.def("knife_edge_speed_bound", &knife_edge_speed_bound, py::arg("radius"),
        py::arg("params"));

  py::class_<Heatmap>(m, "Heatmap")
      .def_readonly("psi_start", &Heatmap::psi_start)
      .def_readonly("psi_end", &Heatmap::psi_end)
      .def_readonly("min_time", &Heatmap::min_time);

  m.def(
      "hover_to_hover_heatmap",
      [](const VehicleParams& p, int n, double dist) {
        return hover_to_hover_heatmap(p, n, dist);
      },
      py::arg("params"), py::arg("n") = 9, py::arg("dist") = 6.0);

  // --- simulator ------------------------------------------------------------
  py::enum_<SimMode>(m, "SimMode")
      .value("consistent", SimMode::flatness_consistent)
      .value("full", SimMode::full_model);

  py::class_<SimOptions>(m, "SimOptions")
      .def(py::init<>())
      .def_readwrite("step", &SimOptions::step)
      .def_readwrite("mode", &SimOptions::mode)
      .def_readwrite("divergence_limit", &SimOptions::divergence_limit);

  py::class_<SimSample>(m, "SimSample")
      .def_readonly("t", &SimSample::t)
      .def_readonly("state", &SimSample::state)
      .def_readonly("input", &SimSample::input)
      .def_readonly("res_trans", &SimSample::res_trans)
      .def_readonly("res_rot", &SimSample::res_rot);

  py::class_<SimTrace>(m, "SimTrace")
      .def_readonly("samples", &SimTrace::samples)
      .def_readonly("aborted", &SimTrace::aborted)
      .def_readonly("abort_time", &SimTrace::abort_time)
      .def_readonly("max_quat_drift", &SimTrace::max_quat_drift);

  m.def("integrate_open_loop", &integrate_open_loop, py::arg("trajectory"),
        py::arg("params"), py::arg("options") = SimOptions{});

  py::class_<WindowStat>(m, "WindowStat")
      .def_readonly("t0", &WindowStat::t0)
      .def_readonly("t1", &WindowStat::t1)
      .def_readonly("max_pos_err", &WindowStat::max_pos_err)
      .def_readonly("max_att_err", &WindowStat::max_att_err);

  py::class_<RoundTrip>(m, "RoundTrip")
      .def_readonly("windows", &RoundTrip::windows)
      .def_readonly("max_pos_err", &RoundTrip::max_pos_err)
      .def_readonly("max_att_err", &RoundTrip::max_att_err)
      .def_readonly("max_quat_drift", &RoundTrip::max_quat_drift);

  m.def("windowed_round_trip", &windowed_round_trip, py::arg("trajectory"),
        py::arg("params"), py::arg("window") = 0.5,
        py::arg("options") = SimOptions{});

  py::class_<TrackingMetrics>(m, "TrackingMetrics")
      .def_readonly("duration", &TrackingMetrics::duration)
      .def_readonly("max_pos_err", &TrackingMetrics::max_pos_err)
      .def_readonly("rms_pos_err", &TrackingMetrics::rms_pos_err)
      .def_readonly("max_speed", &TrackingMetrics::max_speed)
      .def_readonly("max_load_g", &TrackingMetrics::max_load_g)
      .def_readonly("max_rate_dps", &TrackingMetrics::max_rate_dps);

  m.def("tracking_metrics", &tracking_metrics, py::arg("trace"),
        py::arg("trajectory"), py::arg("params"));

  // --- serialization ---------------------------------------------------------
  m.def("trajectory_to_json", &trajectory_json_string, py::arg("trajectory"));
  m.def("trajectory_from_json", &trajectory_from_json_string, py::arg("text"));
  m.def("trajectory_to_csv", &trajectory_csv_string, py::arg("trajectory"),
        py::arg("dt"));
  m.def("feasibility_to_json", &feasibility_json_string, py::arg("report"));
}
