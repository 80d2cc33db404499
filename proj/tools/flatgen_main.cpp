// flatgen: trajectory generation, feasibility checking and open-loop
// playback for a tailsitter flying wing.
//
// Exit codes: 0 success (and feasible, where that applies), 1 infeasible,
// 2 bad usage or bad input files.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "flatgen/feasibility.hpp"
#include "flatgen/io.hpp"
#include "flatgen/maneuvers.hpp"
#include "flatgen/minsnap.hpp"
#include "flatgen/simulator.hpp"
#include "flatgen/vehicle.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitUsage = 2;

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options shared by `generate` and `simulate`: where the waypoint problem
// comes from and how its timing is pinned.
struct RecipeArgs {
  std::string maneuver;
  std::string recipe_path;
  double dist = 6.0;
  double psi_start = 0.0;
  double psi_end = 0.0;
  std::optional<double> total_time;
  std::optional<double> mu_psi;
};

void add_recipe_options(CLI::App& cmd, RecipeArgs& args) {
  auto* man = cmd.add_option("--maneuver", args.maneuver,
                             "built-in maneuver name (see `flatgen list`)");
  auto* rec = cmd.add_option("--recipe", args.recipe_path,
                             "waypoint recipe JSON file");
  man->excludes(rec);
  rec->excludes(man);
  cmd.add_option("--dist", args.dist,
                 "hover_to_hover travel distance [m]")
      ->capture_default_str();
  cmd.add_option("--psi-start", args.psi_start,
                 "hover_to_hover initial yaw [rad]")
      ->capture_default_str();
  cmd.add_option("--psi-end", args.psi_end,
                 "hover_to_hover final yaw [rad]")
      ->capture_default_str();
  cmd.add_option("--time", args.total_time,
                 "fix the total duration [s] instead of minimizing it");
  cmd.add_option("--mu-psi", args.mu_psi,
                 "override the yaw-smoothness weight");
}

flatgen::ManeuverRecipe resolve_recipe(const RecipeArgs& args) {
  flatgen::ManeuverRecipe recipe;
  if (!args.recipe_path.empty()) {
    recipe = flatgen::load_recipe(args.recipe_path);
  } else if (args.maneuver == "hover_to_hover") {
    recipe = flatgen::hover_to_hover_recipe(args.dist, args.psi_start,
                                            args.psi_end);
  } else if (!args.maneuver.empty()) {
    recipe = flatgen::make_builtin(args.maneuver);
  } else {
    throw CLI::ValidationError("one of --maneuver or --recipe is required");
  }
  if (args.total_time) recipe.total_time = *args.total_time;
  if (args.mu_psi) recipe.mu_psi = *args.mu_psi;
  return recipe;
}

void print_report_line(const flatgen::FeasibilityReport& r,
                       std::FILE* to = stdout) {
  std::fprintf(to,
               "%s: duration %.3f s, peak speed %.2f m/s, load %.2f g, "
               "rate %.0f deg/s, prop [%.0f, %.0f] rad/s, |flap| %.3f rad\n",
               r.feasible ? "feasible" : "infeasible", r.total_time,
               r.max_speed, r.max_load_g, r.max_rate_dps, r.omega_trough,
               r.omega_peak, r.flap_peak_abs);
  if (!r.feasible) {
    if (!r.abort_reason.empty()) {
      std::fprintf(to, "  aborted: %s\n", r.abort_reason.c_str());
    } else if (r.first_violation) {
      std::fprintf(to, "  first violation at t=%.3f s: %s = %.4g (bound %.4g)\n",
                   r.first_violation->time, r.first_violation->limit.c_str(),
                   r.first_violation->value, r.first_violation->bound);
    }
  }
}

int run_generate(const std::string& params_path, const RecipeArgs& rargs,
                 const std::string& out_prefix, double dt) {
  const flatgen::VehicleParams p = flatgen::load_params(params_path);
  const flatgen::ManeuverRecipe recipe = resolve_recipe(rargs);

  flatgen::GenerateOptions opt;
  opt.dt = dt;
  flatgen::GeneratedManeuver gen;
  try {
    gen = flatgen::generate_maneuver(recipe, p, opt);
  } catch (const std::runtime_error& e) {
    throw InfeasibleError(e.what());
  }

  flatgen::write_trajectory_csv(out_prefix + ".csv", gen.trajectory, dt);
  flatgen::write_trajectory_json(out_prefix + ".traj.json", gen.trajectory);
  flatgen::write_feasibility_json(out_prefix + ".report.json", gen.report);
  if (!recipe.total_time)
    flatgen::write_scale_scan_json(out_prefix + ".scan.json", gen.scan);

  std::printf("%s: %zu segments, scale %.4f\n", recipe.name.c_str(),
              gen.trajectory.segments.size(), gen.scale);
  print_report_line(gen.report);
  return gen.report.feasible ? kExitOk : kExitInfeasible;
}

int run_check(const std::string& params_path, const std::string& traj_path,
              double circle_radius, double circle_speed,
              const std::string& circle_mode, bool circle_max,
              const std::string& out_path, double dt) {
  const flatgen::VehicleParams p = flatgen::load_params(params_path);

  if (circle_max) {
    const flatgen::CircleMode mode =
        flatgen::circle_mode_from_string(circle_mode);
    flatgen::SpeedScanOptions sopt;
    sopt.dt = dt;
    const double v_max =
        flatgen::circle_max_speed(circle_radius, mode, p, sopt);
    std::ostringstream os;
    os << "{\n  \"radius_m\": " << circle_radius << ",\n  \"mode\": \""
       << circle_mode << "\",\n  \"max_speed_mps\": " << v_max;
    if (mode == flatgen::CircleMode::knife_edge)
      os << ",\n  \"thrust_only_bound_mps\": "
         << flatgen::knife_edge_speed_bound(circle_radius, p);
    os << "\n}\n";
    if (out_path.empty()) {
      std::fputs(os.str().c_str(), stdout);
    } else {
      std::ofstream f(out_path);
      f << os.str();
    }
    return kExitOk;
  }

  flatgen::FeasibilityReport report;
  if (!traj_path.empty()) {
    report = flatgen::check_trajectory(flatgen::load_trajectory(traj_path), p,
                                       dt);
  } else {
    const flatgen::CircleMode mode =
        flatgen::circle_mode_from_string(circle_mode);
    report = flatgen::circle_check(circle_radius, circle_speed, mode, p, dt);
  }
  if (out_path.empty()) {
    // Keep stdout machine-readable: the JSON owns it, the summary moves to
    // stderr.
    std::fputs(flatgen::feasibility_json_string(report).c_str(), stdout);
    print_report_line(report, stderr);
  } else {
    flatgen::write_feasibility_json(out_path, report);
    print_report_line(report);
  }
  return report.feasible ? kExitOk : kExitInfeasible;
}

int run_heatmap(const std::string& params_path, int grid, double dist,
                const std::string& out_path) {
  const flatgen::VehicleParams p = flatgen::load_params(params_path);
  const flatgen::Heatmap hm = flatgen::hover_to_hover_heatmap(p, grid, dist);
  flatgen::write_heatmap_csv(out_path, hm);

  double best = hm.min_time(0, 0), worst = hm.min_time(0, 0);
  for (int i = 0; i < hm.min_time.rows(); ++i)
    for (int j = 0; j < hm.min_time.cols(); ++j) {
      const double t = hm.min_time(i, j);
      if (t < 0) continue;
      best = std::min(best, t);
      worst = std::max(worst, t);
    }
  std::printf("heatmap %dx%d over [-pi, pi]^2, %.1f m: min %.3f s, max %.3f s\n",
              grid, grid, dist, best, worst);
  return kExitOk;
}

int run_simulate(const std::string& params_path, const RecipeArgs& rargs,
                 const std::string& out_prefix, double dt, double step,
                 const std::string& mode, double window) {
  const flatgen::VehicleParams p = flatgen::load_params(params_path);
  const flatgen::ManeuverRecipe recipe = resolve_recipe(rargs);

  flatgen::GenerateOptions gopt;
  gopt.dt = dt;
  flatgen::GeneratedManeuver gen;
  try {
    gen = flatgen::generate_maneuver(recipe, p, gopt);
  } catch (const std::runtime_error& e) {
    throw InfeasibleError(e.what());
  }
  if (!gen.report.feasible) {
    print_report_line(gen.report);
    return kExitInfeasible;
  }

  flatgen::SimOptions sopt;
  sopt.step = step;
  sopt.mode = flatgen::sim_mode_from_string(mode);

  const flatgen::SimTrace trace =
      flatgen::integrate_open_loop(gen.trajectory, p, sopt);
  const flatgen::TrackingMetrics metrics =
      flatgen::tracking_metrics(trace, gen.trajectory, p);
  flatgen::write_trace_csv(out_prefix + ".trace.csv", trace);
  flatgen::write_metrics_json(out_prefix + ".metrics.json", metrics);

  std::printf("open loop over %.3f s (%s model): max pos err %.4f m, "
              "rms %.4f m%s\n",
              metrics.duration, mode.c_str(), metrics.max_pos_err,
              metrics.rms_pos_err, trace.aborted ? " [diverged]" : "");

  if (window > 0) {
    const flatgen::RoundTrip rt =
        flatgen::windowed_round_trip(gen.trajectory, p, window, sopt);
    std::printf("windowed (%.2f s windows): max pos err %.3g m, "
                "max att err %.3g rad over %zu windows\n",
                window, rt.max_pos_err, rt.max_att_err, rt.windows.size());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Aerobatic trajectory toolkit for a tailsitter flying wing.\n"
      "World frame is north-east-down: z is positive downward."};
  app.require_subcommand(1);

  std::string params_path;
  app.add_option("--params", params_path, "vehicle parameter file")
      ->required()
      ->check(CLI::ExistingFile);

  // --- generate ---------------------------------------------------------
  auto* gen_cmd = app.add_subcommand(
      "generate", "solve a maneuver and write trajectory + report");
  RecipeArgs gen_recipe;
  add_recipe_options(*gen_cmd, gen_recipe);
  std::string gen_out;
  double gen_dt = 5e-3;
  gen_cmd->add_option("--out", gen_out, "output path prefix")->required();
  gen_cmd->add_option("--dt", gen_dt, "sampling step for CSV and checks [s]")
      ->capture_default_str();

  // --- check ------------------------------------------------------------
  auto* chk_cmd = app.add_subcommand(
      "check", "feasibility of a stored trajectory or an analytic circle");
  std::string chk_traj, chk_out, chk_mode = "coordinated";
  double chk_radius = 3.0, chk_speed = 5.0, chk_dt = 5e-3;
  bool chk_max = false;
  chk_cmd->add_option("--traj", chk_traj, "trajectory JSON to check")
      ->check(CLI::ExistingFile);
  chk_cmd->add_option("--circle-radius", chk_radius, "circle radius [m]")
      ->capture_default_str();
  chk_cmd->add_option("--circle-speed", chk_speed, "circle speed [m/s]")
      ->capture_default_str();
  chk_cmd
      ->add_option("--circle-mode", chk_mode,
                   "coordinated | knife_edge | rolling")
      ->capture_default_str();
  chk_cmd->add_flag("--circle-max", chk_max,
                    "scan for the largest feasible circle speed");
  chk_cmd->add_option("--out", chk_out, "report path (stdout when omitted)");
  chk_cmd->add_option("--dt", chk_dt, "sampling step [s]")
      ->capture_default_str();

  // --- heatmap ----------------------------------------------------------
  auto* hm_cmd = app.add_subcommand(
      "heatmap", "hover-to-hover minimum-time map over start/end yaw");
  std::string hm_out;
  int hm_grid = 21;
  double hm_dist = 6.0;
  hm_cmd->add_option("--out", hm_out, "output CSV path")->required();
  hm_cmd->add_option("--grid", hm_grid, "grid points per axis")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  hm_cmd->add_option("--dist", hm_dist, "reposition distance [m]")
      ->capture_default_str();

  // --- simulate ---------------------------------------------------------
  auto* sim_cmd = app.add_subcommand(
      "simulate", "generate a maneuver and play it back open loop");
  RecipeArgs sim_recipe;
  add_recipe_options(*sim_cmd, sim_recipe);
  std::string sim_out, sim_mode = "consistent";
  double sim_dt = 5e-3, sim_step = 1e-3, sim_window = 0.5;
  sim_cmd->add_option("--out", sim_out, "output path prefix")->required();
  sim_cmd->add_option("--dt", sim_dt, "generation sampling step [s]")
      ->capture_default_str();
  sim_cmd->add_option("--step", sim_step, "integrator step [s]")
      ->capture_default_str();
  sim_cmd->add_option("--mode", sim_mode, "consistent | full")
      ->capture_default_str();
  sim_cmd
      ->add_option("--window", sim_window,
                   "round-trip window length [s]; 0 disables")
      ->capture_default_str();

  // --- list -------------------------------------------------------------
  auto* list_cmd = app.add_subcommand("list", "print built-in maneuver names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*list_cmd) {
      for (const std::string& n : flatgen::builtin_maneuver_names())
        std::printf("%s\n", n.c_str());
      return kExitOk;
    }
    if (*gen_cmd) return run_generate(params_path, gen_recipe, gen_out, gen_dt);
    if (*chk_cmd)
      return run_check(params_path, chk_traj, chk_radius, chk_speed, chk_mode,
                       chk_max, chk_out, chk_dt);
    if (*hm_cmd) return run_heatmap(params_path, hm_grid, hm_dist, hm_out);
    if (*sim_cmd)
      return run_simulate(params_path, sim_recipe, sim_out, sim_dt, sim_step,
                          sim_mode, sim_window);
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
