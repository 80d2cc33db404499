#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "flatgen/feasibility.hpp"
#include "flatgen/maneuvers.hpp"
#include "flatgen/vehicle.hpp"

using namespace flatgen;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

VehicleParams nominal() { return load_params(FLATGEN_PARAMS_FILE); }

ManeuverRecipe reposition(double total_time = 0) {
  ManeuverRecipe r = hover_to_hover_recipe(6.0, 0.0, 0.0);
  if (total_time > 0) r.total_time = total_time;
  return r;
}
}  // namespace

TEST_CASE("a zero-speed circle check reduces to a feasible hover") {
  const VehicleParams p = nominal();
  for (CircleMode mode :
       {CircleMode::coordinated, CircleMode::knife_edge, CircleMode::rolling}) {
    const FeasibilityReport r = circle_check(3.0, 0.0, mode, p, 0.05);
    CHECK(r.feasible);
    CHECK(r.max_speed == doctest::Approx(0.0));
    CHECK(r.max_load_g == doctest::Approx(1.0));
    CHECK(r.samples > 0);
    CHECK(r.omega_peak > p.omega_min);
    CHECK(r.omega_peak < p.omega_max);
    CHECK(r.margin_omega_high > 0);
    CHECK(r.margin_omega_low > 0);
    CHECK(r.margin_flap > 0);
    CHECK_FALSE(r.first_violation.has_value());
    CHECK(r.abort_reason.empty());
  }
}

TEST_CASE("circle samples trace a closed constant-speed turn") {
  const double r = 3.0, v = 5.0;
  const double period = 2 * kPi * r / v;
  const Vec3 center(0, -r, 0);

  const FlatSample q0 = circle_sample(r, v, CircleMode::coordinated, 0.0);
  CHECK(q0.x.norm() < 1e-12);
  CHECK((q0.v - Vec3(v, 0, 0)).norm() < 1e-12);
  CHECK((q0.a - Vec3(0, -v * v / r, 0)).norm() < 1e-12);
  CHECK(q0.psi == doctest::Approx(0.0));

  const FlatSample qq = circle_sample(r, v, CircleMode::coordinated, period / 4);
  CHECK((qq.x - Vec3(r, -r, 0)).norm() < 1e-9);

  for (double t = 0; t < period; t += period / 17) {
    for (CircleMode mode : {CircleMode::coordinated, CircleMode::knife_edge,
                            CircleMode::rolling}) {
      const FlatSample q = circle_sample(r, v, mode, t);
      CHECK(q.v.norm() == doctest::Approx(v));
      CHECK(q.a.norm() == doctest::Approx(v * v / r));
      CHECK(std::abs(q.a.dot(q.v)) < 1e-9);
      CHECK((q.x - center).norm() == doctest::Approx(r));
      CHECK(q.x.z() == 0.0);
    }
  }
  const FlatSample qe = circle_sample(r, v, CircleMode::coordinated, period);
  CHECK(qe.x.norm() < 1e-9);

  // Yaw conventions: coordinated follows the heading, knife-edge holds the
  // nose at right angles to it, rolling sweeps against the turn.
  const double turn = v / r;
  const FlatSample c1 = circle_sample(r, v, CircleMode::coordinated, 0.3);
  const FlatSample k1 = circle_sample(r, v, CircleMode::knife_edge, 0.3);
  const FlatSample g1 = circle_sample(r, v, CircleMode::rolling, 0.3);
  CHECK(c1.psi == doctest::Approx(-turn * 0.3));
  CHECK(k1.psi == doctest::Approx(kPi / 2 - turn * 0.3));
  CHECK(g1.psi == doctest::Approx(turn * 0.3));
  CHECK(g1.psi_d == doctest::Approx(turn));

  CHECK_THROWS_AS(circle_sample(-1.0, v, CircleMode::coordinated, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(circle_sample(r, -1.0, CircleMode::coordinated, 0.0),
                  std::invalid_argument);
}

TEST_CASE("circle mode names round-trip and reject junk") {
  for (CircleMode m : {CircleMode::coordinated, CircleMode::knife_edge,
                       CircleMode::rolling})
    CHECK(circle_mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(circle_mode_from_string("sideways"), std::invalid_argument);
}

TEST_CASE("max circle speed orders coordinated over knife-edge over rolling") {
  const VehicleParams p = nominal();
  SpeedScanOptions opt;
  opt.v_lo = 1.0;
  opt.factor = 1.07;
  opt.bisect_rel_tol = 1e-3;
  opt.dt = 0.02;
  const double v_coord = circle_max_speed(3.0, CircleMode::coordinated, p, opt);
  const double v_knife = circle_max_speed(3.0, CircleMode::knife_edge, p, opt);
  const double v_roll = circle_max_speed(3.0, CircleMode::rolling, p, opt);
  CAPTURE(v_coord);
  CAPTURE(v_knife);
  CAPTURE(v_roll);
  CHECK(v_coord > v_knife);
  CHECK(v_knife > v_roll);
  CHECK(v_roll > 0);
}

TEST_CASE("knife-edge speed never beats the thrust-only ceiling") {
  const VehicleParams p = nominal();
  const double r = 3.0;
  const double bound =
      std::sqrt(2.0 * p.c_t * p.omega_max * p.omega_max * r / p.m);
  CHECK(knife_edge_speed_bound(r, p) == doctest::Approx(bound));

  SpeedScanOptions opt;
  opt.v_lo = 1.0;
  opt.factor = 1.05;
  opt.bisect_rel_tol = 1e-3;
  opt.dt = 0.02;
  const double v_max = circle_max_speed(r, CircleMode::knife_edge, p, opt);
  CHECK(v_max <= bound * (1 + 1e-3));
  CHECK(v_max > 0.7 * bound);
}

TEST_CASE("a gentle reposition passes the envelope check") {
  const VehicleParams p = nominal();
  const GeneratedManeuver gm = generate_maneuver(reposition(4.0), p);
  CHECK(gm.trajectory.total_time() == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(gm.scale == 1.0);
  CHECK(gm.scan.profile.empty());

  const FeasibilityReport& r = gm.report;
  CHECK(r.feasible);
  CHECK(r.total_time == doctest::Approx(4.0));
  CHECK_FALSE(r.first_violation.has_value());
  CHECK(r.abort_reason.empty());
  CHECK_FALSE(r.negative_thrust);
  CHECK(r.max_speed > 1.0);
  CHECK(r.max_load_g >= 1.0);
  CHECK(r.max_rate_dps > 0);

  // Margins restate the aggregated peaks against the envelope.
  CHECK(r.margin_omega_high == doctest::Approx(p.omega_max - r.omega_peak));
  CHECK(r.margin_omega_low == doctest::Approx(r.omega_trough - p.omega_min));
  CHECK(r.margin_flap == doctest::Approx(p.delta_max - r.flap_peak_abs));
  CHECK(r.omega_trough <= r.omega_peak);
}

TEST_CASE("a brutally short reposition trips an actuator limit") {
  const VehicleParams p = nominal();
  const GeneratedManeuver gm = generate_maneuver(reposition(0.3), p);
  const FeasibilityReport& r = gm.report;
  CHECK_FALSE(r.feasible);
  REQUIRE(r.first_violation.has_value());
  const LimitViolation& lv = *r.first_violation;
  CHECK((lv.limit == "omega_max" || lv.limit == "omega_min" ||
         lv.limit == "delta_max" || lv.limit == "transform"));
  CHECK(lv.time >= 0);
  CHECK(lv.time <= r.total_time);
  if (lv.limit == "omega_max") {
    CHECK(r.omega_peak > p.omega_max);
    CHECK(r.margin_omega_high < 0);
    CHECK(lv.value > lv.bound);
  }
}

TEST_CASE("a ballistic arc aborts the flat transform") {
  const VehicleParams p = nominal();
  // z(u) = (g/2) u^2 over one second: acceleration is exactly gravity, so
  // the required force vanishes everywhere and no attitude exists.
  Trajectory traj;
  Trajectory::Segment seg;
  seg.duration = 1.0;
  seg.coeffs(2, 2) = p.g / 2;
  traj.segments.push_back(seg);

  const FeasibilityReport r = check_trajectory(traj, p, 0.3);
  CHECK_FALSE(r.feasible);
  CHECK_FALSE(r.abort_reason.empty());
  REQUIRE(r.first_violation.has_value());
  CHECK(r.first_violation->limit == "transform");
  CHECK(r.first_violation->time == doctest::Approx(0.0));
  CHECK(r.max_load_g == doctest::Approx(0.0));
  CHECK(r.max_speed == doctest::Approx(p.g));  // v_z = g t, one second

  // Grid: 0, 0.3, 0.6, 0.9, then the endpoint.
  CHECK(r.samples == 5);
  CHECK(r.dt == doctest::Approx(0.3));

  CHECK_THROWS_AS(check_trajectory(traj, p, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(check_trajectory(traj, p, -0.1), std::invalid_argument);
}

TEST_CASE("the scale scan brackets the feasibility boundary") {
  const VehicleParams p = nominal();
  const ManeuverRecipe recipe = reposition();
  const ScaleScan scan = min_feasible_scale(recipe, p);

  REQUIRE(scan.found);
  CHECK_FALSE(scan.at_lower_bound);
  CHECK(scan.c_star > 0.05);
  REQUIRE_FALSE(scan.profile.empty());
  CHECK_FALSE(scan.profile.front().feasible);
  REQUIRE_FALSE(scan.feasible_runs.empty());
  for (const auto& [lo, hi] : scan.feasible_runs) CHECK(lo <= hi);

  // The bisected boundary sits at most one grid step below the first
  // feasible grid point.
  const double first_ok = scan.feasible_runs.front().first;
  CHECK(scan.c_star <= first_ok + 1e-12);
  CHECK(scan.c_star >= first_ok / 1.05 - 1e-12);

  // Re-solving at the reported scale really is feasible.
  const auto est = initial_time_estimate(recipe.waypoints);
  const auto topt = optimize_segment_times(recipe.waypoints, est, recipe.mu_psi);
  std::vector<double> times = topt.times;
  for (double& t : times) t *= scan.c_star;
  const Trajectory traj =
      solve_min_snap(recipe.waypoints, times, recipe.mu_psi).trajectory;
  CHECK(check_trajectory(traj, p).feasible);

  // Early-exit scan agrees on the boundary and keeps runs well-formed.
  ScanOptions quick;
  quick.full_profile = false;
  const ScaleScan fast = min_feasible_scale(recipe, p, quick);
  REQUIRE(fast.found);
  CHECK(fast.c_star == doctest::Approx(scan.c_star).epsilon(1e-12));
  CHECK(fast.profile.back().feasible);
  REQUIRE_FALSE(fast.feasible_runs.empty());
  for (const auto& [lo, hi] : fast.feasible_runs) CHECK(lo <= hi);
}

TEST_CASE("a scan starting inside the feasible region reports the floor") {
  const VehicleParams p = nominal();
  const ManeuverRecipe recipe = reposition();
  ScanOptions opt;
  opt.c_lo = 3.0;
  opt.c_hi = 6.0;
  const ScaleScan scan = min_feasible_scale(recipe, p, opt);
  REQUIRE(scan.found);
  CHECK(scan.at_lower_bound);
  CHECK(scan.c_star == doctest::Approx(3.0));
  CHECK(scan.profile.front().feasible);
}

TEST_CASE("scale scans reject malformed grids") {
  const VehicleParams p = nominal();
  const ManeuverRecipe recipe = reposition();
  ScanOptions opt;
  opt.c_lo = 0;
  CHECK_THROWS_AS(min_feasible_scale(recipe, p, opt), std::invalid_argument);
  opt = {};
  opt.c_hi = opt.c_lo;
  CHECK_THROWS_AS(min_feasible_scale(recipe, p, opt), std::invalid_argument);
  opt = {};
  opt.factor = 1.0;
  CHECK_THROWS_AS(min_feasible_scale(recipe, p, opt), std::invalid_argument);
}

TEST_CASE("generation without a fixed time lands on the scanned boundary") {
  const VehicleParams p = nominal();
  GenerateOptions opt;
  opt.dt = 0.01;
  const GeneratedManeuver gm = generate_maneuver(reposition(), p, opt);
  CHECK(gm.scan.found);
  CHECK(gm.scale == doctest::Approx(gm.scan.c_star));
  CHECK_FALSE(gm.scan.profile.empty());
  CHECK(gm.report.feasible);
  double base_total = 0;
  for (double t : gm.base_times) base_total += t;
  CHECK(gm.trajectory.total_time() ==
        doctest::Approx(gm.scale * base_total).epsilon(1e-9));
}

TEST_CASE("an impossible envelope makes generation throw") {
  VehicleParams p = nominal();
  p.delta_max = 1e-6;  // hover alone needs a visible flap trim
  ScanOptions scan;
  scan.c_lo = 0.5;
  scan.c_hi = 4.0;
  scan.factor = 1.5;
  GenerateOptions opt;
  opt.scan = scan;
  opt.dt = 0.05;
  CHECK_THROWS_AS(generate_maneuver(reposition(), p, opt), std::runtime_error);
}

TEST_CASE("the yaw heatmap is symmetric with its cheapest cell at rest") {
  const VehicleParams p = nominal();
  const int n = 3;
  const Heatmap hm = hover_to_hover_heatmap(p, n);

  REQUIRE(static_cast<int>(hm.psi_start.size()) == n);
  REQUIRE(static_cast<int>(hm.psi_end.size()) == n);
  REQUIRE(hm.min_time.rows() == n);
  REQUIRE(hm.min_time.cols() == n);
  CHECK(hm.psi_start.front() == doctest::Approx(-kPi));
  CHECK(hm.psi_start[1] == doctest::Approx(0.0));
  CHECK(hm.psi_start.back() == doctest::Approx(kPi));

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(hm.min_time(i, j) > 0);

  // No yaw change is never slower than any cell, and strictly beats a
  // half-turn of yaw.
  const double center = hm.min_time(1, 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(center <= hm.min_time(i, j) + 1e-12);
  CHECK(center < hm.min_time(1, 0));
  CHECK(center < hm.min_time(0, 1));

  // Negating both angles mirrors the grid through its center.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double a = hm.min_time(i, j);
      const double b = hm.min_time(n - 1 - i, n - 1 - j);
      CHECK(std::abs(a - b) <= 0.01 * std::max(a, b));
    }

  CHECK_THROWS_AS(hover_to_hover_heatmap(p, 1), std::invalid_argument);
}

TEST_CASE("heatmap cells ignore how many workers computed them") {
  const VehicleParams p = nominal();
  char* saved = std::getenv("FLATGEN_THREADS");
  const std::string restore = saved ? saved : "";

  setenv("FLATGEN_THREADS", "1", 1);
  CHECK(thread_count_from_env() == 1);
  const Heatmap a = hover_to_hover_heatmap(p, 3);
  setenv("FLATGEN_THREADS", "4", 1);
  CHECK(thread_count_from_env() == 4);
  const Heatmap b = hover_to_hover_heatmap(p, 3);

  CHECK((a.min_time - b.min_time).cwiseAbs().maxCoeff() == 0.0);

  setenv("FLATGEN_THREADS", "0", 1);
  CHECK(thread_count_from_env() >= 1);
  setenv("FLATGEN_THREADS", "junk", 1);
  CHECK(thread_count_from_env() >= 1);

  if (saved)
    setenv("FLATGEN_THREADS", restore.c_str(), 1);
  else
    unsetenv("FLATGEN_THREADS");
}
