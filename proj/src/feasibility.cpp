#include "flatgen/feasibility.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <thread>

#include "flatgen/flatness.hpp"
#include "flatgen/rotations.hpp"

namespace flatgen {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Near-limit advisory threshold: within 5% of the envelope span.
constexpr double kNearLimitFrac = 0.05;

std::vector<double> sample_grid(double total, double dt) {
  std::vector<double> ts;
  const int n = static_cast<int>(std::floor(total / dt + 1e-9));
  ts.reserve(n + 2);
  for (int k = 0; k <= n; ++k) ts.push_back(k * dt);
  if (ts.back() < total - 1e-9 * std::max(1.0, total)) ts.push_back(total);
  return ts;
}

// Shared accumulation for both polynomial and analytic sample streams.
class EnvelopeScan {
 public:
  EnvelopeScan(const VehicleParams& p, double dt) : p_(p) {
    report_.dt = dt;
    report_.omega_trough = std::numeric_limits<double>::infinity();
    report_.margin_omega_high = std::numeric_limits<double>::infinity();
    report_.margin_omega_low = std::numeric_limits<double>::infinity();
    report_.margin_flap = std::numeric_limits<double>::infinity();
  }

  void add(const FlatSample& q, BranchState& branch) {
    ++report_.samples;
    try {
      const FlatnessIntermediates im = flat_intermediates(q, p_, branch);
      report_.max_rate_dps =
          std::max(report_.max_rate_dps, im.omega.norm() * 180.0 / kPi);
      const InputSolution sol =
          inputs_from_moment(im.moment, im.thrust, im.v_alpha, im.speed, p_);
      const double w_hi = std::max(sol.omega1, sol.omega2);
      const double w_lo = std::min(sol.omega1, sol.omega2);
      const double d_abs = std::max(std::abs(sol.delta1), std::abs(sol.delta2));
      report_.omega_peak = std::max(report_.omega_peak, w_hi);
      report_.omega_trough = std::min(report_.omega_trough, w_lo);
      report_.flap_peak_abs = std::max(report_.flap_peak_abs, d_abs);
      report_.negative_thrust |= sol.negative_thrust;
      check_limit(q.t, "omega_max", w_hi, p_.omega_max, w_hi > p_.omega_max);
      check_limit(q.t, "omega_min", w_lo, p_.omega_min, w_lo < p_.omega_min);
      check_limit(q.t, "delta_max", d_abs, p_.delta_max, d_abs > p_.delta_max);
    } catch (const TransformError& e) {
      if (report_.abort_reason.empty()) {
        report_.abort_reason = e.what();
        if (!report_.first_violation)
          report_.first_violation = LimitViolation{q.t, "transform", 0, 0};
      }
    }
    report_.max_speed = std::max(report_.max_speed, q.v.norm());
    report_.max_load_g =
        std::max(report_.max_load_g, (q.a - p_.g * Vec3(0, 0, 1)).norm() / p_.g);
  }

  FeasibilityReport finish(double total_time) {
    report_.total_time = total_time;
    report_.feasible = !report_.first_violation && report_.abort_reason.empty();
    report_.margin_omega_high = p_.omega_max - report_.omega_peak;
    report_.margin_omega_low = report_.omega_trough - p_.omega_min;
    report_.margin_flap = p_.delta_max - report_.flap_peak_abs;
    const double w_span = p_.omega_max - p_.omega_min;
    report_.near_limit =
        report_.feasible &&
        (report_.margin_omega_high < kNearLimitFrac * w_span ||
         report_.margin_omega_low < kNearLimitFrac * w_span ||
         report_.margin_flap < kNearLimitFrac * p_.delta_max);
    return report_;
  }

 private:
  void check_limit(double t, const char* name, double value, double bound,
                   bool violated) {
    if (violated && !report_.first_violation)
      report_.first_violation = LimitViolation{t, name, value, bound};
  }

  const VehicleParams& p_;
  FeasibilityReport report_;
};

}  // namespace

FeasibilityReport check_trajectory(const Trajectory& traj,
                                   const VehicleParams& p, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("sampling interval must be positive");
  const double total = traj.total_time();
  EnvelopeScan scan(p, dt);
  BranchState branch;
  for (double t : sample_grid(total, dt)) scan.add(sample_flat(traj, t), branch);
  return scan.finish(total);
}

namespace {

struct ScaledProblem {
  const std::vector<Waypoint>& wps;
  const std::vector<double>& base_times;
  double mu_psi;
  const VehicleParams& p;
  double dt;

  bool feasible_at(double c) const {
    std::vector<double> times = base_times;
    for (double& t : times) t *= c;
    try {
      const SolveResult sol = solve_min_snap(wps, times, mu_psi);
      return check_trajectory(sol.trajectory, p, dt).feasible;
    } catch (const std::exception&) {
      return false;
    }
  }
};

}  // namespace

ScaleScan scan_scale(const std::vector<Waypoint>& wps,
                     const std::vector<double>& base_times, double mu_psi,
                     const VehicleParams& p, const ScanOptions& opt) {
  if (!(opt.c_lo > 0) || !(opt.c_hi > opt.c_lo) || !(opt.factor > 1))
    throw std::invalid_argument("scale scan: invalid grid options");
  const ScaledProblem prob{wps, base_times, mu_psi, p, opt.dt};

  ScaleScan out;
  double prev_c = 0;
  bool run_open = false;
  double run_lo = 0;
  for (double c = opt.c_lo;; c *= opt.factor) {
    const bool last = c >= opt.c_hi;
    if (last) c = opt.c_hi;
    const bool ok = prob.feasible_at(c);
    out.profile.push_back({c, ok});
    if (ok && !run_open) {
      run_open = true;
      run_lo = c;
    } else if (!ok && run_open) {
      out.feasible_runs.emplace_back(run_lo, prev_c);
      run_open = false;
    }
    if (ok && !out.found) {
      out.found = true;
      if (out.profile.size() == 1) {
        out.at_lower_bound = true;
        out.c_star = c;
      } else {
        // Bisect the infeasible/feasible boundary just below.
        double lo = prev_c, hi = c;
        while ((hi - lo) / hi > opt.bisect_rel_tol) {
          const double mid = 0.5 * (lo + hi);
          if (prob.feasible_at(mid))
            hi = mid;
          else
            lo = mid;
        }
        out.c_star = hi;
      }
      if (!opt.full_profile) {
        // Close the run at the point that stopped the scan.
        out.feasible_runs.emplace_back(run_lo, c);
        run_open = false;
        break;
      }
    }
    prev_c = c;
    if (last) break;
  }
  if (run_open) out.feasible_runs.emplace_back(run_lo, prev_c);
  return out;
}

ScaleScan min_feasible_scale(const ManeuverRecipe& recipe,
                             const VehicleParams& p, const ScanOptions& opt) {
  const std::vector<double> est = initial_time_estimate(recipe.waypoints);
  const TimeOptResult topt =
      optimize_segment_times(recipe.waypoints, est, recipe.mu_psi);
  return scan_scale(recipe.waypoints, topt.times, recipe.mu_psi, p, opt);
}

GeneratedManeuver generate_maneuver(const ManeuverRecipe& recipe,
                                    const VehicleParams& p,
                                    const GenerateOptions& opt) {
  GeneratedManeuver out;
  std::vector<double> est = initial_time_estimate(recipe.waypoints, opt.v_nominal);
  if (recipe.total_time) {
    // Fixed duration: honour it exactly, just redistribute.
    const double sum = std::accumulate(est.begin(), est.end(), 0.0);
    for (double& t : est) t *= *recipe.total_time / sum;
  }
  const TimeOptResult topt =
      optimize_segment_times(recipe.waypoints, est, recipe.mu_psi, opt.time_opt);
  out.base_times = topt.times;

  if (!recipe.total_time) {
    ScanOptions scan_opt = opt.scan;
    scan_opt.dt = opt.dt;
    out.scan = scan_scale(recipe.waypoints, out.base_times, recipe.mu_psi, p,
                          scan_opt);
    if (!out.scan.found)
      throw std::runtime_error("no feasible time scale found for maneuver `" +
                               recipe.name + "`");
    out.scale = out.scan.c_star;
  }

  std::vector<double> times = out.base_times;
  for (double& t : times) t *= out.scale;
  out.trajectory = solve_min_snap(recipe.waypoints, times, recipe.mu_psi).trajectory;
  out.report = check_trajectory(out.trajectory, p, opt.dt);
  return out;
}

CircleMode circle_mode_from_string(const std::string& s) {
  if (s == "coordinated") return CircleMode::coordinated;
  if (s == "knife_edge") return CircleMode::knife_edge;
  if (s == "rolling") return CircleMode::rolling;
  throw std::invalid_argument("unknown circle mode: " + s);
}

std::string to_string(CircleMode m) {
  switch (m) {
    case CircleMode::coordinated: return "coordinated";
    case CircleMode::knife_edge: return "knife_edge";
    case CircleMode::rolling: return "rolling";
  }
  return "?";
}

FlatSample circle_sample(double r, double v, CircleMode mode, double t) {
  if (!(r > 0)) throw std::invalid_argument("circle radius must be positive");
  if (v < 0) throw std::invalid_argument("circle speed must be non-negative");
  const double turn = v / r;  // yaw-plane angular speed, clockwise path
  const Mat3 rot = rot_z(-turn * t);
  FlatSample q;
  q.t = t;
  q.x = Vec3(0, -r, 0) + rot * Vec3(0, r, 0);
  q.v = rot * Vec3(v, 0, 0);
  q.a = rot * Vec3(0, -turn * v, 0);
  q.j = rot * Vec3(-turn * turn * v, 0, 0);
  q.s = rot * Vec3(0, std::pow(turn, 3) * v, 0);
  switch (mode) {
    case CircleMode::coordinated:
      q.psi = -turn * t;
      q.psi_d = -turn;
      break;
    case CircleMode::knife_edge:
      q.psi = kPi / 2 - turn * t;
      q.psi_d = -turn;
      break;
    case CircleMode::rolling:
      q.psi = turn * t;
      q.psi_d = turn;
      break;
  }
  q.psi_dd = 0;
  return q;
}

FeasibilityReport circle_check(double r, double v, CircleMode mode,
                               const VehicleParams& p, double dt) {
  EnvelopeScan scan(p, dt);
  BranchState branch;
  // Vanishing speed degenerates to a hover check at the mode's initial yaw.
  const double period = v < 1e-9 ? 1.0 : 2.0 * kPi * r / v;
  for (double t : sample_grid(period, dt))
    scan.add(circle_sample(r, v, mode, t), branch);
  return scan.finish(period);
}

double circle_max_speed(double r, CircleMode mode, const VehicleParams& p,
                        const SpeedScanOptions& opt) {
  auto ok = [&](double v) { return circle_check(r, v, mode, p, opt.dt).feasible; };
  double best = -1;
  double prev = 0;
  for (double v = opt.v_lo;; v *= opt.factor) {
    const bool last = v >= opt.v_hi;
    if (last) v = opt.v_hi;
    if (ok(v)) {
      best = v;
    } else if (best >= 0 && prev == best) {
      // First infeasible point right above the best feasible one: bisect.
      double lo = best, hi = v;
      while ((hi - lo) / hi > opt.bisect_rel_tol) {
        const double mid = 0.5 * (lo + hi);
        if (ok(mid))
          lo = mid;
        else
          hi = mid;
      }
      return lo;
    }
    prev = v;
    if (last) break;
  }
  if (best < 0)
    throw std::runtime_error("no feasible circle speed found in scan range");
  return best;
}

double knife_edge_speed_bound(double r, const VehicleParams& p) {
  return std::sqrt(2.0 * p.c_t * p.omega_max * p.omega_max * r / p.m);
}

int thread_count_from_env() {
  if (const char* env = std::getenv("FLATGEN_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

Heatmap hover_to_hover_heatmap(const VehicleParams& p, int n, double dist,
                               const ScanOptions& scan) {
  if (n < 2) throw std::invalid_argument("heatmap grid must be at least 2x2");
  Heatmap hm;
  hm.psi_start.resize(n);
  hm.psi_end.resize(n);
  for (int i = 0; i < n; ++i) {
    const double a = -kPi + 2.0 * kPi * i / (n - 1);
    hm.psi_start[i] = a;
    hm.psi_end[i] = a;
  }
  hm.min_time = Eigen::MatrixXd::Constant(n, n, -1.0);

  ScanOptions cell_scan = scan;
  cell_scan.full_profile = false;  // cells only need the boundary

  std::atomic<int> next{0};
  const int cells = n * n;
  auto worker = [&]() {
    for (int idx = next.fetch_add(1); idx < cells; idx = next.fetch_add(1)) {
      const int i = idx / n, j = idx % n;
      const ManeuverRecipe recipe =
          hover_to_hover_recipe(dist, hm.psi_start[i], hm.psi_end[j]);
      const ScaleScan result = min_feasible_scale(recipe, p, cell_scan);
      const double base = initial_time_estimate(recipe.waypoints)[0];
      hm.min_time(i, j) = result.found ? result.c_star * base : -1.0;
    }
  };
  const int n_threads = std::min(thread_count_from_env(), cells);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return hm;
}

}  // namespace flatgen
