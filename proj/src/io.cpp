#include "flatgen/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace flatgen {

namespace {

using nlohmann::json;

// Shortest-exact double formatting (%.17g round-trips; trailing precision
// noise is acceptable, bytes just have to be reproducible).
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void dump(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write file: " + path);
  f << text;
}

json violation_json(const std::optional<LimitViolation>& v) {
  if (!v) return nullptr;
  json j;
  j["time"] = v->time;
  j["limit"] = v->limit;
  j["value"] = v->value;
  j["bound"] = v->bound;
  return j;
}

}  // namespace

std::string trajectory_csv_string(const Trajectory& traj, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("csv sampling step must be positive");
  std::ostringstream out;
  out << "t,x,y,z,psi,vx,vy,vz,psi_d,ax,ay,az,jx,jy,jz,sx,sy,sz,psi_dd\n";
  const double total = traj.total_time();
  const int n = static_cast<int>(std::floor(total / dt + 1e-9));
  auto row = [&](double t) {
    const FlatSample q = sample_flat(traj, t);
    out << num(t) << ',' << num(q.x.x()) << ',' << num(q.x.y()) << ','
        << num(q.x.z()) << ',' << num(q.psi) << ',' << num(q.v.x()) << ','
        << num(q.v.y()) << ',' << num(q.v.z()) << ',' << num(q.psi_d) << ','
        << num(q.a.x()) << ',' << num(q.a.y()) << ',' << num(q.a.z()) << ','
        << num(q.j.x()) << ',' << num(q.j.y()) << ',' << num(q.j.z()) << ','
        << num(q.s.x()) << ',' << num(q.s.y()) << ',' << num(q.s.z()) << ','
        << num(q.psi_dd) << '\n';
  };
  for (int k = 0; k <= n; ++k) row(k * dt);
  if (n * dt < total - 1e-9 * std::max(1.0, total)) row(total);
  return out.str();
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          double dt) {
  dump(path, trajectory_csv_string(traj, dt));
}

std::string trajectory_json_string(const Trajectory& traj) {
  json j;
  j["degree"] = 9;
  j["channels"] = {"x", "y", "z", "psi"};
  j["segments"] = json::array();
  for (const auto& seg : traj.segments) {
    json js;
    js["duration"] = seg.duration;
    json coeffs = json::array();
    for (int ch = 0; ch < 4; ++ch) {
      json row = json::array();
      for (int k = 0; k < 10; ++k) row.push_back(seg.coeffs(ch, k));
      coeffs.push_back(row);
    }
    js["coeffs"] = coeffs;
    j["segments"].push_back(js);
  }
  return j.dump(2) + "\n";
}

void write_trajectory_json(const std::string& path, const Trajectory& traj) {
  dump(path, trajectory_json_string(traj));
}

Trajectory trajectory_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("trajectory: invalid JSON: ") +
                                e.what());
  }
  if (j.value("degree", 0) != 9)
    throw std::invalid_argument("trajectory: unsupported polynomial degree");
  Trajectory traj;
  for (const auto& js : j.at("segments")) {
    Trajectory::Segment seg;
    seg.duration = js.at("duration").get<double>();
    if (!(seg.duration > 0))
      throw std::invalid_argument("trajectory: non-positive segment duration");
    const auto& coeffs = js.at("coeffs");
    if (coeffs.size() != 4)
      throw std::invalid_argument("trajectory: expected 4 channels");
    for (int ch = 0; ch < 4; ++ch) {
      if (coeffs[ch].size() != 10)
        throw std::invalid_argument("trajectory: expected 10 coefficients");
      for (int k = 0; k < 10; ++k)
        seg.coeffs(ch, k) = coeffs[ch][k].get<double>();
    }
    traj.segments.push_back(seg);
  }
  if (traj.segments.empty())
    throw std::invalid_argument("trajectory: no segments");
  return traj;
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open trajectory file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return trajectory_from_json_string(ss.str());
}

std::string feasibility_json_string(const FeasibilityReport& r) {
  json j;
  j["feasible"] = r.feasible;
  j["dt"] = r.dt;
  j["samples"] = r.samples;
  j["total_time"] = r.total_time;
  j["omega_peak"] = r.omega_peak;
  j["omega_trough"] = r.omega_trough;
  j["flap_peak_abs"] = r.flap_peak_abs;
  j["margin_omega_high"] = r.margin_omega_high;
  j["margin_omega_low"] = r.margin_omega_low;
  j["margin_flap"] = r.margin_flap;
  j["negative_thrust"] = r.negative_thrust;
  j["near_limit"] = r.near_limit;
  j["abort_reason"] = r.abort_reason;
  j["first_violation"] = violation_json(r.first_violation);
  j["max_speed_mps"] = r.max_speed;
  j["max_load_g"] = r.max_load_g;
  j["max_rate_dps"] = r.max_rate_dps;
  return j.dump(2) + "\n";
}

void write_feasibility_json(const std::string& path,
                            const FeasibilityReport& report) {
  dump(path, feasibility_json_string(report));
}

std::string heatmap_csv_string(const Heatmap& hm) {
  std::ostringstream out;
  out << "psi_start/psi_end";
  for (double e : hm.psi_end) out << ',' << num(e);
  out << '\n';
  for (size_t i = 0; i < hm.psi_start.size(); ++i) {
    out << num(hm.psi_start[i]);
    for (int j = 0; j < hm.min_time.cols(); ++j)
      out << ',' << num(hm.min_time(static_cast<int>(i), j));
    out << '\n';
  }
  return out.str();
}

void write_heatmap_csv(const std::string& path, const Heatmap& hm) {
  dump(path, heatmap_csv_string(hm));
}

std::string trace_csv_string(const SimTrace& trace) {
  std::ostringstream out;
  out << "t,x,y,z,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,omega1,omega2,delta1,delta2,"
         "res_trans,res_rot\n";
  for (const auto& s : trace.samples) {
    out << num(s.t) << ',' << num(s.state.x.x()) << ',' << num(s.state.x.y())
        << ',' << num(s.state.x.z()) << ',' << num(s.state.v.x()) << ','
        << num(s.state.v.y()) << ',' << num(s.state.v.z()) << ','
        << num(s.state.q.w()) << ',' << num(s.state.q.x()) << ','
        << num(s.state.q.y()) << ',' << num(s.state.q.z()) << ','
        << num(s.state.omega.x()) << ',' << num(s.state.omega.y()) << ','
        << num(s.state.omega.z()) << ',' << num(s.input.omega1) << ','
        << num(s.input.omega2) << ',' << num(s.input.delta1) << ','
        << num(s.input.delta2) << ',' << num(s.res_trans) << ','
        << num(s.res_rot) << '\n';
  }
  return out.str();
}

void write_trace_csv(const std::string& path, const SimTrace& trace) {
  dump(path, trace_csv_string(trace));
}

std::string metrics_json_string(const TrackingMetrics& m) {
  json j;
  j["duration"] = m.duration;
  j["max_pos_err_m"] = m.max_pos_err;
  j["rms_pos_err_m"] = m.rms_pos_err;
  j["max_speed_mps"] = m.max_speed;
  j["max_load_g"] = m.max_load_g;
  j["max_rate_dps"] = m.max_rate_dps;
  return j.dump(2) + "\n";
}

void write_metrics_json(const std::string& path, const TrackingMetrics& m) {
  dump(path, metrics_json_string(m));
}

std::string scale_scan_json_string(const ScaleScan& scan) {
  json j;
  j["found"] = scan.found;
  j["c_star"] = scan.c_star;
  j["at_lower_bound"] = scan.at_lower_bound;
  json profile = json::array();
  for (const auto& p : scan.profile) {
    json jp;
    jp["c"] = p.c;
    jp["feasible"] = p.feasible;
    profile.push_back(jp);
  }
  j["profile"] = profile;
  json runs = json::array();
  for (const auto& r : scan.feasible_runs)
    runs.push_back(json::array({r.first, r.second}));
  j["feasible_runs"] = runs;
  return j.dump(2) + "\n";
}

void write_scale_scan_json(const std::string& path, const ScaleScan& scan) {
  dump(path, scale_scan_json_string(scan));
}

}  // namespace flatgen
