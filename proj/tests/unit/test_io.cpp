#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "flatgen/io.hpp"
#include "flatgen/maneuvers.hpp"
#include "flatgen/vehicle.hpp"

using namespace flatgen;
using nlohmann::json;

namespace {

VehicleParams nominal() { return load_params(FLATGEN_PARAMS_FILE); }

Trajectory two_segment_trajectory() {
  Waypoint mid;
  mid.position = Vec3(3, 1, -1);
  mid.yaw = 0.4;
  const std::vector<Waypoint> wps = {Waypoint::rest({0, 0, 0}, 0.0), mid,
                                     Waypoint::rest({6, 0, -2}, 0.8)};
  return solve_min_snap(wps, {1.3, 1.7}).trajectory;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("trajectory JSON round-trips coefficients exactly") {
  const Trajectory traj = two_segment_trajectory();
  const std::string text = trajectory_json_string(traj);
  const Trajectory back = trajectory_from_json_string(text);

  REQUIRE(back.segments.size() == traj.segments.size());
  for (size_t s = 0; s < traj.segments.size(); ++s) {
    CHECK(back.segments[s].duration == traj.segments[s].duration);
    CHECK((back.segments[s].coeffs - traj.segments[s].coeffs)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  const json j = json::parse(text);
  CHECK(j.at("degree") == 9);
  CHECK(j.at("channels") == json({"x", "y", "z", "psi"}));

  const auto path =
      std::filesystem::temp_directory_path() / "flatgen_io_roundtrip.traj.json";
  write_trajectory_json(path.string(), traj);
  const Trajectory loaded = load_trajectory(path.string());
  CHECK(loaded.segments.size() == traj.segments.size());
  CHECK(loaded.total_time() == traj.total_time());
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_trajectory("/no/such/file.traj.json"),
                  std::invalid_argument);
}

TEST_CASE("malformed trajectory JSON is rejected") {
  const std::string good = trajectory_json_string(two_segment_trajectory());

  CHECK_THROWS_AS(trajectory_from_json_string("not json"),
                  std::invalid_argument);

  json j = json::parse(good);
  j["degree"] = 7;
  CHECK_THROWS_AS(trajectory_from_json_string(j.dump()), std::invalid_argument);

  j = json::parse(good);
  j.erase("degree");
  CHECK_THROWS_AS(trajectory_from_json_string(j.dump()), std::invalid_argument);

  j = json::parse(good);
  j["segments"][0]["duration"] = 0.0;
  CHECK_THROWS_AS(trajectory_from_json_string(j.dump()), std::invalid_argument);

  j = json::parse(good);
  j["segments"][0]["coeffs"].erase(3);
  CHECK_THROWS_AS(trajectory_from_json_string(j.dump()), std::invalid_argument);

  j = json::parse(good);
  j["segments"][0]["coeffs"][2].erase(9);
  CHECK_THROWS_AS(trajectory_from_json_string(j.dump()), std::invalid_argument);

  j = json::parse(good);
  j["segments"] = json::array();
  CHECK_THROWS_AS(trajectory_from_json_string(j.dump()), std::invalid_argument);

  j = json::parse(good);
  j.erase("segments");
  CHECK_THROWS(trajectory_from_json_string(j.dump()));
}

TEST_CASE("trajectory CSV has the documented layout") {
  const Trajectory traj = two_segment_trajectory();  // total 3 s
  const std::string csv = trajectory_csv_string(traj, 0.4);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "t,x,y,z,psi,vx,vy,vz,psi_d,ax,ay,az,jx,jy,jz,sx,sy,sz,psi_dd");

  // Grid 0,0.4,...,2.8 plus the 3.0 endpoint: 9 data rows.
  CHECK(count_lines(csv) == 10);
  std::string first_row;
  std::getline(in, first_row);
  CHECK(first_row.substr(0, 2) == "0,");

  // Byte-for-byte reproducible.
  CHECK(trajectory_csv_string(traj, 0.4) == csv);
  CHECK_THROWS_AS(trajectory_csv_string(traj, 0.0), std::invalid_argument);
}

TEST_CASE("trace CSV has the documented layout") {
  SimTrace trace;
  for (int k = 0; k < 3; ++k) {
    SimSample s;
    s.t = 0.05 * k;
    s.state.x = Vec3(k, 0, -1);
    trace.samples.push_back(s);
  }
  const std::string csv = trace_csv_string(trace);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "t,x,y,z,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,omega1,omega2,delta1,delta2,"
        "res_trans,res_rot");
  CHECK(count_lines(csv) == 4);
  CHECK(trace_csv_string(trace) == csv);
}

TEST_CASE("feasibility JSON mirrors the report") {
  const VehicleParams p = nominal();
  const FeasibilityReport ok = circle_check(3.0, 0.0, CircleMode::coordinated,
                                            p, 0.05);
  json j = json::parse(feasibility_json_string(ok));
  CHECK(j.at("feasible") == true);
  CHECK(j.at("first_violation").is_null());
  CHECK(j.at("samples") == ok.samples);
  CHECK(j.at("omega_peak").get<double>() == doctest::Approx(ok.omega_peak));
  CHECK(j.at("max_load_g").get<double>() == doctest::Approx(1.0));
  CHECK(j.at("max_speed_mps").get<double>() == doctest::Approx(0.0));
  CHECK(j.at("abort_reason") == "");

  Trajectory ballistic;
  Trajectory::Segment seg;
  seg.duration = 1.0;
  seg.coeffs(2, 2) = p.g / 2;
  ballistic.segments.push_back(seg);
  j = json::parse(feasibility_json_string(check_trajectory(ballistic, p, 0.25)));
  CHECK(j.at("feasible") == false);
  REQUIRE(j.at("first_violation").is_object());
  CHECK(j.at("first_violation").at("limit") == "transform");
  CHECK(j.at("abort_reason").get<std::string>() != "");
}

TEST_CASE("metrics JSON mirrors the struct") {
  TrackingMetrics m;
  m.duration = 2.5;
  m.max_pos_err = 0.01;
  m.rms_pos_err = 0.004;
  m.max_speed = 7.5;
  m.max_load_g = 2.25;
  m.max_rate_dps = 310.0;
  const json j = json::parse(metrics_json_string(m));
  CHECK(j.at("duration").get<double>() == 2.5);
  CHECK(j.at("max_pos_err_m").get<double>() == 0.01);
  CHECK(j.at("rms_pos_err_m").get<double>() == 0.004);
  CHECK(j.at("max_speed_mps").get<double>() == 7.5);
  CHECK(j.at("max_load_g").get<double>() == 2.25);
  CHECK(j.at("max_rate_dps").get<double>() == 310.0);
}

TEST_CASE("scale scan JSON keeps the profile and runs") {
  ScaleScan scan;
  scan.found = true;
  scan.c_star = 1.25;
  scan.profile = {{0.5, false}, {1.3, true}, {2.1, true}};
  scan.feasible_runs = {{1.3, 2.1}};
  const json j = json::parse(scale_scan_json_string(scan));
  CHECK(j.at("found") == true);
  CHECK(j.at("c_star").get<double>() == 1.25);
  CHECK(j.at("at_lower_bound") == false);
  REQUIRE(j.at("profile").size() == 3);
  CHECK(j.at("profile")[0].at("c").get<double>() == 0.5);
  CHECK(j.at("profile")[0].at("feasible") == false);
  CHECK(j.at("profile")[1].at("feasible") == true);
  REQUIRE(j.at("feasible_runs").size() == 1);
  CHECK(j.at("feasible_runs")[0][0].get<double>() == 1.3);
  CHECK(j.at("feasible_runs")[0][1].get<double>() == 2.1);
}

TEST_CASE("heatmap CSV puts axis values on the edges") {
  Heatmap hm;
  hm.psi_start = {-1.0, 1.0};
  hm.psi_end = {-1.0, 1.0};
  hm.min_time = Eigen::MatrixXd(2, 2);
  hm.min_time << 1, 2, 3, 4;
  CHECK(heatmap_csv_string(hm) ==
        "psi_start/psi_end,-1,1\n"
        "-1,1,2\n"
        "1,3,4\n");
}

TEST_CASE("writers refuse unwritable paths") {
  CHECK_THROWS_AS(
      write_trajectory_json("/no/such/dir/x.traj.json", two_segment_trajectory()),
      std::runtime_error);
}
