#pragma once

#include <string>

#include "flatgen/feasibility.hpp"
#include "flatgen/minsnap.hpp"
#include "flatgen/simulator.hpp"

namespace flatgen {

// All writers are deterministic: fixed column orders, fixed float
// formatting, no timestamps. String builders are exposed so byte-level
// reproducibility can be asserted without touching the filesystem.

// Sampled trajectory, header:
//   t,x,y,z,psi,vx,vy,vz,psi_d,ax,ay,az,jx,jy,jz,sx,sy,sz,psi_dd
std::string trajectory_csv_string(const Trajectory& traj, double dt);
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          double dt);

// Lossless trajectory interchange: raw normalized-time segment coefficients.
std::string trajectory_json_string(const Trajectory& traj);
void write_trajectory_json(const std::string& path, const Trajectory& traj);
Trajectory trajectory_from_json_string(const std::string& text);
Trajectory load_trajectory(const std::string& path);

std::string feasibility_json_string(const FeasibilityReport& report);
void write_feasibility_json(const std::string& path,
                            const FeasibilityReport& report);

// Heatmap matrix with axis-value header row/column.
std::string heatmap_csv_string(const Heatmap& hm);
void write_heatmap_csv(const std::string& path, const Heatmap& hm);

// Simulation trace, header:
//   t,x,y,z,vx,vy,vz,qw,qx,qy,qz,wx,wy,wz,omega1,omega2,delta1,delta2,
//   res_trans,res_rot
std::string trace_csv_string(const SimTrace& trace);
void write_trace_csv(const std::string& path, const SimTrace& trace);

std::string metrics_json_string(const TrackingMetrics& m);
void write_metrics_json(const std::string& path, const TrackingMetrics& m);

std::string scale_scan_json_string(const ScaleScan& scan);
void write_scale_scan_json(const std::string& path, const ScaleScan& scan);

}  // namespace flatgen
