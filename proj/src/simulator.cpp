#include "flatgen/simulator.hpp"

#include <cmath>

#include "flatgen/rotations.hpp"

namespace flatgen {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

ModelTerms terms_for(SimMode mode) {
  return mode == SimMode::flatness_consistent ? ModelTerms::flatness_consistent()
                                              : ModelTerms::full();
}

// Plain state vector for the integrator: x, v, quaternion (w,x,y,z), omega.
struct StateVec {
  Vec3 x, v;
  Vec4 q;
  Vec3 w;
};

StateVec pack(const VehicleState& s) {
  return {s.x, s.v, quat_to_vec(s.q), s.omega};
}

VehicleState unpack(const StateVec& y) {
  VehicleState s;
  s.x = y.x;
  s.v = y.v;
  s.q = vec_to_quat(y.q);
  s.omega = y.w;
  return s;
}

StateVec axpy(const StateVec& y, double a, const StateVec& d) {
  return {y.x + a * d.x, y.v + a * d.v, y.q + a * d.q, y.w + a * d.w};
}

StateVec derive(const StateVec& y, const ControlInput& u,
                const VehicleParams& p, const ModelTerms& terms) {
  VehicleState s = unpack(y);
  // Mid-stage quaternions drift slightly off unit norm; evaluate the model
  // on the normalized attitude but integrate the raw norm-preserving ODE.
  s.q.normalize();
  const StateDerivative d = state_derivative(s, u, p, terms);
  return {d.xdot, d.vdot, quat_derivative(y.q, s.omega), d.omegadot};
}

StateVec rk4_step(const StateVec& y, double h, const ControlInput& u0,
                  const ControlInput& uh, const ControlInput& u1,
                  const VehicleParams& p, const ModelTerms& terms) {
  const StateVec k1 = derive(y, u0, p, terms);
  const StateVec k2 = derive(axpy(y, 0.5 * h, k1), uh, p, terms);
  const StateVec k3 = derive(axpy(y, 0.5 * h, k2), uh, p, terms);
  const StateVec k4 = derive(axpy(y, h, k3), u1, p, terms);
  StateVec out = y;
  out.x += h / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
  out.v += h / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v);
  out.q += h / 6.0 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q);
  out.w += h / 6.0 * (k1.w + 2 * k2.w + 2 * k3.w + k4.w);
  return out;
}

// Relative residual conventions: translation against the specific-force
// scale (never below g), rotation against the demanded angular acceleration
// (never below 1 rad/s^2).
double residual_trans(const Vec3& model_acc, const FlatSample& ref,
                      const VehicleParams& p) {
  const double scale = std::max(p.g, (ref.a - p.g * Vec3(0, 0, 1)).norm());
  return (model_acc - ref.a).norm() / scale;
}

double residual_rot(const Vec3& model_wd, const Vec3& ref_wd) {
  return (model_wd - ref_wd).norm() / std::max(1.0, ref_wd.norm());
}

}  // namespace

SimMode sim_mode_from_string(const std::string& s) {
  if (s == "consistent") return SimMode::flatness_consistent;
  if (s == "full") return SimMode::full_model;
  throw std::invalid_argument("unknown simulation mode: " + s);
}

std::string to_string(SimMode m) {
  return m == SimMode::flatness_consistent ? "consistent" : "full";
}

ReferenceTable::ReferenceTable(const Trajectory& traj, const VehicleParams& p,
                               double step)
    : step_(step) {
  if (!(step > 0)) throw std::invalid_argument("step must be positive");
  const double total = traj.total_time();
  n_steps_ = std::max(1, static_cast<int>(std::round(total / step)));
  step_ = total / n_steps_;  // land exactly on the end
  grid_.reserve(n_steps_ + 1);
  half_.reserve(n_steps_);
  flat_.reserve(n_steps_ + 1);
  BranchState branch;
  for (int k = 0; k <= n_steps_; ++k) {
    const FlatSample q = sample_flat(traj, k * step_);
    flat_.push_back(q);
    grid_.push_back(flat_to_full(q, p, branch));
    if (k < n_steps_) {
      const FlatSample qh = sample_flat(traj, (k + 0.5) * step_);
      half_.push_back(flat_to_full(qh, p, branch));
    }
  }
}

namespace {

// Integrates from grid index k0 to k1, appending samples to the trace.
// Returns false when the divergence guard trips.
bool run_span(const ReferenceTable& table, const VehicleParams& p,
              const SimOptions& opt, int k0, int k1, SimTrace* trace,
              std::vector<VehicleState>* states_out) {
  const ModelTerms terms = terms_for(opt.mode);
  const double h = table.step_size();
  StateVec y = pack(table.at(k0).state);
  for (int k = k0; k <= k1; ++k) {
    const VehicleState s = unpack(y);
    if (states_out) states_out->push_back(s);
    if (trace) {
      const FullStateInput& ref = table.at(k);
      const StateDerivative d =
          state_derivative(ref.state, ref.input, p, terms);
      SimSample sample;
      sample.t = table.time_at(k);
      sample.state = s;
      sample.input = ref.input;
      sample.res_trans = residual_trans(d.vdot, table.flat_at(k), p);
      sample.res_rot = residual_rot(d.omegadot, ref.omega_dot);
      trace->samples.push_back(sample);
    }
    if (s.x.norm() > opt.divergence_limit) {
      if (trace) {
        trace->aborted = true;
        trace->abort_time = table.time_at(k);
      }
      return false;
    }
    if (k == k1) break;
    y = rk4_step(y, h, table.at(k).input, table.at_half(k).input,
                 table.at(k + 1).input, p, terms);
    const double n = y.q.norm();
    const double drift = std::abs(n - 1.0);
    if (trace) trace->max_quat_drift = std::max(trace->max_quat_drift, drift);
    y.q /= n;
  }
  return true;
}

}  // namespace

SimTrace integrate_open_loop(const Trajectory& traj, const VehicleParams& p,
                             const SimOptions& opt) {
  const ReferenceTable table(traj, p, opt.step);
  SimTrace trace;
  trace.samples.reserve(table.steps() + 1);
  run_span(table, p, opt, 0, table.steps(), &trace, nullptr);
  return trace;
}

RoundTrip windowed_round_trip(const Trajectory& traj, const VehicleParams& p,
                              double window, const SimOptions& opt) {
  if (!(window > 0)) throw std::invalid_argument("window must be positive");
  const ReferenceTable table(traj, p, opt.step);
  const int steps_per_window =
      std::max(1, static_cast<int>(std::round(window / table.step_size())));

  RoundTrip rt;
  std::vector<VehicleState> states;
  for (int k0 = 0; k0 < table.steps(); k0 += steps_per_window) {
    const int k1 = std::min(k0 + steps_per_window, table.steps());
    states.clear();
    SimTrace span_trace;  // only for quaternion drift bookkeeping
    run_span(table, p, opt, k0, k1, &span_trace, &states);
    rt.max_quat_drift = std::max(rt.max_quat_drift, span_trace.max_quat_drift);

    WindowStat ws;
    ws.t0 = table.time_at(k0);
    ws.t1 = table.time_at(k1);
    for (size_t i = 0; i < states.size(); ++i) {
      const FullStateInput& ref = table.at(k0 + static_cast<int>(i));
      ws.max_pos_err =
          std::max(ws.max_pos_err, (states[i].x - ref.state.x).norm());
      ws.max_att_err =
          std::max(ws.max_att_err, rotation_angle(states[i].q, ref.state.q));
    }
    rt.windows.push_back(ws);
    rt.max_pos_err = std::max(rt.max_pos_err, ws.max_pos_err);
    rt.max_att_err = std::max(rt.max_att_err, ws.max_att_err);
  }
  return rt;
}

TrackingMetrics tracking_metrics(const SimTrace& trace, const Trajectory& traj,
                                 const VehicleParams& p) {
  TrackingMetrics m;
  if (trace.samples.empty()) return m;
  m.duration = trace.samples.back().t - trace.samples.front().t;
  double sum_sq = 0;
  BranchState branch;
  for (const auto& s : trace.samples) {
    const FlatSample ref = sample_flat(traj, s.t);
    const double err = (s.state.x - ref.x).norm();
    m.max_pos_err = std::max(m.max_pos_err, err);
    sum_sq += err * err;
    m.max_speed = std::max(m.max_speed, ref.v.norm());
    m.max_load_g =
        std::max(m.max_load_g, (ref.a - p.g * Vec3(0, 0, 1)).norm() / p.g);
    try {
      const FlatnessIntermediates im = flat_intermediates(ref, p, branch);
      m.max_rate_dps = std::max(m.max_rate_dps, im.omega.norm() * 180.0 / kPi);
    } catch (const TransformError&) {
    }
  }
  m.rms_pos_err = std::sqrt(sum_sq / trace.samples.size());
  return m;
}

}  // namespace flatgen
