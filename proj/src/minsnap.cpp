#include "flatgen/minsnap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace flatgen {

namespace {

constexpr int kDeg = 9;          // polynomial degree per segment
constexpr int kCoeffs = kDeg + 1;
constexpr int kOrders = 5;       // endpoint derivatives 0..4

double falling(int k, int r) {
  double f = 1;
  for (int i = 0; i < r; ++i) f *= k - i;
  return f;
}

// Maps segment coefficients to scaled endpoint derivatives (orders 0..4 at
// u=0 stacked over u=1). Constant across segments.
Eigen::Matrix<double, 10, 10> endpoint_matrix() {
  Eigen::Matrix<double, 10, 10> a = Eigen::Matrix<double, 10, 10>::Zero();
  for (int r = 0; r < kOrders; ++r) {
    a(r, r) = falling(r, r);  // r!
    for (int k = r; k < kCoeffs; ++k) a(kOrders + r, k) = falling(k, r);
  }
  return a;
}

const Eigen::Matrix<double, 10, 10>& endpoint_matrix_inv() {
  static const Eigen::Matrix<double, 10, 10> inv =
      endpoint_matrix().fullPivLu().inverse();
  return inv;
}

// Gram matrix of the squared r-th derivative over u in [0,1].
Eigen::Matrix<double, 10, 10> derivative_gram(int r) {
  Eigen::Matrix<double, 10, 10> q = Eigen::Matrix<double, 10, 10>::Zero();
  for (int k = r; k < kCoeffs; ++k)
    for (int l = r; l < kCoeffs; ++l)
      q(k, l) = falling(k, r) * falling(l, r) / (k + l - 2 * r + 1);
  return q;
}

const Eigen::Matrix<double, 10, 10>& snap_gram() {
  static const auto q = derivative_gram(4);
  return q;
}

const Eigen::Matrix<double, 10, 10>& yaw_acc_gram() {
  static const auto q = derivative_gram(2);
  return q;
}

// Segment cost in true endpoint-derivative coordinates:
//   d' (S A^-T Q A^-1 S) d * dt^(1-2r)
// where S scales true derivatives into normalized time.
Eigen::Matrix<double, 10, 10> segment_hessian(double dt,
                                              const Eigen::Matrix<double, 10, 10>& gram,
                                              int r) {
  Eigen::Matrix<double, 10, 10> s = Eigen::Matrix<double, 10, 10>::Zero();
  for (int k = 0; k < kOrders; ++k) {
    const double p = std::pow(dt, k);
    s(k, k) = p;
    s(kOrders + k, kOrders + k) = p;
  }
  const auto& ainv = endpoint_matrix_inv();
  const double time_scale = std::pow(dt, 1 - 2 * r);
  return time_scale * s * ainv.transpose() * gram * ainv * s;
}

struct ChannelEntry {
  int var = -1;      // index into the free vector, -1 if fixed
  double weight = 1; // coefficient on the free variable
  double value = 0;  // fixed value (or 0 when free)
};

void validate_problem(const std::vector<Waypoint>& wps,
                      const std::vector<double>& times) {
  if (wps.size() < 2)
    throw std::invalid_argument("min-snap: need at least two waypoints");
  if (times.size() + 1 != wps.size())
    throw std::invalid_argument("min-snap: need one duration per segment");
  for (double dt : times)
    if (!(dt > 0) || !std::isfinite(dt))
      throw std::invalid_argument("min-snap: durations must be positive");
  for (const auto& w : wps) {
    if (w.velocity && w.velocity_direction)
      throw std::invalid_argument(
          "min-snap: waypoint fixes both velocity and its direction");
    if (w.velocity_direction && w.velocity_direction->norm() < 1e-12)
      throw std::invalid_argument("min-snap: zero direction vector");
  }
}

}  // namespace

Waypoint Waypoint::rest(const Vec3& pos, double yaw) {
  // Velocity through jerk (and both yaw rates) vanish at a hover point.
  // Boundary snap stays free: the variational optimum of the snap integral
  // sets it, and pinning it to zero would over-constrain the endpoints.
  Waypoint w;
  w.position = pos;
  w.yaw = yaw;
  w.velocity = Vec3::Zero();
  w.acceleration = Vec3::Zero();
  w.jerk = Vec3::Zero();
  w.yaw_rate = 0.0;
  w.yaw_acc = 0.0;
  return w;
}

double Trajectory::total_time() const {
  double t = 0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

int Trajectory::locate(double t, double* u) const {
  if (segments.empty()) throw std::out_of_range("trajectory has no segments");
  const double total = total_time();
  const double slop = 1e-9 * std::max(1.0, total);
  if (t < -slop || t > total + slop)
    throw std::out_of_range("sample time outside trajectory");
  double start = 0;
  for (size_t i = 0; i + 1 < segments.size(); ++i) {
    if (t < start + segments[i].duration) {
      *u = std::clamp((t - start) / segments[i].duration, 0.0, 1.0);
      return static_cast<int>(i);
    }
    start += segments[i].duration;
  }
  const auto& last = segments.back();
  *u = std::clamp((t - start) / last.duration, 0.0, 1.0);
  return static_cast<int>(segments.size()) - 1;
}

FlatSample sample_in_segment(const Trajectory& traj, int segment, double u) {
  const auto& seg = traj.segments.at(segment);
  double start = 0;
  for (int i = 0; i < segment; ++i) start += traj.segments[i].duration;

  // Horner-style evaluation of value and derivatives 0..4 in normalized
  // time, then rescale by duration powers.
  Eigen::Matrix<double, 4, 5> d = Eigen::Matrix<double, 4, 5>::Zero();
  for (int ch = 0; ch < 4; ++ch) {
    for (int r = 0; r < kOrders; ++r) {
      double acc = 0;
      for (int k = kDeg; k >= r; --k)
        acc = acc * u + seg.coeffs(ch, k) * falling(k, r);
      d(ch, r) = acc / std::pow(seg.duration, r);
    }
  }
  FlatSample q;
  q.t = start + u * seg.duration;
  q.x = Vec3(d(0, 0), d(1, 0), d(2, 0));
  q.v = Vec3(d(0, 1), d(1, 1), d(2, 1));
  q.a = Vec3(d(0, 2), d(1, 2), d(2, 2));
  q.j = Vec3(d(0, 3), d(1, 3), d(2, 3));
  q.s = Vec3(d(0, 4), d(1, 4), d(2, 4));
  q.psi = d(3, 0);
  q.psi_d = d(3, 1);
  q.psi_dd = d(3, 2);
  return q;
}

FlatSample sample_flat(const Trajectory& traj, double t) {
  double u = 0;
  const int seg = traj.locate(t, &u);
  FlatSample q = sample_in_segment(traj, seg, u);
  q.t = t;
  return q;
}

SolveResult solve_min_snap(const std::vector<Waypoint>& wps,
                           const std::vector<double>& times, double mu_psi) {
  validate_problem(wps, times);
  const int n_wp = static_cast<int>(wps.size());
  const int n_seg = n_wp - 1;
  const int n_d = kOrders * n_wp;  // per-channel stacked endpoint derivatives

  // Classify every (channel, waypoint, order) entry. Channels 0..2 are the
  // position axes, channel 3 is yaw. Direction-constrained velocities share
  // one magnitude variable across the three position channels.
  std::vector<std::array<ChannelEntry, 4>> entries(
      static_cast<size_t>(n_d));  // [wp*5+order][channel]
  int n_free = 0;
  auto free_var = [&n_free]() { return n_free++; };

  for (int i = 0; i < n_wp; ++i) {
    const Waypoint& w = wps[i];
    int dir_var = -1;
    if (w.velocity_direction) dir_var = free_var();
    for (int r = 0; r < kOrders; ++r) {
      const int row = i * kOrders + r;
      for (int ch = 0; ch < 4; ++ch) {
        ChannelEntry& e = entries[row][ch];
        const bool pos_ch = ch < 3;
        std::optional<double> fixed;
        if (r == 0) {
          fixed = pos_ch ? w.position(ch) : w.yaw;
        } else if (pos_ch) {
          const std::optional<Vec3>* v = nullptr;
          switch (r) {
            case 1: v = &w.velocity; break;
            case 2: v = &w.acceleration; break;
            case 3: v = &w.jerk; break;
            case 4: v = &w.snap; break;
          }
          if (*v) fixed = (**v)(ch);
        } else {
          if (r == 1 && w.yaw_rate) fixed = *w.yaw_rate;
          if (r == 2 && w.yaw_acc) fixed = *w.yaw_acc;
        }
        if (fixed) {
          e.value = *fixed;
        } else if (pos_ch && r == 1 && dir_var >= 0) {
          e.var = dir_var;
          e.weight = w.velocity_direction->normalized()(ch);
        } else {
          e.var = free_var();
        }
      }
    }
  }

  // Per-channel global Hessians over the stacked derivative vector.
  Eigen::MatrixXd h_pos = Eigen::MatrixXd::Zero(n_d, n_d);
  Eigen::MatrixXd h_yaw = Eigen::MatrixXd::Zero(n_d, n_d);
  for (int s = 0; s < n_seg; ++s) {
    const auto hs_pos = segment_hessian(times[s], snap_gram(), 4);
    const auto hs_yaw = mu_psi * segment_hessian(times[s], yaw_acc_gram(), 2);
    const int base = s * kOrders;
    h_pos.block<10, 10>(base, base) += hs_pos;
    h_yaw.block<10, 10>(base, base) += hs_yaw;
  }

  // Reduced normal equations over the free variables.
  Eigen::MatrixXd h_red = Eigen::MatrixXd::Zero(n_free, n_free);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_free);
  for (int ch = 0; ch < 4; ++ch) {
    const Eigen::MatrixXd& h = (ch < 3) ? h_pos : h_yaw;
    for (int pr = 0; pr < n_d; ++pr) {
      const ChannelEntry& ep = entries[pr][ch];
      for (int qc = 0; qc < n_d; ++qc) {
        const ChannelEntry& eq = entries[qc][ch];
        const double hpq = h(pr, qc);
        if (hpq == 0.0) continue;
        if (ep.var >= 0 && eq.var >= 0)
          h_red(ep.var, eq.var) += ep.weight * hpq * eq.weight;
        else if (ep.var >= 0)
          rhs(ep.var) -= ep.weight * hpq * eq.value;
      }
    }
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(n_free);
  if (n_free > 0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h_red);
    z = ldlt.solve(rhs);
    const double resid = (h_red * z - rhs).norm();
    if (ldlt.info() != Eigen::Success || !z.allFinite() ||
        resid > 1e-8 * (rhs.norm() + 1.0))
      throw std::invalid_argument(
          "min-snap: constraint system is singular or ill-posed");
  }

  // Materialize the per-channel derivative stacks and the coefficients.
  auto value_of = [&](int row, int ch) {
    const ChannelEntry& e = entries[row][ch];
    return e.var >= 0 ? e.weight * z(e.var) : e.value;
  };

  SolveResult out;
  out.trajectory.segments.resize(n_seg);
  const auto& ainv = endpoint_matrix_inv();
  for (int s = 0; s < n_seg; ++s) {
    auto& seg = out.trajectory.segments[s];
    seg.duration = times[s];
    for (int ch = 0; ch < 4; ++ch) {
      Eigen::Matrix<double, 10, 1> d_scaled;
      for (int r = 0; r < kOrders; ++r) {
        const double p = std::pow(times[s], r);
        d_scaled(r) = value_of(s * kOrders + r, ch) * p;
        d_scaled(kOrders + r) = value_of((s + 1) * kOrders + r, ch) * p;
      }
      seg.coeffs.row(ch) = (ainv * d_scaled).transpose();
    }
  }
  out.cost = min_snap_cost(out.trajectory, mu_psi);
  return out;
}

double min_snap_cost(const Trajectory& traj, double mu_psi) {
  double cost = 0;
  for (const auto& seg : traj.segments) {
    const double dt = seg.duration;
    for (int ch = 0; ch < 3; ++ch) {
      const Eigen::Matrix<double, 10, 1> c = seg.coeffs.row(ch).transpose();
      cost += std::pow(dt, -7) * c.dot(snap_gram() * c);
    }
    const Eigen::Matrix<double, 10, 1> c = seg.coeffs.row(3).transpose();
    cost += mu_psi * std::pow(dt, -3) * c.dot(yaw_acc_gram() * c);
  }
  return cost;
}

std::vector<double> initial_time_estimate(const std::vector<Waypoint>& wps,
                                          double v_nominal,
                                          double zero_chord_time) {
  if (wps.size() < 2)
    throw std::invalid_argument("time estimate: need at least two waypoints");
  if (!(v_nominal > 0))
    throw std::invalid_argument("time estimate: nominal speed must be positive");
  std::vector<double> times;
  times.reserve(wps.size() - 1);
  for (size_t i = 0; i + 1 < wps.size(); ++i) {
    const double chord = (wps[i + 1].position - wps[i].position).norm();
    times.push_back(chord < 1e-9 ? zero_chord_time : chord / v_nominal);
  }
  return times;
}

TimeOptResult optimize_segment_times(const std::vector<Waypoint>& wps,
                                     const std::vector<double>& initial,
                                     double mu_psi, const TimeOptOptions& opt) {
  const int n = static_cast<int>(initial.size());
  TimeOptResult res;
  res.times = initial;
  res.cost = solve_min_snap(wps, res.times, mu_psi).cost;
  if (n <= 1) {
    res.converged = true;
    return res;
  }
  const double total = std::accumulate(initial.begin(), initial.end(), 0.0);

  auto project = [&](std::vector<double> t) {
    double sum = 0;
    for (double& ti : t) {
      ti = std::max(ti, opt.min_duration);
      sum += ti;
    }
    // Renormalize to keep the total fixed; floors make this approximate but
    // the loop re-applies until stable.
    for (int pass = 0; pass < 8; ++pass) {
      const double scale = total / sum;
      sum = 0;
      for (double& ti : t) {
        ti = std::max(ti * scale, opt.min_duration);
        sum += ti;
      }
      if (std::abs(sum - total) < 1e-12 * total) break;
    }
    return t;
  };

  double step = opt.rel_step * total / n;
  for (res.iterations = 0; res.iterations < opt.max_iters; ++res.iterations) {
    // Projected finite-difference gradient (zero-mean keeps the total).
    const double h = opt.fd_rel * total;
    Eigen::VectorXd grad(n);
    for (int i = 0; i < n; ++i) {
      std::vector<double> tp = res.times, tm = res.times;
      tp[i] += h;
      tm[i] = std::max(tm[i] - h, opt.min_duration);
      const double jp = solve_min_snap(wps, tp, mu_psi).cost;
      const double jm = solve_min_snap(wps, tm, mu_psi).cost;
      grad(i) = (jp - jm) / (tp[i] - tm[i]);
    }
    grad.array() -= grad.mean();
    const double gnorm = grad.norm();
    if (gnorm < 1e-14) {
      res.converged = true;
      break;
    }

    bool improved = false;
    double alpha = step;
    for (int bt = 0; bt < opt.max_backtracks; ++bt) {
      std::vector<double> trial = res.times;
      for (int i = 0; i < n; ++i) trial[i] -= alpha * grad(i) / gnorm;
      trial = project(trial);
      double cost = 0;
      try {
        cost = solve_min_snap(wps, trial, mu_psi).cost;
      } catch (const std::exception&) {
        alpha *= opt.shrink;
        continue;
      }
      if (cost < res.cost) {
        const double rel_gain = (res.cost - cost) / std::max(res.cost, 1e-300);
        res.times = trial;
        res.cost = cost;
        improved = true;
        step = std::max(alpha, step * opt.shrink);
        if (rel_gain < opt.tol) res.converged = true;
        break;
      }
      alpha *= opt.shrink;
    }
    if (!improved) {
      res.converged = true;
      break;
    }
    if (res.converged) break;
  }
  return res;
}

Trajectory scale_time(const Trajectory& traj, double c) {
  if (!(c > 0)) throw std::invalid_argument("scale factor must be positive");
  Trajectory out = traj;
  for (auto& seg : out.segments) seg.duration *= c;
  return out;
}

}  // namespace flatgen
