#include "heavywalk/walk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heavywalk {

double SignRule::p_pos(long long /*t*/, double x) const {
  for (const Band& b : bands) {
    if (x >= b.lo && x < b.hi) return b.p;
  }
  return base_p;
}

void SignRule::validate() const {
  auto ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!ok(base_p)) throw std::invalid_argument("SignRule: base_p outside [0,1]");
  for (const Band& b : bands) {
    if (!(b.lo < b.hi)) throw std::invalid_argument("SignRule: band with lo >= hi");
    if (!ok(b.p)) throw std::invalid_argument("SignRule: band p outside [0,1]");
  }
}

void IncrementLaw::validate() const {
  pos.validate();
  neg.validate();
  sign.validate();
  if (!std::isfinite(drift_shift)) throw std::invalid_argument("IncrementLaw: drift_shift not finite");
}

double IncrementLaw::sample(long long t, double x, SplitMix64& rng) const {
  double u_sign = rng.u01();
  double u_mag = rng.u01();
  if (u_sign < sign.p_pos(t, x)) {
    return pos.sample(u_mag) + drift_shift;
  }
  return -neg.sample(u_mag) + drift_shift;
}

std::vector<long long> dyadic_checkpoints(long long horizon) {
  std::vector<long long> times;
  times.push_back(0);
  for (long long t = 1; t <= horizon && t > 0; t *= 2) times.push_back(t);
  if (times.back() != horizon) times.push_back(horizon);
  return times;
}

WalkResult simulate_walk(const IncrementLaw& law, long long horizon, StreamKey replica_key,
                         const std::vector<double>& levels) {
  if (horizon < 2) throw std::invalid_argument("simulate_walk: horizon must be >= 2");
  WalkResult out;
  Trajectory& traj = out.traj;
  traj.horizon = horizon;
  std::vector<long long> cps = dyadic_checkpoints(horizon);
  std::size_t next_cp = 0;

  out.stopping.levels = levels;
  out.stopping.tau.assign(levels.size(), PassageTime{horizon, PassageStatus::censored});
  out.stopping.lambda.assign(levels.size(), ExitTime{0, ExitStatus::none});
  std::vector<bool> tau_found(levels.size(), false);
  std::vector<long long> last_below(levels.size(), -1);

  SplitMix64 rng = replica_key.child("steps").stream();
  double x = 0.0, lo = 0.0, hi = 0.0, biggest_up = 0.0;

  auto note_state = [&](long long t) {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (!tau_found[i] && x >= levels[i]) {
        out.stopping.tau[i] = {t, PassageStatus::reached};
        tau_found[i] = true;
      }
      if (x <= levels[i]) last_below[i] = t;
    }
    if (next_cp < cps.size() && t == cps[next_cp]) {
      traj.times.push_back(t);
      traj.values.push_back(x);
      traj.run_min.push_back(lo);
      traj.run_max.push_back(hi);
      traj.max_inc.push_back(biggest_up);
      ++next_cp;
    }
  };

  note_state(0);
  for (long long t = 1; t <= horizon; ++t) {
    double prev = x;
    x += law.sample(t - 1, x, rng);
    if (!std::isfinite(x)) {
      out.aborted = true;
      out.abort_time = t;
      break;
    }
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    // realized path increment, so the dense reference computes the same values
    if (x - prev > biggest_up) biggest_up = x - prev;
    note_state(t);
  }

  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (last_below[i] < 0) continue;  // level never visited from above
    // A path ending at or below the level may still leave it later, so the
    // recorded last-exit time is only a lower bound in that case.
    ExitStatus st = last_below[i] == horizon ? ExitStatus::unresolved : ExitStatus::resolved;
    out.stopping.lambda[i] = {last_below[i], st};
  }
  return out;
}

std::vector<double> simulate_walk_dense(const IncrementLaw& law, long long horizon,
                                        StreamKey replica_key) {
  SplitMix64 rng = replica_key.child("steps").stream();
  std::vector<double> path(static_cast<std::size_t>(horizon) + 1, 0.0);
  double x = 0.0;
  for (long long t = 1; t <= horizon; ++t) {
    x += law.sample(t - 1, x, rng);
    path[static_cast<std::size_t>(t)] = x;
    if (!std::isfinite(x)) {
      path.resize(static_cast<std::size_t>(t) + 1);
      break;
    }
  }
  return path;
}

PassageTime first_passage(std::span<const double> path, double x) {
  if (path.empty()) throw std::invalid_argument("first_passage: empty path");
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (path[t] >= x) return {static_cast<long long>(t), PassageStatus::reached};
  }
  return {static_cast<long long>(path.size()) - 1, PassageStatus::censored};
}

ExitTime last_exit(std::span<const double> path, double x) {
  if (path.empty()) throw std::invalid_argument("last_exit: empty path");
  long long horizon = static_cast<long long>(path.size()) - 1;
  long long last = -1;
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (path[t] <= x) last = static_cast<long long>(t);
  }
  if (last < 0) return {0, ExitStatus::none};
  return {last, last == horizon ? ExitStatus::unresolved : ExitStatus::resolved};
}

Trajectory summarize_path(std::span<const double> path) {
  if (path.empty()) throw std::invalid_argument("summarize_path: empty path");
  Trajectory traj;
  traj.horizon = static_cast<long long>(path.size()) - 1;
  std::vector<long long> cps = dyadic_checkpoints(traj.horizon);
  double lo = path[0], hi = path[0], biggest_up = 0.0;
  std::size_t next_cp = 0;
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (t > 0) {
      double d = path[t] - path[t - 1];
      if (d > biggest_up) biggest_up = d;
    }
    lo = std::min(lo, path[t]);
    hi = std::max(hi, path[t]);
    if (next_cp < cps.size() && static_cast<long long>(t) == cps[next_cp]) {
      traj.times.push_back(cps[next_cp]);
      traj.values.push_back(path[t]);
      traj.run_min.push_back(lo);
      traj.run_max.push_back(hi);
      traj.max_inc.push_back(biggest_up);
      ++next_cp;
    }
  }
  return traj;
}

double upper_envelope(long long t, double theta, double phi, double eps) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::domain_error("upper_envelope: theta outside (0,1]");
  if (t < 2) throw std::domain_error("upper_envelope: t must be >= 2");
  double lt = std::log(static_cast<double>(t));
  if (theta == 1.0) {
    return static_cast<double>(t) * std::pow(lt, std::max(1.0 + phi, 0.0) + 1.0 + eps);
  }
  return std::pow(static_cast<double>(t), 1.0 / theta) * std::pow(lt, (phi + 2.0) / theta + eps);
}

double lower_envelope(long long t, double alpha, double eps) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("lower_envelope: alpha outside (0,1)");
  if (t < 2) throw std::domain_error("lower_envelope: t must be >= 2");
  double lt = std::log(static_cast<double>(t));
  return std::pow(static_cast<double>(t), 1.0 / alpha) * std::pow(lt, -1.0 / alpha - eps);
}

namespace {

template <typename Fn>
EnvelopeCheck count_violations(const Trajectory& traj, long long burn_in, Fn violated) {
  if (burn_in < 3) throw std::invalid_argument("envelope check: burn_in must be >= 3");
  EnvelopeCheck out;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    long long t = traj.times[i];
    if (t < burn_in) continue;
    ++out.checked;
    if (violated(i, t)) {
      ++out.violations;
      if (out.first_violation < 0) out.first_violation = t;
    }
  }
  return out;
}

}  // namespace

EnvelopeCheck count_upper_violations(const Trajectory& traj, double theta, double phi, double eps,
                                     long long burn_in) {
  return count_violations(traj, burn_in, [&](std::size_t i, long long t) {
    return traj.values[i] > upper_envelope(t, theta, phi, eps);
  });
}

EnvelopeCheck count_lower_violations(const Trajectory& traj, double alpha, double eps,
                                     long long burn_in) {
  return count_violations(traj, burn_in, [&](std::size_t i, long long t) {
    return traj.values[i] < lower_envelope(t, alpha, eps);
  });
}

EnvelopeCheck count_max_inc_violations(const Trajectory& traj, double alpha, double eps,
                                       long long burn_in) {
  return count_violations(traj, burn_in, [&](std::size_t i, long long t) {
    return traj.max_inc[i] < lower_envelope(t, alpha, eps);
  });
}

}  // namespace heavywalk
