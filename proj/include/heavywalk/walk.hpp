#pragma once

#include <span>
#include <vector>

#include "heavywalk/rng.hpp"
#include "heavywalk/tails.hpp"

namespace heavywalk {

// Probability that a step is positive.  Either a single number or a table of
// state bands (first match wins, base_p as fallback).  The asymptotic results
// assume tables bounded away from 0 and 1; that is documented, not enforced.
struct SignRule {
  struct Band {
    double lo, hi, p;  // applies when lo <= x < hi
  };
  double base_p = 0.5;
  std::vector<Band> bands;

  double p_pos(long long t, double x) const;
  void validate() const;
};

// Signed step law: with probability p_pos a positive magnitude drawn from
// pos, otherwise a negative magnitude drawn from neg, plus a deterministic
// shift.  Exactly two uniforms are consumed per step regardless of kind, so
// stream alignment does not depend on the law.
struct IncrementLaw {
  TailLaw pos, neg;
  SignRule sign;
  double drift_shift = 0.0;

  void validate() const;
  double sample(long long t, double x, SplitMix64& rng) const;
};

// Dyadic-checkpoint summary of a path: O(log T) memory per replica.
struct Trajectory {
  std::vector<long long> times;  // 0, 1, 2, 4, ..., plus the horizon
  std::vector<double> values;    // X_t at those times
  std::vector<double> run_min;   // min over [0, t]
  std::vector<double> run_max;   // max over [0, t]
  std::vector<double> max_inc;   // largest positive increment over [0, t]
  long long horizon = 0;
};

enum class PassageStatus { reached, censored };
struct PassageTime {
  long long time = 0;  // horizon when censored
  PassageStatus status = PassageStatus::censored;
};

enum class ExitStatus { resolved, unresolved, none };
struct ExitTime {
  long long time = 0;  // last observed time at or below the level
  ExitStatus status = ExitStatus::none;
};

struct StoppingRecord {
  std::vector<double> levels;
  std::vector<PassageTime> tau;
  std::vector<ExitTime> lambda;
};

struct WalkResult {
  Trajectory traj;
  StoppingRecord stopping;
  bool aborted = false;       // non-finite state reached; replica unusable
  long long abort_time = -1;
};

std::vector<long long> dyadic_checkpoints(long long horizon);

// Single streaming pass; stopping times resolved on the fly.
WalkResult simulate_walk(const IncrementLaw& law, long long horizon, StreamKey replica_key,
                         const std::vector<double>& levels);

// Serial reference: the full path X_0..X_T from the same stream, used as the
// oracle for the streaming implementation and for small diagnostics.
std::vector<double> simulate_walk_dense(const IncrementLaw& law, long long horizon,
                                        StreamKey replica_key);

// Path-level stopping time extractors (path[0] = X_0).
PassageTime first_passage(std::span<const double> path, double x);
ExitTime last_exit(std::span<const double> path, double x);

// Build a Trajectory from a dense path (test oracle for simulate_walk).
Trajectory summarize_path(std::span<const double> path);

// Envelope bounds from the escape-rate theorems; t >= 2 so log t > 0.
double upper_envelope(long long t, double theta, double phi, double eps);
double lower_envelope(long long t, double alpha, double eps);

struct EnvelopeCheck {
  int checked = 0;
  int violations = 0;
  long long first_violation = -1;
};

// Violations counted at checkpoints t >= burn_in (burn_in >= 3).
EnvelopeCheck count_upper_violations(const Trajectory& traj, double theta, double phi, double eps,
                                     long long burn_in);
EnvelopeCheck count_lower_violations(const Trajectory& traj, double alpha, double eps,
                                     long long burn_in);
EnvelopeCheck count_max_inc_violations(const Trajectory& traj, double alpha, double eps,
                                       long long burn_in);

}  // namespace heavywalk
