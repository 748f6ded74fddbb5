#pragma once

#include <vector>

#include "heavywalk/rng.hpp"
#include "heavywalk/walk.hpp"

namespace heavywalk {

enum class LyapunovKind { f_power_decay, w_power, concave_h, identity };

// Test functions for the drift checks.
//   f_power_decay(z, delta):  1 on (-inf, z], (1 + x - z)^{-delta} above z.
//   w_power(y, gamma):        (y - x)^gamma below y, 0 at or above y.
//   concave_h(theta):         sign(x) |x|^theta.
//   identity:                 x.
struct LyapunovSpec {
  LyapunovKind kind = LyapunovKind::identity;
  double z = 0.0;
  double delta = 1.0;
  double y = 0.0;
  double gamma = 1.0;
  double theta = 1.0;

  static LyapunovSpec f_power_decay(double z, double delta);
  static LyapunovSpec w_power(double y, double gamma);
  static LyapunovSpec concave_h(double theta);
  static LyapunovSpec identity();

  void validate() const;
};

double eval_lyapunov(const LyapunovSpec& spec, double state);

// Evaluated values are clamped to +-1e9 inside drift averaging so that a
// single astronomic jump cannot void the normal-approximation interval;
// clamp events are counted and reported.
inline constexpr double kDriftValueCap = 1e9;

struct DriftEstimate {
  double mean = 0.0;
  double ci_half_width = 0.0;  // 95% normal approximation
  long long n = 0;
  long long cap_hits = 0;
};

// Monte Carlo estimate of E[V(state + step) - V(state)] over n independent
// steps of the law at the given state. Deterministic laws give an exact mean
// and zero interval width. Requires n >= 1000.
DriftEstimate drift_estimate(const IncrementLaw& law, const LyapunovSpec& spec, double state,
                             long long n, StreamKey seed);

enum class DriftDirection { supermartingale, submartingale, strong_drift };

// strong_drift compares the mean against -eps * V(state)^eta instead of 0.
struct DriftTarget {
  DriftDirection direction = DriftDirection::supermartingale;
  double eta = 0.0;
  double eps = 0.0;

  static DriftTarget supermartingale();
  static DriftTarget submartingale();
  static DriftTarget strong_drift(double eta, double eps);
};

enum class DriftVerdict { le_confirmed, ge_confirmed, inconclusive };

const char* to_string(DriftVerdict v);

// Per-state drift summary over a grid. le_confirmed means
// mean + ci_half_width <= threshold, ge_confirmed means
// mean - ci_half_width >= threshold; anything straddling is inconclusive.
// stable_from is the first grid index where the requested direction is
// confirmed at three consecutive states (the empirical region boundary A);
// -1 when no such run exists.
struct DriftReport {
  std::vector<double> grid;
  std::vector<double> mean_drift;
  std::vector<double> ci_half_width;
  std::vector<double> threshold;
  std::vector<DriftVerdict> verdict;
  std::vector<long long> cap_hits;
  long long n_samples = 0;
  DriftTarget target;
  long long stable_from = -1;
};

DriftReport verify_drift_region(const IncrementLaw& law, const LyapunovSpec& spec,
                                const std::vector<double>& grid, DriftTarget target, long long n,
                                StreamKey seed);

// Markov-inequality style bound P[max_{t<=nu} Z_t >= x] <= (B E[nu] + E[Z_0])/x
// for a nonnegative process with per-step drift at most B. Takes the observed
// per-replica maxima and stopping times; passes at a grid point when the
// empirical frequency does not exceed the bound by more than three binomial
// standard errors.
struct MaximalCheck {
  std::vector<double> x_grid;
  std::vector<double> empirical;
  std::vector<double> bound;
  std::vector<bool> pass;
  bool all_pass = true;
};

MaximalCheck maximal_inequality_check(const std::vector<double>& maxima,
                                      const std::vector<long long>& nu, double drift_bound,
                                      double z0_mean, const std::vector<double>& x_grid);

enum class DeviationOutcome { pass, fail, trivially_pass, inconclusive };

const char* to_string(DeviationOutcome v);

// Decay check for P[min_{s<=t} X_s <= -t^phi] against the t^{1 - beta*phi}
// rate, with beta taken from the down-jump moment bound. Laws whose down
// steps are bounded make the event impossible beyond a finite time when
// phi > 1; that is detected analytically and reported as trivially_pass.
struct MinDeviationCheck {
  double slope = 0.0;
  double slope_ci = 0.0;
  double theory_exponent = 0.0;  // 1 - beta*phi
  std::vector<long long> events;  // per grid time
  long long replicas = 0;
  DeviationOutcome outcome = DeviationOutcome::inconclusive;
};

MinDeviationCheck min_deviation_check(const IncrementLaw& law, double phi, double eps,
                                      const std::vector<long long>& t_grid, long long replicas,
                                      StreamKey seed);

}  // namespace heavywalk
