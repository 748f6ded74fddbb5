#pragma once

#include <cstddef>
#include <vector>

#include "heavywalk/walk.hpp"

namespace heavywalk {

enum class EstimatorMethod { hill, loglog_slope, survival_slope };

// Tail or growth exponent with a 95% interval. Hill and survival fits get
// percentile-bootstrap intervals; the trajectory slope gets the least-squares
// interval from its own residuals.
struct ExponentEstimate {
  double point = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  EstimatorMethod method = EstimatorMethod::hill;
  long long n_effective = 0;
};

// Default order-statistic cut floor(n^0.6), a bias/variance compromise for
// samples in the 1e3..1e6 range.
long long hill_default_k(std::size_t n);

// Classical Hill estimator over the k largest order statistics: the inverse
// of the mean log-excess above the (k+1)-th largest value. Requires
// 10 <= k < n and more than half of the top k+1 order statistics distinct.
ExponentEstimate hill_estimate(const std::vector<double>& samples, long long k);

// Least-squares slope of log(max(X_t, 1)) against log t over the recorded
// checkpoints with t >= burn_in. Needs at least five such checkpoints.
ExponentEstimate loglog_slope(const Trajectory& traj, long long burn_in);

struct SurvivalFit {
  ExponentEstimate estimate;
  long long n_censored = 0;
  // Separate fits over the lower and upper halves of the grid. A survival
  // curve that keeps steepening on the log-log scale has lighter-than-any-
  // polynomial tails, which the hint flags.
  double head_slope = 0.0;
  double tail_slope = 0.0;
  bool all_moments_finite_hint = false;
};

// Slope of log empirical survival against log t over t_grid. Censored
// samples stay in the at-risk set up to their recorded cap but never count
// as events. Requires >= 100 uncensored samples and a strictly increasing
// grid of at least four points below the largest uncensored value.
SurvivalFit survival_slope(const std::vector<double>& values,
                           const std::vector<bool>& censored,
                           const std::vector<double>& t_grid);

enum class MomentVerdict { converging, diverging, inconclusive };

const char* to_string(MomentVerdict v);

// Tracks the running p-th sample moment across the last three sample-size
// doublings (prefixes n/8, n/4, n/2, n). Converging when all three ratios
// stay within 10% of one; diverging when the moment grows by more than 50%
// while a single maximal term carries a substantial share of the sum.
MomentVerdict moment_diagnostic(const std::vector<double>& samples, double p);

// points values from lo to hi inclusive, equally spaced in log.
std::vector<double> geometric_grid(double lo, double hi, int points);

}  // namespace heavywalk
