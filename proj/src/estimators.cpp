#include "heavywalk/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <stdexcept>

#include "heavywalk/rng.hpp"

namespace heavywalk {

namespace {

constexpr int kBootstrapResamples = 500;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (m > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double r = y[i] - fit.intercept - fit.slope * x[i];
      ssr += r * r;
    }
    fit.slope_se = std::sqrt(std::max(ssr, 0.0) / (static_cast<double>(m - 2) * sxx));
  }
  return fit;
}

std::uint64_t hash_doubles(const std::vector<double>& xs, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (double x : xs) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    h = SplitMix64::mix(h ^ bits);
  }
  return h;
}

std::size_t draw_index(SplitMix64& rng, std::size_t n) {
  auto i = static_cast<std::size_t>(rng.u01() * static_cast<double>(n));
  return i < n ? i : n - 1;
}

// Mean log-excess of the k largest entries over the (k+1)-th largest;
// rearranges buf. Returns 0 when the top block is tied.
double hill_log_excess(std::vector<double>& buf, long long k) {
  auto kth = buf.begin() + static_cast<std::ptrdiff_t>(k);
  std::nth_element(buf.begin(), kth, buf.end(), std::greater<>());
  double log_pivot = std::log(*kth);
  double acc = 0.0;
  for (long long i = 0; i < k; ++i) acc += std::log(buf[static_cast<std::size_t>(i)]);
  return acc / static_cast<double>(k) - log_pivot;
}

void percentile_ci(std::vector<double>& boot, ExponentEstimate& est) {
  std::sort(boot.begin(), boot.end());
  const auto last = static_cast<double>(boot.size() - 1);
  est.ci_lo = boot[static_cast<std::size_t>(std::floor(0.025 * last))];
  est.ci_hi = boot[static_cast<std::size_t>(std::ceil(0.975 * last))];
  // Percentile intervals on skewed resampling distributions can land past
  // the point estimate; widen so the interval always contains it.
  est.ci_lo = std::min(est.ci_lo, est.point);
  est.ci_hi = std::max(est.ci_hi, est.point);
}

}  // namespace

long long hill_default_k(std::size_t n) {
  return static_cast<long long>(std::floor(std::pow(static_cast<double>(n), 0.6)));
}

ExponentEstimate hill_estimate(const std::vector<double>& samples, long long k) {
  const std::size_t n = samples.size();
  if (k < 10 || static_cast<std::size_t>(k) >= n)
    throw std::domain_error("hill_estimate: k must satisfy 10 <= k < n");
  for (double x : samples)
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::invalid_argument("hill_estimate: samples must be positive and finite");

  std::vector<double> sorted(samples);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // Lattice-valued data is fine as long as the averaging window itself is
  // not dominated by ties; below the window ties never enter the estimate.
  std::size_t window_distinct = 1;
  for (std::size_t i = 1; i <= static_cast<std::size_t>(k); ++i)
    window_distinct += sorted[i] != sorted[i - 1] ? 1 : 0;
  if (2 * window_distinct <= static_cast<std::size_t>(k) + 1)
    throw std::invalid_argument("hill_estimate: top order statistics mostly tied");

  double excess = hill_log_excess(sorted, k);
  if (!(excess > 0.0))
    throw std::invalid_argument("hill_estimate: tied top order statistics");

  ExponentEstimate est;
  est.point = 1.0 / excess;
  est.method = EstimatorMethod::hill;
  est.n_effective = k;

  StreamKey key(hash_doubles(samples, 0x48494c4cULL));
  std::vector<double> boot(kBootstrapResamples);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < kBootstrapResamples; ++r) {
    SplitMix64 rng = key.child("bootstrap").child(static_cast<std::uint64_t>(r)).stream();
    std::vector<double> re(n);
    for (std::size_t i = 0; i < n; ++i) re[i] = samples[draw_index(rng, n)];
    double e = hill_log_excess(re, k);
    boot[static_cast<std::size_t>(r)] =
        e > 0.0 ? 1.0 / e : std::numeric_limits<double>::infinity();
  }
  percentile_ci(boot, est);
  return est;
}

ExponentEstimate loglog_slope(const Trajectory& traj, long long burn_in) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    long long t = traj.times[i];
    if (t < burn_in || t < 1) continue;
    xs.push_back(std::log(static_cast<double>(t)));
    ys.push_back(std::log(std::max(traj.values[i], 1.0)));
  }
  if (xs.size() < 5)
    throw std::domain_error("loglog_slope: need at least 5 checkpoints past burn-in");
  LineFit fit = least_squares(xs, ys);
  ExponentEstimate est;
  est.point = fit.slope;
  est.ci_lo = fit.slope - 1.96 * fit.slope_se;
  est.ci_hi = fit.slope + 1.96 * fit.slope_se;
  est.method = EstimatorMethod::loglog_slope;
  est.n_effective = static_cast<long long>(xs.size());
  return est;
}

namespace {

// log-survival points over the grid; recorded caps keep censored samples in
// the at-risk count until t passes them. sorted_values must be ascending.
std::vector<double> log_survival(const std::vector<double>& sorted_values,
                                 const std::vector<double>& t_grid) {
  const auto n = static_cast<double>(sorted_values.size());
  std::vector<double> out(t_grid.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    auto it = std::upper_bound(sorted_values.begin(), sorted_values.end(), t_grid[j]);
    auto alive = static_cast<double>(sorted_values.end() - it);
    out[j] = std::log(alive / n);
  }
  return out;
}

}  // namespace

SurvivalFit survival_slope(const std::vector<double>& values,
                           const std::vector<bool>& censored,
                           const std::vector<double>& t_grid) {
  const std::size_t n = values.size();
  if (!censored.empty() && censored.size() != n)
    throw std::invalid_argument("survival_slope: censor flags must match sample count");
  long long n_cens = 0;
  double max_unc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(values[i] >= 0.0) || !std::isfinite(values[i]))
      throw std::invalid_argument("survival_slope: values must be nonnegative and finite");
    if (!censored.empty() && censored[i])
      ++n_cens;
    else
      max_unc = std::max(max_unc, values[i]);
  }
  const long long n_unc = static_cast<long long>(n) - n_cens;
  if (n_unc < 100)
    throw std::domain_error("survival_slope: need at least 100 uncensored samples");
  if (t_grid.size() < 4)
    throw std::domain_error("survival_slope: grid needs at least 4 points");
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    if (!(t_grid[j] > 0.0) || (j > 0 && t_grid[j] <= t_grid[j - 1]))
      throw std::domain_error("survival_slope: grid must be positive and strictly increasing");
    if (t_grid[j] >= max_unc)
      throw std::domain_error("survival_slope: grid must stay below the largest uncensored value");
  }

  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> log_t(t_grid.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j) log_t[j] = std::log(t_grid[j]);
  std::vector<double> log_s = log_survival(sorted, t_grid);

  SurvivalFit fit;
  fit.n_censored = n_cens;
  fit.estimate.point = least_squares(log_t, log_s).slope;
  fit.estimate.method = EstimatorMethod::survival_slope;
  fit.estimate.n_effective = n_unc;

  const std::size_t half = t_grid.size() / 2;
  std::vector<double> xs_lo(log_t.begin(), log_t.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<double> ys_lo(log_s.begin(), log_s.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<double> xs_hi(log_t.begin() + static_cast<std::ptrdiff_t>(half), log_t.end());
  std::vector<double> ys_hi(log_s.begin() + static_cast<std::ptrdiff_t>(half), log_s.end());
  fit.head_slope = least_squares(xs_lo, ys_lo).slope;
  fit.tail_slope = least_squares(xs_hi, ys_hi).slope;
  fit.all_moments_finite_hint =
      fit.tail_slope <= fit.head_slope - 0.75 && fit.tail_slope <= 1.4 * fit.head_slope;

  StreamKey key(hash_doubles(values, 0x53555256ULL + static_cast<std::uint64_t>(n_cens)));
  std::vector<double> boot(kBootstrapResamples);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < kBootstrapResamples; ++r) {
    SplitMix64 rng = key.child("bootstrap").child(static_cast<std::uint64_t>(r)).stream();
    std::vector<double> re(n);
    for (std::size_t i = 0; i < n; ++i) re[i] = values[draw_index(rng, n)];
    std::sort(re.begin(), re.end());
    std::vector<double> ls = log_survival(re, t_grid);
    bool ok = std::all_of(ls.begin(), ls.end(), [](double v) { return std::isfinite(v); });
    boot[static_cast<std::size_t>(r)] =
        ok ? least_squares(log_t, ls).slope : fit.estimate.point;
  }
  percentile_ci(boot, fit.estimate);
  return fit;
}

const char* to_string(MomentVerdict v) {
  switch (v) {
    case MomentVerdict::converging: return "converging";
    case MomentVerdict::diverging: return "diverging";
    case MomentVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

MomentVerdict moment_diagnostic(const std::vector<double>& samples, double p) {
  const std::size_t n = samples.size();
  if (n < 1000) throw std::domain_error("moment_diagnostic: need at least 1000 samples");
  for (double x : samples)
    if (!(x > 0.0) || !std::isfinite(x))
      throw std::invalid_argument("moment_diagnostic: samples must be positive and finite");

  std::vector<std::size_t> cuts = {n / 8, n / 4, n / 2, n};
  std::vector<double> running(cuts.size());
  double acc = 0.0, biggest = 0.0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = std::pow(samples[i], p);
    acc += w;
    biggest = std::max(biggest, w);
    while (next < cuts.size() && i + 1 == cuts[next]) {
      running[next] = acc / static_cast<double>(cuts[next]);
      ++next;
    }
  }
  double max_share = biggest / acc;

  bool settled = true;
  bool jumped = false;
  for (std::size_t j = 1; j < running.size(); ++j) {
    double ratio = running[j] / running[j - 1];
    settled = settled && std::abs(ratio - 1.0) < 0.1;
    jumped = jumped || ratio > 1.5;
  }
  if (settled) return MomentVerdict::converging;
  double total_growth = running.back() / running.front();
  if (max_share > 0.05 && (jumped || total_growth > 1.5 || max_share > 0.2))
    return MomentVerdict::diverging;
  return MomentVerdict::inconclusive;
}

std::vector<double> geometric_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2)
    throw std::domain_error("geometric_grid: need 0 < lo < hi and at least 2 points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  double step = (std::log(hi) - std::log(lo)) / static_cast<double>(points - 1);
  for (int j = 0; j < points; ++j)
    grid[static_cast<std::size_t>(j)] = std::exp(std::log(lo) + step * j);
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

}  // namespace heavywalk
