#include "heavywalk/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace heavywalk {

LyapunovSpec LyapunovSpec::f_power_decay(double z, double delta) {
  LyapunovSpec s;
  s.kind = LyapunovKind::f_power_decay;
  s.z = z;
  s.delta = delta;
  s.validate();
  return s;
}

LyapunovSpec LyapunovSpec::w_power(double y, double gamma) {
  LyapunovSpec s;
  s.kind = LyapunovKind::w_power;
  s.y = y;
  s.gamma = gamma;
  s.validate();
  return s;
}

LyapunovSpec LyapunovSpec::concave_h(double theta) {
  LyapunovSpec s;
  s.kind = LyapunovKind::concave_h;
  s.theta = theta;
  s.validate();
  return s;
}

LyapunovSpec LyapunovSpec::identity() {
  LyapunovSpec s;
  s.kind = LyapunovKind::identity;
  return s;
}

void LyapunovSpec::validate() const {
  switch (kind) {
    case LyapunovKind::f_power_decay:
      if (!(delta > 0.0)) throw std::invalid_argument("LyapunovSpec: delta must be positive");
      break;
    case LyapunovKind::w_power:
      if (!(gamma > 0.0)) throw std::invalid_argument("LyapunovSpec: gamma must be positive");
      break;
    case LyapunovKind::concave_h:
      if (!(theta > 0.0)) throw std::invalid_argument("LyapunovSpec: theta must be positive");
      break;
    case LyapunovKind::identity:
      break;
  }
}

double eval_lyapunov(const LyapunovSpec& spec, double state) {
  spec.validate();
  switch (spec.kind) {
    case LyapunovKind::f_power_decay:
      if (state <= spec.z) return 1.0;
      return std::pow(1.0 + state - spec.z, -spec.delta);
    case LyapunovKind::w_power:
      if (state >= spec.y) return 0.0;
      return std::pow(spec.y - state, spec.gamma);
    case LyapunovKind::concave_h: {
      double a = std::pow(std::abs(state), spec.theta);
      return state < 0.0 ? -a : a;
    }
    case LyapunovKind::identity:
      return state;
  }
  return state;
}

namespace {

double capped_eval(const LyapunovSpec& spec, double state, long long& hits) {
  double v = eval_lyapunov(spec, state);
  if (v > kDriftValueCap) {
    ++hits;
    return kDriftValueCap;
  }
  if (v < -kDriftValueCap) {
    ++hits;
    return -kDriftValueCap;
  }
  return v;
}

}  // namespace

DriftEstimate drift_estimate(const IncrementLaw& law, const LyapunovSpec& spec, double state,
                             long long n, StreamKey seed) {
  if (n < 1000) throw std::domain_error("drift_estimate: need n >= 1000");
  law.validate();
  spec.validate();

  SplitMix64 rng = seed.child("samples").stream();
  DriftEstimate est;
  est.n = n;
  double base = capped_eval(spec, state, est.cap_hits);
  double sum = 0.0, sumsq = 0.0;
  for (long long i = 0; i < n; ++i) {
    double step = law.sample(0, state, rng);
    double d = capped_eval(spec, state + step, est.cap_hits) - base;
    sum += d;
    sumsq += d * d;
  }
  est.mean = sum / static_cast<double>(n);
  double var = std::max(sumsq / static_cast<double>(n) - est.mean * est.mean, 0.0);
  est.ci_half_width = 1.96 * std::sqrt(var / static_cast<double>(n));
  return est;
}

DriftTarget DriftTarget::supermartingale() { return {DriftDirection::supermartingale, 0.0, 0.0}; }
DriftTarget DriftTarget::submartingale() { return {DriftDirection::submartingale, 0.0, 0.0}; }
DriftTarget DriftTarget::strong_drift(double eta, double eps) {
  if (!(eta > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("DriftTarget: strong_drift needs eta > 0 and eps > 0");
  return {DriftDirection::strong_drift, eta, eps};
}

const char* to_string(DriftVerdict v) {
  switch (v) {
    case DriftVerdict::le_confirmed: return "le_confirmed";
    case DriftVerdict::ge_confirmed: return "ge_confirmed";
    case DriftVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

DriftReport verify_drift_region(const IncrementLaw& law, const LyapunovSpec& spec,
                                const std::vector<double>& grid, DriftTarget target, long long n,
                                StreamKey seed) {
  if (grid.empty()) throw std::invalid_argument("verify_drift_region: grid must be nonempty");
  const auto m = static_cast<long long>(grid.size());

  DriftReport rep;
  rep.grid = grid;
  rep.mean_drift.assign(grid.size(), 0.0);
  rep.ci_half_width.assign(grid.size(), 0.0);
  rep.threshold.assign(grid.size(), 0.0);
  rep.verdict.assign(grid.size(), DriftVerdict::inconclusive);
  rep.cap_hits.assign(grid.size(), 0);
  rep.n_samples = n;
  rep.target = target;

#pragma omp parallel for schedule(dynamic)
  for (long long j = 0; j < m; ++j) {
    auto idx = static_cast<std::size_t>(j);
    StreamKey state_key = seed.child("state").child(static_cast<std::uint64_t>(j));
    DriftEstimate est = drift_estimate(law, spec, grid[idx], n, state_key);
    double thr = 0.0;
    if (target.direction == DriftDirection::strong_drift) {
      double v = std::min(eval_lyapunov(spec, grid[idx]), kDriftValueCap);
      thr = -target.eps * std::pow(std::max(v, 0.0), target.eta);
    }
    rep.mean_drift[idx] = est.mean;
    rep.ci_half_width[idx] = est.ci_half_width;
    rep.threshold[idx] = thr;
    rep.cap_hits[idx] = est.cap_hits;
    if (est.mean + est.ci_half_width <= thr)
      rep.verdict[idx] = DriftVerdict::le_confirmed;
    else if (est.mean - est.ci_half_width >= thr)
      rep.verdict[idx] = DriftVerdict::ge_confirmed;
  }

  DriftVerdict want = target.direction == DriftDirection::submartingale
                          ? DriftVerdict::ge_confirmed
                          : DriftVerdict::le_confirmed;
  for (std::size_t j = 0; j + 2 < grid.size(); ++j) {
    if (rep.verdict[j] == want && rep.verdict[j + 1] == want && rep.verdict[j + 2] == want) {
      rep.stable_from = static_cast<long long>(j);
      break;
    }
  }
  return rep;
}

MaximalCheck maximal_inequality_check(const std::vector<double>& maxima,
                                      const std::vector<long long>& nu, double drift_bound,
                                      double z0_mean, const std::vector<double>& x_grid) {
  if (maxima.empty() || maxima.size() != nu.size())
    throw std::invalid_argument("maximal_inequality_check: maxima and nu must match and be nonempty");
  if (x_grid.empty())
    throw std::invalid_argument("maximal_inequality_check: x_grid must be nonempty");
  const auto r = static_cast<double>(maxima.size());
  double mean_nu = 0.0;
  for (long long v : nu) mean_nu += static_cast<double>(v);
  mean_nu /= r;

  MaximalCheck out;
  out.x_grid = x_grid;
  for (double x : x_grid) {
    if (!(x > 0.0))
      throw std::invalid_argument("maximal_inequality_check: grid values must be positive");
    long long hits = 0;
    for (double m : maxima) hits += m >= x ? 1 : 0;
    double p = static_cast<double>(hits) / r;
    double bound = (drift_bound * mean_nu + z0_mean) / x;
    double se = std::sqrt(p * (1.0 - p) / r);
    bool ok = p <= bound + 3.0 * se;
    out.empirical.push_back(p);
    out.bound.push_back(bound);
    out.pass.push_back(ok);
    out.all_pass = out.all_pass && ok;
  }
  return out;
}

const char* to_string(DeviationOutcome v) {
  switch (v) {
    case DeviationOutcome::pass: return "pass";
    case DeviationOutcome::fail: return "fail";
    case DeviationOutcome::trivially_pass: return "trivially_pass";
    case DeviationOutcome::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

MinDeviationCheck min_deviation_check(const IncrementLaw& law, double phi, double eps,
                                      const std::vector<long long>& t_grid, long long replicas,
                                      StreamKey seed) {
  if (!(phi > 0.0)) throw std::domain_error("min_deviation_check: phi must be positive");
  if (t_grid.size() < 2)
    throw std::invalid_argument("min_deviation_check: need at least 2 grid times");
  for (std::size_t j = 0; j < t_grid.size(); ++j)
    if (t_grid[j] < 2 || (j > 0 && t_grid[j] <= t_grid[j - 1]))
      throw std::invalid_argument("min_deviation_check: grid must be increasing with t >= 2");
  if (replicas < 100)
    throw std::invalid_argument("min_deviation_check: need at least 100 replicas");
  law.validate();

  MinDeviationCheck out;
  out.replicas = replicas;
  out.events.assign(t_grid.size(), 0);
  double beta = law.neg.moment_sup();
  out.theory_exponent = std::isfinite(beta) ? 1.0 - beta * phi
                                            : -std::numeric_limits<double>::infinity();

  // Bounded down steps of size at most b keep the running minimum above -b t,
  // so the event min <= -t^phi is impossible once t^{phi-1} > b.
  if (!law.neg.heavy() && phi > 1.0) {
    double b = law.neg.bound;
    bool impossible = true;
    for (long long t : t_grid)
      impossible = impossible && std::pow(static_cast<double>(t), phi - 1.0) > b;
    if (impossible) {
      out.outcome = DeviationOutcome::trivially_pass;
      return out;
    }
  }

  const long long horizon = t_grid.back();
  std::vector<long long> events(t_grid.size(), 0);
#pragma omp parallel
  {
    std::vector<long long> local(t_grid.size(), 0);
#pragma omp for schedule(static)
    for (long long r = 0; r < replicas; ++r) {
      SplitMix64 rng =
          seed.child("replica").child(static_cast<std::uint64_t>(r)).child("steps").stream();
      double x = 0.0, lo = 0.0;
      std::size_t next = 0;
      for (long long t = 1; t <= horizon && next < t_grid.size(); ++t) {
        x += law.sample(t - 1, x, rng);
        lo = std::min(lo, x);
        while (next < t_grid.size() && t == t_grid[next]) {
          double thr = -std::pow(static_cast<double>(t_grid[next]), phi);
          local[next] += lo <= thr ? 1 : 0;
          ++next;
        }
      }
    }
#pragma omp critical
    for (std::size_t j = 0; j < t_grid.size(); ++j) events[j] += local[j];
  }
  out.events = events;

  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    if (events[j] == 0) continue;
    xs.push_back(std::log(static_cast<double>(t_grid[j])));
    ys.push_back(std::log(static_cast<double>(events[j]) / static_cast<double>(replicas)));
  }
  if (xs.empty()) {
    out.outcome = DeviationOutcome::inconclusive;
    return out;
  }
  if (xs.size() < 2) {
    out.outcome = DeviationOutcome::inconclusive;
    return out;
  }

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double sxx = 0.0, sxy = 0.0, ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  out.slope = sxy / sxx;
  if (xs.size() > 2) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double rres = ys[i] - (my + out.slope * (xs[i] - mx));
      ssr += rres * rres;
    }
    out.slope_ci = 1.96 * std::sqrt(ssr / (static_cast<double>(xs.size() - 2) * sxx));
  }
  out.outcome = out.slope <= out.theory_exponent + eps + out.slope_ci ? DeviationOutcome::pass
                                                                      : DeviationOutcome::fail;
  return out;
}

}  // namespace heavywalk
