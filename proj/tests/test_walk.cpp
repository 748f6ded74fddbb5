#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "heavywalk/estimators.hpp"
#include "heavywalk/walk.hpp"

using namespace heavywalk;

namespace {

IncrementLaw make_law(TailLaw pos, TailLaw neg, double p_pos) {
  IncrementLaw law;
  law.pos = pos;
  law.neg = neg;
  law.sign.base_p = p_pos;
  law.validate();
  return law;
}

IncrementLaw escape_family() {
  return make_law(TailLaw::pareto(0.5, 1.0), TailLaw::bounded_uniform(1.0), 0.5);
}

std::vector<double> power_path(long long horizon, double exponent) {
  std::vector<double> path(static_cast<std::size_t>(horizon) + 1);
  for (long long t = 0; t <= horizon; ++t)
    path[static_cast<std::size_t>(t)] = std::pow(static_cast<double>(t), exponent);
  return path;
}

}  // namespace

TEST_CASE("sign rule bands override the base probability") {
  SignRule rule;
  rule.base_p = 0.5;
  rule.bands = {{-10.0, 0.0, 0.9}, {-10.0, 10.0, 0.1}};
  rule.validate();
  CHECK(rule.p_pos(0, -5.0) == 0.9);  // first matching band wins
  CHECK(rule.p_pos(0, 5.0) == 0.1);
  CHECK(rule.p_pos(0, 50.0) == 0.5);

  SignRule bad;
  bad.bands = {{1.0, 1.0, 0.5}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.bands = {{0.0, 1.0, 1.5}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("every law consumes exactly two uniforms per step") {
  IncrementLaw heavy = escape_family();
  IncrementLaw light = make_law(TailLaw::constant(1.0), TailLaw::zero(), 1.0);
  SplitMix64 r1(5), r2(5);
  heavy.sample(0, 0.0, r1);
  light.sample(0, 0.0, r2);
  CHECK(r1() == r2());
}

TEST_CASE("dyadic checkpoints cover zero, the powers of two and the horizon") {
  std::vector<long long> cps = dyadic_checkpoints(10);
  CHECK(cps == std::vector<long long>{0, 1, 2, 4, 8, 10});
  cps = dyadic_checkpoints(16);
  CHECK(cps == std::vector<long long>{0, 1, 2, 4, 8, 16});
  CHECK(std::is_sorted(cps.begin(), cps.end()));
}

TEST_CASE("deterministic unit drift resolves passage times exactly") {
  IncrementLaw up = make_law(TailLaw::constant(1.0), TailLaw::zero(), 1.0);
  WalkResult res = simulate_walk(up, 10, StreamKey(1), {5.0});
  REQUIRE(res.stopping.tau.size() == 1);
  CHECK(res.stopping.tau[0].time == 5);
  CHECK(res.stopping.tau[0].status == PassageStatus::reached);
  for (std::size_t i = 0; i < res.traj.times.size(); ++i)
    CHECK(res.traj.values[i] == static_cast<double>(res.traj.times[i]));

  IncrementLaw down = make_law(TailLaw::zero(), TailLaw::constant(1.0), 0.0);
  res = simulate_walk(down, 10, StreamKey(1), {3.0});
  CHECK(res.stopping.tau[0].time == 10);
  CHECK(res.stopping.tau[0].status == PassageStatus::censored);
}

TEST_CASE("first passage on explicit paths") {
  std::vector<double> path{0.0, -1.0, 3.0, 2.0};
  CHECK(first_passage(path, 2.0).time == 2);
  CHECK(first_passage(path, 2.0).status == PassageStatus::reached);
  CHECK(first_passage(path, 0.0).time == 0);
  PassageTime censored = first_passage(path, 5.0);
  CHECK(censored.time == 3);
  CHECK(censored.status == PassageStatus::censored);
  CHECK_THROWS_AS(first_passage(std::vector<double>{}, 1.0), std::invalid_argument);
}

TEST_CASE("last exit on explicit paths") {
  std::vector<double> path{0.0, -1.0, 3.0, 2.0, 5.0, 6.0};
  ExitTime e = last_exit(path, 2.0);
  CHECK(e.time == 3);
  CHECK(e.status == ExitStatus::resolved);

  e = last_exit(path, 10.0);
  CHECK(e.time == 5);
  CHECK(e.status == ExitStatus::unresolved);

  std::vector<double> positive{0.0, 5.0, 6.0, 7.0};
  e = last_exit(positive, -1.0);
  CHECK(e.status == ExitStatus::none);
}

TEST_CASE("streaming walk agrees with the dense reference") {
  IncrementLaw law = escape_family();
  std::vector<double> levels{1.0, 10.0, 100.0};
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    StreamKey key = StreamKey(seed).child("replica").child(0);
    std::vector<double> path = simulate_walk_dense(law, 5000, key);
    WalkResult streamed = simulate_walk(law, 5000, key, levels);
    Trajectory oracle = summarize_path(path);

    REQUIRE(streamed.traj.times == oracle.times);
    for (std::size_t i = 0; i < oracle.times.size(); ++i) {
      CHECK(streamed.traj.values[i] == oracle.values[i]);
      CHECK(streamed.traj.run_min[i] == oracle.run_min[i]);
      CHECK(streamed.traj.run_max[i] == oracle.run_max[i]);
      CHECK(streamed.traj.max_inc[i] == oracle.max_inc[i]);
    }
    for (std::size_t l = 0; l < levels.size(); ++l) {
      PassageTime tau = first_passage(path, levels[l]);
      CHECK(streamed.stopping.tau[l].time == tau.time);
      CHECK(streamed.stopping.tau[l].status == tau.status);
      ExitTime lambda = last_exit(path, levels[l]);
      CHECK(streamed.stopping.lambda[l].time == lambda.time);
      CHECK(streamed.stopping.lambda[l].status == lambda.status);
    }
  }
}

TEST_CASE("identical inputs give identical runs, different seeds differ") {
  IncrementLaw law = escape_family();
  WalkResult a = simulate_walk(law, 4096, StreamKey(77), {});
  WalkResult b = simulate_walk(law, 4096, StreamKey(77), {});
  CHECK(a.traj.values == b.traj.values);
  CHECK(a.traj.max_inc == b.traj.max_inc);

  WalkResult c = simulate_walk(law, 4096, StreamKey(78), {});
  CHECK(a.traj.values != c.traj.values);
}

TEST_CASE("passage and exit records are consistent with the path") {
  IncrementLaw law = escape_family();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    StreamKey key(1000 + seed);
    std::vector<double> path = simulate_walk_dense(law, 2000, key);
    WalkResult res = simulate_walk(law, 2000, key, {0.0, 5.0, 50.0});
    for (std::size_t l = 0; l < 3; ++l) {
      const PassageTime& tau = res.stopping.tau[l];
      if (tau.status == PassageStatus::reached)
        CHECK(path[static_cast<std::size_t>(tau.time)] >= res.stopping.levels[l]);
      const ExitTime& lambda = res.stopping.lambda[l];
      if (lambda.status == ExitStatus::resolved)
        for (std::size_t t = static_cast<std::size_t>(lambda.time) + 1; t < path.size(); ++t)
          CHECK(path[t] > res.stopping.levels[l]);
    }
  }
}

TEST_CASE("upper envelope arithmetic on deterministic paths") {
  Trajectory linear = summarize_path(power_path(10000, 1.0));
  EnvelopeCheck clean = count_upper_violations(linear, 1.0, 0.0, 0.5, 10);
  CHECK(clean.checked > 0);
  CHECK(clean.violations == 0);

  // t^4 against t^2 (log t)^{4.5}: the poly factor wins from t = 16 on
  Trajectory quartic = summarize_path(power_path(10000, 4.0));
  EnvelopeCheck dirty = count_upper_violations(quartic, 0.5, 0.0, 0.5, 10);
  CHECK(dirty.violations > 0);
  CHECK(dirty.first_violation == 16);
}

TEST_CASE("max increment envelope flags laws without heavy jumps") {
  // unit steps keep max_inc at 1, far below the heavy-tail growth envelope
  std::vector<double> path = power_path(100000, 1.0);
  Trajectory traj = summarize_path(path);
  EnvelopeCheck check = count_max_inc_violations(traj, 0.9, 0.5, 10);
  CHECK(check.violations > 0);

  // a burn-in beyond the horizon leaves nothing to check
  EnvelopeCheck empty = count_max_inc_violations(traj, 0.9, 0.5, 1000000000);
  CHECK(empty.checked == 0);
  CHECK(empty.violations == 0);
}

TEST_CASE("envelope preconditions") {
  Trajectory traj = summarize_path(power_path(100, 1.0));
  CHECK_THROWS_AS(count_upper_violations(traj, 1.0, 0.0, 0.5, 2), std::invalid_argument);
  CHECK_THROWS_AS(upper_envelope(1, 1.0, 0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(upper_envelope(10, 1.5, 0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(lower_envelope(10, 1.0, 0.5), std::domain_error);
}

TEST_CASE("heavy upward walks escape and oscillation is unbounded") {
  IncrementLaw law = escape_family();
  const int replicas = 200;
  const long long horizon = 1000000;
  int transient = 0, oscillating = 0;
  for (int i = 0; i < replicas; ++i) {
    WalkResult res =
        simulate_walk(law, horizon, StreamKey(555).child("replica").child(i), {});
    REQUIRE_FALSE(res.aborted);
    if (res.traj.values.back() > 0.0) ++transient;
    double span = std::max(res.traj.run_max.back(), -res.traj.run_min.back());
    if (span > 1000.0) ++oscillating;
  }
  CHECK(transient >= 198);    // one-sided transience
  CHECK(oscillating >= 190);  // |X| exceeds 10^3 somewhere along the path
}

TEST_CASE("escape rate shows up in the loglog slope at small scale") {
  IncrementLaw law = escape_family();
  std::vector<double> slopes;
  for (int i = 0; i < 20; ++i) {
    WalkResult res =
        simulate_walk(law, 100000, StreamKey(808).child("replica").child(i), {});
    slopes.push_back(loglog_slope(res.traj, 64).point);
  }
  std::nth_element(slopes.begin(), slopes.begin() + 10, slopes.end());
  double median = slopes[10];
  CHECK(median > 1.5);
  CHECK(median < 2.5);
}
