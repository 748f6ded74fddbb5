#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "heavywalk/lyapunov.hpp"
#include "heavywalk/tails.hpp"
#include "heavywalk/walk.hpp"

using namespace heavywalk;

namespace {

IncrementLaw jump(TailLaw pos, TailLaw neg, double p_pos) {
  IncrementLaw law;
  law.pos = pos;
  law.neg = neg;
  law.sign.base_p = p_pos;
  law.validate();
  return law;
}

// Transient to +infinity, with down steps bounded by one.
IncrementLaw escape_family() {
  return jump(TailLaw::pareto(0.5, 1.0), TailLaw::bounded_uniform(1.0), 0.5);
}

std::vector<double> dyadic_grid(int lo_exp, int hi_exp, double sign) {
  std::vector<double> grid;
  for (int e = lo_exp; e <= hi_exp; ++e) grid.push_back(sign * static_cast<double>(1LL << e));
  return grid;
}

}  // namespace

TEST_CASE("test function evaluation matches the closed forms") {
  LyapunovSpec f = LyapunovSpec::f_power_decay(0.0, 1.0);
  CHECK(eval_lyapunov(f, 1.0) == doctest::Approx(0.5));
  CHECK(eval_lyapunov(f, -3.0) == doctest::Approx(1.0));
  CHECK(eval_lyapunov(f, 0.0) == doctest::Approx(1.0));

  LyapunovSpec w = LyapunovSpec::w_power(5.0, 0.5);
  CHECK(eval_lyapunov(w, 5.0) == doctest::Approx(0.0));
  CHECK(eval_lyapunov(w, 7.0) == doctest::Approx(0.0));
  CHECK(eval_lyapunov(w, 1.0) == doctest::Approx(2.0));

  LyapunovSpec h = LyapunovSpec::concave_h(2.0);
  CHECK(eval_lyapunov(h, -3.0) == doctest::Approx(-9.0));
  CHECK(eval_lyapunov(h, 5.0) == doctest::Approx(25.0));

  CHECK(eval_lyapunov(LyapunovSpec::identity(), -7.5) == doctest::Approx(-7.5));
}

TEST_CASE("decay transform stays within the unit interval and is monotone") {
  LyapunovSpec f = LyapunovSpec::f_power_decay(2.0, 0.6);
  double prev = 2.0;
  for (double x = -10.0; x <= 200.0; x += 0.5) {
    double v = eval_lyapunov(f, x);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(v <= prev + 1e-15);
    if (x <= 2.0) CHECK(v == doctest::Approx(1.0));
    prev = v;
  }
}

TEST_CASE("spec validation rejects non positive exponents") {
  CHECK_THROWS_AS(LyapunovSpec::f_power_decay(0.0, 0.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(LyapunovSpec::w_power(0.0, -1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(LyapunovSpec::concave_h(0.0).validate(), std::invalid_argument);
  CHECK_NOTHROW(LyapunovSpec::identity().validate());
  CHECK_THROWS_AS(DriftTarget::strong_drift(0.0, 0.1), std::invalid_argument);
}

TEST_CASE("drift of a fair coin under the identity is flat") {
  IncrementLaw coin = jump(TailLaw::constant(1.0), TailLaw::constant(1.0), 0.5);
  DriftEstimate est = drift_estimate(coin, LyapunovSpec::identity(), 0.0, 4096, StreamKey(71));
  CHECK(std::fabs(est.mean) <= 3.0 * est.ci_half_width);
  CHECK(std::fabs(est.mean) < 0.1);
  CHECK(est.cap_hits == 0);
  CHECK(est.n == 4096);
}

TEST_CASE("deterministic steps give an exact drift with zero interval") {
  IncrementLaw up_one = jump(TailLaw::constant(1.0), TailLaw::zero(), 1.0);
  DriftEstimate est =
      drift_estimate(up_one, LyapunovSpec::concave_h(2.0), 5.0, 2000, StreamKey(72));
  CHECK(est.mean == doctest::Approx(11.0).epsilon(1e-12));  // 36 - 25
  CHECK(est.ci_half_width == doctest::Approx(0.0));
  CHECK(est.cap_hits == 0);

  CHECK_THROWS_AS(drift_estimate(up_one, LyapunovSpec::identity(), 0.0, 999, StreamKey(73)),
                  std::domain_error);
}

TEST_CASE("escape family is a supermartingale under the decay transform") {
  DriftReport rep =
      verify_drift_region(escape_family(), LyapunovSpec::f_power_decay(0.0, 0.75),
                          dyadic_grid(1, 10, 1.0), DriftTarget::supermartingale(), 20000,
                          StreamKey(81));
  REQUIRE(rep.grid.size() == 10);
  CHECK(rep.stable_from == 0);
  for (std::size_t i = 0; i < rep.verdict.size(); ++i) {
    CHECK(rep.verdict[i] == DriftVerdict::le_confirmed);
    CHECK(rep.mean_drift[i] < 0.0);
    CHECK(rep.threshold[i] == doctest::Approx(0.0));
  }
}

TEST_CASE("heavy down jumps flip the decay transform into a submartingale") {
  IncrementLaw law = jump(TailLaw::bounded_uniform(1.0), TailLaw::pareto(0.75, 1.0), 0.5);
  DriftReport rep = verify_drift_region(law, LyapunovSpec::f_power_decay(0.0, 0.5),
                                        dyadic_grid(1, 10, 1.0), DriftTarget::submartingale(),
                                        20000, StreamKey(82));
  CHECK(rep.stable_from == 0);
  for (auto v : rep.verdict) CHECK(v == DriftVerdict::ge_confirmed);
}

TEST_CASE("power transform shows strong drift on the negative axis") {
  DriftReport rep = verify_drift_region(escape_family(), LyapunovSpec::w_power(0.0, 8.0 / 7.0),
                                        dyadic_grid(1, 10, -1.0),
                                        DriftTarget::strong_drift(0.375, 0.02), 20000,
                                        StreamKey(83));
  CHECK(rep.stable_from == 0);
  for (std::size_t i = 0; i < rep.verdict.size(); ++i) {
    CHECK(rep.verdict[i] == DriftVerdict::le_confirmed);
    CHECK(rep.threshold[i] < 0.0);
  }
}

TEST_CASE("asking for the wrong direction finds no stable region") {
  DriftReport rep =
      verify_drift_region(escape_family(), LyapunovSpec::f_power_decay(0.0, 0.75),
                          dyadic_grid(1, 8, 1.0), DriftTarget::submartingale(), 20000,
                          StreamKey(84));
  CHECK(rep.stable_from == -1);
}

TEST_CASE("maximal inequality holds for a stopped increasing process") {
  // sqrt of a heavy jump has mean exactly 6, so 6 bounds the per-step drift
  TailLaw mag = TailLaw::pareto(0.6, 1.0);
  auto rng = StreamKey(91).stream();
  const int R = 10000;
  std::vector<double> maxima(R);
  std::vector<long long> nu(R);
  for (int i = 0; i < R; ++i) {
    long long steps = 1;
    while (rng.u01() >= 0.1) ++steps;  // geometric stopping time, mean 10
    double z = 0.0;
    for (long long s = 0; s < steps; ++s) z += std::sqrt(mag.sample(rng.u01()));
    maxima[i] = z;
    nu[i] = steps;
  }
  MaximalCheck chk = maximal_inequality_check(maxima, nu, 6.0, 0.0, {10.0, 100.0, 1000.0});
  CHECK(chk.all_pass);
  REQUIRE(chk.empirical.size() == 3);
  CHECK(chk.empirical[0] > chk.empirical[2]);  // survival decreases along the grid
  double mean_nu = 0.0;
  for (long long v : nu) mean_nu += static_cast<double>(v);
  mean_nu /= R;
  CHECK(mean_nu == doctest::Approx(10.0).epsilon(0.1));
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(chk.bound[j] == doctest::Approx(6.0 * mean_nu / chk.x_grid[j]));

  CHECK_THROWS_AS(maximal_inequality_check({1.0}, {1, 2}, 1.0, 0.0, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(maximal_inequality_check({1.0}, {1}, 1.0, 0.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(maximal_inequality_check({1.0}, {1}, 1.0, 0.0, {-2.0}), std::invalid_argument);
}

TEST_CASE("bounded down steps make large minima impossible") {
  MinDeviationCheck chk = min_deviation_check(escape_family(), 2.0, 0.1, {4, 16, 64, 256}, 1000,
                                              StreamKey(92));
  CHECK(chk.outcome == DeviationOutcome::trivially_pass);
}

TEST_CASE("minimum deviation decay matches the down jump moment") {
  IncrementLaw law = jump(TailLaw::pareto(0.5, 1.0), TailLaw::pareto(2.0, 1.0), 0.5);
  MinDeviationCheck chk =
      min_deviation_check(law, 1.0, 0.3, {4, 16, 64, 256, 1024}, 20000, StreamKey(93));
  CHECK(chk.theory_exponent == doctest::Approx(-1.0));
  CHECK(chk.outcome == DeviationOutcome::pass);
  CHECK(chk.events[0] > chk.events[3]);

  CHECK_THROWS_AS(min_deviation_check(law, 0.0, 0.1, {4, 16}, 1000, StreamKey(94)),
                  std::domain_error);
  CHECK_THROWS_AS(min_deviation_check(law, 1.0, 0.1, {4}, 1000, StreamKey(94)),
                  std::invalid_argument);
  CHECK_THROWS_AS(min_deviation_check(law, 1.0, 0.1, {4, 16}, 50, StreamKey(94)),
                  std::invalid_argument);
}

TEST_CASE("square root transform tames growth to nearly linear") {
  // With E[sqrt(jump)] finite the transformed walk gains at most a constant
  // per step, so X_t should sit below (t log^1.5 t)^2 eventually.
  IncrementLaw law = jump(TailLaw::pareto(0.6, 1.0), TailLaw::zero(), 1.0);
  LyapunovSpec h = LyapunovSpec::concave_h(0.5);
  int clean = 0;
  for (int i = 0; i < 100; ++i) {
    Trajectory traj =
        simulate_walk(law, 100000, StreamKey(95).child("replica").child(i), {}).traj;
    bool ok = true;
    for (std::size_t j = 0; j < traj.times.size(); ++j) {
      long long t = traj.times[j];
      if (t < 1000) continue;
      double cap = static_cast<double>(t) * std::pow(std::log(static_cast<double>(t)), 1.5);
      ok = ok && eval_lyapunov(h, traj.values[j]) <= cap;
    }
    clean += ok ? 1 : 0;
  }
  CHECK(clean >= 95);
}
