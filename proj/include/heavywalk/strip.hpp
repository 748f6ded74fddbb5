#pragma once

#include <map>
#include <string>
#include <vector>

#include "heavywalk/excursions.hpp"
#include "heavywalk/rng.hpp"
#include "heavywalk/walk.hpp"

namespace heavywalk {

enum class ChainKind { finite_ergodic, reflected_srw, lamperti };

// Line-switching chain of the strip model.  finite_ergodic is an arbitrary
// irreducible stochastic matrix on {0..k-1}; the other two kinds live on the
// nonnegative integers with state 0 as the distinguished boundary line.
struct InducedChainSpec {
  ChainKind kind = ChainKind::reflected_srw;

  // finite_ergodic
  int k = 2;
  std::vector<double> matrix;  // row-major k x k

  // lamperti: p(x) = (sigma2/2)(1 + (1/2-gamma)/x), q(x) mirrored, hold rest
  double gamma = 0.5;
  double sigma2 = 1.0;
  long long x_min = 1;

  void validate() const;
  bool positive_recurrent() const { return kind == ChainKind::finite_ergodic; }
  double return_tail_gamma() const;  // tail exponent of the return time to 0
  long long step(long long u, SplitMix64& rng) const;
};

// Nearest-neighbour chain whose return-time tail exponent is gamma; the mean
// drift at height x is exactly (1/2 - gamma) sigma2 / x and the step second
// moment is exactly sigma2.
InducedChainSpec build_lamperti(double gamma, double sigma2 = 1.0);

struct ReturnSample {
  std::vector<long long> nu;
  std::vector<bool> capped;
  int n_capped = 0;
};

// n independent return times to 0, each simulated on its own derived stream
// and cut off at cap steps.  Capped entries report nu = cap.
ReturnSample sample_return_times(const InducedChainSpec& spec, int n, long long cap,
                                 StreamKey key);

// Occupation counts of the chain alone over [0, horizon]; shares the stream
// label used by simulate_strip so equal keys give the identical line path.
std::map<long long, long long> simulate_induced(const InducedChainSpec& spec, long long horizon,
                                                StreamKey replica_key);

struct StripKernel {
  InducedChainSpec induced;
  IncrementLaw boundary_jump;  // vertical jump law on the boundary line
  IncrementLaw bulk_jump;      // vertical jump law on every other line
  void validate() const;
};

struct StripResult {
  Trajectory v;               // vertical component at dyadic checkpoints
  ExcursionRecord boundary;   // visits of the boundary line
  std::vector<bool> cp_on_boundary;  // membership at the same checkpoints
  bool aborted = false;
  long long abort_time = -1;
};

// Joint evolution: the vertical jump at step t uses the law of the line
// occupied at time t; magnitudes are rounded up to integers so V stays on the
// lattice (drift shifts are rounded to nearest).
StripResult simulate_strip(const StripKernel& kernel, long long horizon, StreamKey replica_key);

enum class Regime { boundary_dominates, bulk_dominates, unclassified };

struct RegimeReport {
  Regime regime = Regime::unclassified;
  double slope = 0.0;   // exponent of |V_t| growth when classified
  int direction = 0;    // +1 up, -1 down, 0 unclassified
  std::string basis;    // which hypothesis set fired, or why none did
};

// Pure arithmetic on the tail/moment exponents of the kernel laws, following
// the phase-diagram hypotheses; equalities between thresholds are reported as
// unclassified rather than resolved by fiat.
RegimeReport classify_regime(const StripKernel& kernel);

}  // namespace heavywalk
