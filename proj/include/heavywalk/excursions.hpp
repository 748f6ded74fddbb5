#pragma once

#include <vector>

namespace heavywalk {

// Visit times of a distinguished set, inter-visit gaps and the visit counter
// N(t) sampled at dyadic checkpoints.  Time 0 must be a visit.
struct ExcursionRecord {
  std::vector<long long> sigma;        // sigma[0] = 0, strictly increasing
  std::vector<long long> nu;           // nu[n] = sigma[n+1] - sigma[n]
  std::vector<long long> visit_times;  // dyadic checkpoints
  std::vector<long long> visits;       // N(t) = max{n : sigma[n] <= t}
  long long horizon = 0;
  bool open_tail = false;  // horizon reached away from the set: last gap censored
};

// Incremental recorder: feed membership step by step.  The first pushed value
// is the membership at time 0 and must be true.
class ExcursionBuilder {
 public:
  void step(bool member);
  ExcursionRecord finish();
  long long now() const { return t_; }

 private:
  std::vector<long long> sigma_;
  long long t_ = -1;
};

ExcursionRecord record_excursions(const std::vector<bool>& membership);

// N(t) for an arbitrary t, from the visit times.
long long visits_at(const ExcursionRecord& rec, long long t);

struct GrowthCheck {
  int checked = 0;
  int violations = 0;
  long long first_violation = -1;  // index n or time t of the first violation
};

// sigma_n <= n^{1/(gamma∧1)+eps} for n >= n0.
GrowthCheck sigma_growth_upper(const ExcursionRecord& rec, double gamma, double eps, long long n0);
// sigma_n >= n^{1/gamma-eps} for n >= n0.
GrowthCheck sigma_growth_lower(const ExcursionRecord& rec, double gamma, double eps, long long n0);
// N(t) >= t^{(gamma∧1)-eps} at checkpoints t >= t0.
GrowthCheck visits_growth_lower(const ExcursionRecord& rec, double gamma, double eps, long long t0);
// N(t) <= t^{gamma+eps} at checkpoints t >= t0.
GrowthCheck visits_growth_upper(const ExcursionRecord& rec, double gamma, double eps, long long t0);

}  // namespace heavywalk
