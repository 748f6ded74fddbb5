#include "heavywalk/excursions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heavywalk {

void ExcursionBuilder::step(bool member) {
  ++t_;
  if (t_ == 0 && !member) {
    throw std::invalid_argument("ExcursionBuilder: time 0 must belong to the set");
  }
  if (member) sigma_.push_back(t_);
}

ExcursionRecord ExcursionBuilder::finish() {
  if (t_ < 0) throw std::logic_error("ExcursionBuilder: no steps recorded");
  ExcursionRecord rec;
  rec.horizon = t_;
  rec.sigma = std::move(sigma_);
  rec.nu.reserve(rec.sigma.size());
  for (std::size_t n = 1; n < rec.sigma.size(); ++n) {
    rec.nu.push_back(rec.sigma[n] - rec.sigma[n - 1]);
  }
  rec.open_tail = rec.sigma.back() != rec.horizon;
  for (long long t = 1; t <= rec.horizon && t > 0; t *= 2) rec.visit_times.push_back(t);
  if (rec.visit_times.empty() || rec.visit_times.back() != rec.horizon) {
    rec.visit_times.push_back(rec.horizon);
  }
  rec.visits.reserve(rec.visit_times.size());
  std::size_t n = 0;
  for (long long t : rec.visit_times) {
    while (n + 1 < rec.sigma.size() && rec.sigma[n + 1] <= t) ++n;
    rec.visits.push_back(static_cast<long long>(n));
  }
  sigma_.clear();
  t_ = -1;
  return rec;
}

ExcursionRecord record_excursions(const std::vector<bool>& membership) {
  if (membership.empty()) throw std::invalid_argument("record_excursions: empty membership");
  ExcursionBuilder b;
  for (bool m : membership) b.step(m);
  return b.finish();
}

long long visits_at(const ExcursionRecord& rec, long long t) {
  auto it = std::upper_bound(rec.sigma.begin(), rec.sigma.end(), t);
  if (it == rec.sigma.begin()) throw std::domain_error("visits_at: t precedes time 0");
  return static_cast<long long>(it - rec.sigma.begin()) - 1;
}

namespace {

template <typename Fn>
GrowthCheck scan(long long from, long long to, Fn violated) {
  GrowthCheck out;
  for (long long i = from; i <= to; ++i) {
    ++out.checked;
    if (violated(i)) {
      ++out.violations;
      if (out.first_violation < 0) out.first_violation = i;
    }
  }
  return out;
}

}  // namespace

GrowthCheck sigma_growth_upper(const ExcursionRecord& rec, double gamma, double eps, long long n0) {
  if (!(gamma > 0.0)) throw std::domain_error("sigma_growth_upper: gamma must be positive");
  long long top = static_cast<long long>(rec.sigma.size()) - 1;
  double expo = 1.0 / std::min(gamma, 1.0) + eps;
  return scan(std::max<long long>(n0, 1), top, [&](long long n) {
    return static_cast<double>(rec.sigma[static_cast<std::size_t>(n)]) >
           std::pow(static_cast<double>(n), expo);
  });
}

GrowthCheck sigma_growth_lower(const ExcursionRecord& rec, double gamma, double eps, long long n0) {
  if (!(gamma > 0.0)) throw std::domain_error("sigma_growth_lower: gamma must be positive");
  long long top = static_cast<long long>(rec.sigma.size()) - 1;
  double expo = 1.0 / gamma - eps;
  return scan(std::max<long long>(n0, 1), top, [&](long long n) {
    return static_cast<double>(rec.sigma[static_cast<std::size_t>(n)]) <
           std::pow(static_cast<double>(n), expo);
  });
}

GrowthCheck visits_growth_lower(const ExcursionRecord& rec, double gamma, double eps, long long t0) {
  if (!(gamma > 0.0)) throw std::domain_error("visits_growth_lower: gamma must be positive");
  GrowthCheck out;
  double expo = std::min(gamma, 1.0) - eps;
  for (std::size_t i = 0; i < rec.visit_times.size(); ++i) {
    long long t = rec.visit_times[i];
    if (t < t0) continue;
    ++out.checked;
    if (static_cast<double>(rec.visits[i]) < std::pow(static_cast<double>(t), expo)) {
      ++out.violations;
      if (out.first_violation < 0) out.first_violation = t;
    }
  }
  return out;
}

GrowthCheck visits_growth_upper(const ExcursionRecord& rec, double gamma, double eps, long long t0) {
  if (!(gamma > 0.0)) throw std::domain_error("visits_growth_upper: gamma must be positive");
  GrowthCheck out;
  double expo = gamma + eps;
  for (std::size_t i = 0; i < rec.visit_times.size(); ++i) {
    long long t = rec.visit_times[i];
    if (t < t0) continue;
    ++out.checked;
    if (static_cast<double>(rec.visits[i]) > std::pow(static_cast<double>(t), expo)) {
      ++out.violations;
      if (out.first_violation < 0) out.first_violation = t;
    }
  }
  return out;
}

}  // namespace heavywalk
