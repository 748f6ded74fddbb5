#include "heavywalk/strip.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace heavywalk {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

bool strongly_connected(int k, const std::vector<double>& m) {
  auto reach = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(k), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int a = stack.back();
      stack.pop_back();
      for (int b = 0; b < k; ++b) {
        double w = transpose ? m[static_cast<std::size_t>(b * k + a)]
                             : m[static_cast<std::size_t>(a * k + b)];
        if (w > 0.0 && !seen[static_cast<std::size_t>(b)]) {
          seen[static_cast<std::size_t>(b)] = 1;
          stack.push_back(b);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reach(false) && reach(true);
}

}  // namespace

void InducedChainSpec::validate() const {
  switch (kind) {
    case ChainKind::finite_ergodic: {
      require(k >= 1, "InducedChainSpec: finite_ergodic needs k >= 1");
      require(matrix.size() == static_cast<std::size_t>(k) * static_cast<std::size_t>(k),
              "InducedChainSpec: matrix must be k x k");
      for (int a = 0; a < k; ++a) {
        double row = 0.0;
        for (int b = 0; b < k; ++b) {
          double w = matrix[static_cast<std::size_t>(a * k + b)];
          require(w >= 0.0, "InducedChainSpec: negative transition weight");
          row += w;
        }
        require(std::abs(row - 1.0) <= 1e-9, "InducedChainSpec: row does not sum to 1");
      }
      require(strongly_connected(k, matrix), "InducedChainSpec: matrix not irreducible");
      break;
    }
    case ChainKind::reflected_srw:
      break;
    case ChainKind::lamperti: {
      require(gamma > 0.0 && gamma <= 1.0, "InducedChainSpec: lamperti gamma outside (0,1]");
      require(sigma2 > 0.0 && sigma2 <= 1.0, "InducedChainSpec: lamperti sigma2 outside (0,1]");
      require(x_min >= 1, "InducedChainSpec: lamperti x_min must be >= 1");
      double d = std::abs(0.5 - gamma) / static_cast<double>(x_min);
      require(0.5 * sigma2 * (1.0 + d) <= 1.0 && d <= 1.0,
              "InducedChainSpec: lamperti probabilities invalid at x_min");
      break;
    }
  }
}

double InducedChainSpec::return_tail_gamma() const {
  switch (kind) {
    case ChainKind::reflected_srw:
      return 0.5;
    case ChainKind::lamperti:
      return gamma;
    case ChainKind::finite_ergodic:
      return TailLaw::inf;  // geometric return tails beat any polynomial
  }
  return TailLaw::inf;
}

long long InducedChainSpec::step(long long u, SplitMix64& rng) const {
  double w = rng.u01();
  switch (kind) {
    case ChainKind::finite_ergodic: {
      long long a = u;
      double acc = 0.0;
      for (int b = 0; b < k; ++b) {
        acc += matrix[static_cast<std::size_t>(a * k + b)];
        if (w < acc) return b;
      }
      return k - 1;
    }
    case ChainKind::reflected_srw:
      if (u == 0) return 1;
      return w < 0.5 ? u + 1 : u - 1;
    case ChainKind::lamperti: {
      if (u == 0) return w < 0.5 * sigma2 ? 1 : 0;
      double p, q;
      if (u >= x_min) {
        double d = (0.5 - gamma) / static_cast<double>(u);
        p = 0.5 * sigma2 * (1.0 + d);
        q = 0.5 * sigma2 * (1.0 - d);
      } else {
        // Only reachable when x_min > 1; keep the chain moving with the
        // drift-free part of the kernel there.
        p = q = 0.5 * sigma2;
      }
      if (w < p) return u + 1;
      if (w < p + q) return u - 1;
      return u;
    }
  }
  return u;
}

InducedChainSpec build_lamperti(double gamma, double sigma2) {
  InducedChainSpec spec;
  spec.kind = ChainKind::lamperti;
  spec.gamma = gamma;
  spec.sigma2 = sigma2;
  spec.x_min = 1;
  double d = std::abs(0.5 - gamma);
  if (0.5 * sigma2 * (1.0 + d / spec.x_min) > 1.0 || d / spec.x_min > 1.0) {
    spec.x_min = static_cast<long long>(std::ceil(d)) + 1;
  }
  spec.validate();
  return spec;
}

ReturnSample sample_return_times(const InducedChainSpec& spec, int n, long long cap,
                                 StreamKey key) {
  if (n < 1) throw std::invalid_argument("sample_return_times: n must be >= 1");
  if (cap < 1) throw std::invalid_argument("sample_return_times: cap must be >= 1");
  spec.validate();
  ReturnSample out;
  out.nu.assign(static_cast<std::size_t>(n), 0);
  out.capped.assign(static_cast<std::size_t>(n), false);

#pragma omp parallel for schedule(dynamic, 64)
  for (int i = 0; i < n; ++i) {
    SplitMix64 rng = key.child("excursion").child(static_cast<std::uint64_t>(i)).stream();
    long long u = 0;
    long long t = 0;
    do {
      u = spec.step(u, rng);
      ++t;
    } while (u != 0 && t < cap);
    out.nu[static_cast<std::size_t>(i)] = t;
    out.capped[static_cast<std::size_t>(i)] = (u != 0);
  }
  for (bool c : out.capped) out.n_capped += c ? 1 : 0;
  return out;
}

std::map<long long, long long> simulate_induced(const InducedChainSpec& spec, long long horizon,
                                                StreamKey replica_key) {
  spec.validate();
  SplitMix64 rng = replica_key.child("induced").stream();
  std::map<long long, long long> occupancy;
  long long u = 0;
  ++occupancy[u];
  for (long long t = 1; t <= horizon; ++t) {
    u = spec.step(u, rng);
    ++occupancy[u];
  }
  return occupancy;
}

void StripKernel::validate() const {
  induced.validate();
  boundary_jump.validate();
  bulk_jump.validate();
}

StripResult simulate_strip(const StripKernel& kernel, long long horizon, StreamKey replica_key) {
  if (horizon < 2) throw std::invalid_argument("simulate_strip: horizon must be >= 2");
  kernel.validate();

  SplitMix64 chain_rng = replica_key.child("induced").stream();
  SplitMix64 jump_rng = replica_key.child("vjump").stream();

  StripResult out;
  out.v.horizon = horizon;
  std::vector<long long> cps = dyadic_checkpoints(horizon);
  std::size_t next_cp = 0;

  ExcursionBuilder builder;
  long long u = 0;
  double v = 0.0, lo = 0.0, hi = 0.0, biggest_up = 0.0;

  auto note_state = [&](long long t) {
    if (next_cp < cps.size() && t == cps[next_cp]) {
      out.v.times.push_back(t);
      out.v.values.push_back(v);
      out.v.run_min.push_back(lo);
      out.v.run_max.push_back(hi);
      out.v.max_inc.push_back(biggest_up);
      out.cp_on_boundary.push_back(u == 0);
      ++next_cp;
    }
  };

  builder.step(u == 0);
  note_state(0);
  for (long long t = 1; t <= horizon; ++t) {
    const IncrementLaw& law = (u == 0) ? kernel.boundary_jump : kernel.bulk_jump;
    double u_sign = jump_rng.u01();
    double u_mag = jump_rng.u01();
    bool up = u_sign < law.sign.p_pos(t - 1, v);
    double mag = std::ceil((up ? law.pos : law.neg).sample(u_mag));
    double d = (up ? mag : -mag) + static_cast<double>(std::llround(law.drift_shift));
    v += d;
    if (!std::isfinite(v)) {
      out.aborted = true;
      out.abort_time = t;
      break;
    }
    u = kernel.induced.step(u, chain_rng);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    if (d > biggest_up) biggest_up = d;
    builder.step(u == 0);
    note_state(t);
  }
  out.boundary = builder.finish();
  return out;
}

namespace {

// Heavier-tail threshold shared by the jump laws relevant to a hypothesis
// set: the largest p with all listed moments E[Z^p] uniformly bounded.
double min_moment_sup(std::initializer_list<const TailLaw*> laws) {
  double m = TailLaw::inf;
  for (const TailLaw* law : laws) m = std::min(m, law->moment_sup());
  return m;
}

}  // namespace

RegimeReport classify_regime(const StripKernel& kernel) {
  kernel.validate();
  RegimeReport rep;

  const TailLaw& b_pos = kernel.boundary_jump.pos;
  const TailLaw& b_neg = kernel.boundary_jump.neg;
  const TailLaw& k_pos = kernel.bulk_jump.pos;
  const TailLaw& k_neg = kernel.bulk_jump.neg;

  double a_tail = b_pos.tail_exponent();        // boundary up-jump tail
  double b_tail = k_neg.tail_exponent();        // bulk down-jump tail
  bool heavy_boundary_up = b_pos.heavy() && a_tail > 0.0 && a_tail < 1.0;

  if (kernel.induced.positive_recurrent()) {
    // Ergodic line chain: vertical growth driven by the boundary up-tail as
    // long as every other jump moment beats it.
    if (!heavy_boundary_up) {
      rep.basis = "positive-recurrent chain without heavy boundary up-tail";
      return rep;
    }
    double other = min_moment_sup({&b_neg, &k_pos, &k_neg});
    if (other > a_tail) {
      rep.regime = Regime::boundary_dominates;
      rep.slope = 1.0 / a_tail;
      rep.direction = +1;
      rep.basis = "positive-recurrent phase";
      return rep;
    }
    rep.basis = other == a_tail ? "threshold equality (moment sup = boundary tail)"
                                : "boundary up-tail not dominant";
    return rep;
  }

  double g = kernel.induced.return_tail_gamma();

  // Boundary-dominated null-recurrent phase: heavy boundary up-jumps against
  // moment-bounded everything else; fires when a_tail < g * min(beta_sup, 1).
  if (heavy_boundary_up) {
    double beta_sup = min_moment_sup({&b_neg, &k_pos, &k_neg});
    double cap = g * std::min(beta_sup, 1.0);
    if (a_tail < cap) {
      rep.regime = Regime::boundary_dominates;
      rep.slope = g / a_tail;
      rep.direction = +1;
      rep.basis = "null-recurrent boundary phase";
      return rep;
    }
    if (a_tail == cap) {
      rep.basis = "threshold equality (alpha = gamma * min(beta,1))";
      return rep;
    }
  }

  // Bulk-dominated phase: heavy bulk down-jumps with beta < 1, boundary jump
  // moments reaching past gamma*beta; fires when gamma*beta < min(a_sup, 1).
  if (g < 1.0 && k_neg.heavy() && b_tail > 0.0 && b_tail < 1.0 && k_pos.moment_sup() > b_tail) {
    double a_sup = std::min(min_moment_sup({&b_pos, &b_neg}), 1.0);
    if (g * b_tail < a_sup) {
      rep.regime = Regime::bulk_dominates;
      rep.slope = 1.0 / b_tail;
      rep.direction = -1;
      rep.basis = "bulk-dominated phase";
      return rep;
    }
    if (g * b_tail == a_sup) {
      rep.basis = "threshold equality (gamma * beta = boundary moment sup)";
      return rep;
    }
  }

  rep.basis = "no hypothesis set satisfied";
  return rep;
}

}  // namespace heavywalk
