#pragma once

#include <limits>

namespace heavywalk {

enum class TailKind { pareto, pareto_log, bounded_uniform, constant, zero };

// One-sided jump magnitude law.  The heavy kinds have survival function
//   P[Z > x] = (x/x0)^(-alpha) * (log x / log x0)^phi   for x >= x0,  1 below,
// with phi = 0 for plain pareto.  bounded_uniform is uniform on [0, bound],
// constant is a point mass at bound, zero is a point mass at 0.
struct TailLaw {
  TailKind kind = TailKind::zero;
  double alpha = 1.0;      // tail exponent of the heavy kinds
  double cutoff_x0 = 1.0;  // support lower edge of the heavy kinds
  double log_phi = 0.0;    // slowly varying power (pareto_log only)
  double bound = 1.0;      // upper edge (bounded_uniform) or atom (constant)

  static TailLaw pareto(double alpha, double x0 = 1.0);
  static TailLaw pareto_log(double alpha, double phi, double x0);
  static TailLaw bounded_uniform(double b);
  static TailLaw constant(double v);
  static TailLaw zero();

  // Throws std::invalid_argument describing every violated constraint.
  void validate() const;

  // Inverse-transform sample from a uniform u in [0,1).
  double sample(double u) const;

  // P[Z > x], exact.
  double tail_prob(double x) const;

  // E[Z 1{Z <= z}], closed form where one exists, otherwise adaptive
  // quadrature of the survival-function identity.
  double truncated_mean(double z) const;

  // (alpha/(1-alpha)) z^{1-alpha} L(z); heavy kinds with alpha in (0,1) only.
  double karamata_asymptote(double z) const;

  // sup{p : E[Z^p] < infinity}; +inf for the bounded kinds.
  double moment_sup() const;

  // Polynomial tail exponent; +inf when the tail is eventually zero.
  double tail_exponent() const;

  bool heavy() const { return kind == TailKind::pareto || kind == TailKind::pareto_log; }

  static constexpr double inf = std::numeric_limits<double>::infinity();
};

}  // namespace heavywalk
