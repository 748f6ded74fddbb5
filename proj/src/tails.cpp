#include "heavywalk/tails.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace heavywalk {

namespace {

// Survival function of the heavy kinds evaluated above the cutoff.
double heavy_survival(const TailLaw& law, double x) {
  double s = std::pow(x / law.cutoff_x0, -law.alpha);
  if (law.kind == TailKind::pareto_log) {
    s *= std::pow(std::log(x) / std::log(law.cutoff_x0), law.log_phi);
  }
  return s;
}

// Adaptive Simpson on [a,b] with absolute tolerance budget tol.
double simpson(double (*f)(const TailLaw&, double), const TailLaw& law, double a, double b,
               double fa, double fm, double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(law, lm), frm = f(law, rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson(f, law, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, law, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Integrand for the truncated-mean identity, on the log scale: the identity
// integral of P[Z > y] dy over [x0, z] becomes S(e^w) e^w dw.
double log_scale_survival(const TailLaw& law, double w) {
  double x = std::exp(w);
  return heavy_survival(law, x) * x;
}

double integrate_survival(const TailLaw& law, double lo, double hi) {
  if (hi <= lo) return 0.0;
  double a = std::log(lo), b = std::log(hi);
  double fa = log_scale_survival(law, a);
  double fm = log_scale_survival(law, 0.5 * (a + b));
  double fb = log_scale_survival(law, b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double tol = 1e-9 * std::max(1.0, std::abs(whole));
  return simpson(log_scale_survival, law, a, b, fa, fm, fb, whole, tol, 48);
}

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument("TailLaw: " + what); }

}  // namespace

TailLaw TailLaw::pareto(double alpha, double x0) {
  TailLaw law;
  law.kind = TailKind::pareto;
  law.alpha = alpha;
  law.cutoff_x0 = x0;
  law.validate();
  return law;
}

TailLaw TailLaw::pareto_log(double alpha, double phi, double x0) {
  TailLaw law;
  law.kind = TailKind::pareto_log;
  law.alpha = alpha;
  law.log_phi = phi;
  law.cutoff_x0 = x0;
  law.validate();
  return law;
}

TailLaw TailLaw::bounded_uniform(double b) {
  TailLaw law;
  law.kind = TailKind::bounded_uniform;
  law.bound = b;
  law.validate();
  return law;
}

TailLaw TailLaw::constant(double v) {
  TailLaw law;
  law.kind = TailKind::constant;
  law.bound = v;
  law.validate();
  return law;
}

TailLaw TailLaw::zero() {
  TailLaw law;
  law.kind = TailKind::zero;
  return law;
}

void TailLaw::validate() const {
  switch (kind) {
    case TailKind::pareto:
    case TailKind::pareto_log: {
      if (!(alpha > 0.0)) fail("pareto kinds need alpha > 0");
      if (!(cutoff_x0 >= 1.0)) fail("cutoff_x0 must be >= 1");
      if (kind == TailKind::pareto_log) {
        if (!(cutoff_x0 > 1.0)) fail("pareto_log needs cutoff_x0 > 1 so log x0 > 0");
        // phi > 0 bends the survival function upward near the cutoff; keep it
        // monotone on the whole support.
        if (log_phi > 0.0 && !(alpha * std::log(cutoff_x0) >= log_phi)) {
          fail("pareto_log with phi > 0 needs alpha*log(x0) >= phi for a monotone tail");
        }
      }
      break;
    }
    case TailKind::bounded_uniform:
      if (!(bound > 0.0)) fail("bounded_uniform needs bound > 0");
      break;
    case TailKind::constant:
      if (!(bound >= 0.0)) fail("constant needs bound >= 0");
      break;
    case TailKind::zero:
      break;
  }
}

double TailLaw::sample(double u) const {
  if (!(u >= 0.0) || u >= 1.0) throw std::domain_error("TailLaw::sample: u outside [0,1)");
  switch (kind) {
    case TailKind::pareto: {
      double s = 1.0 - u;
      // pow is the hot spot in long simulations; the common exponents have
      // cheaper exact forms.
      if (alpha == 0.5) return cutoff_x0 / (s * s);
      if (alpha == 1.0) return cutoff_x0 / s;
      if (alpha == 2.0) return cutoff_x0 / std::sqrt(s);
      return cutoff_x0 * std::pow(s, -1.0 / alpha);
    }
    case TailKind::pareto_log: {
      // Solve S(x) = 1-u on the log scale.  With y = log x, y0 = log x0:
      //   g(y) = -alpha (y - y0) + phi (log y - log y0) = log(1-u),
      // g is strictly decreasing on [y0, inf) by the validation constraint.
      double target = std::log1p(-u);
      double y0 = std::log(cutoff_x0);
      double y = y0 - target / alpha;  // exact when phi == 0
      if (log_phi == 0.0) return std::exp(y);
      double lo = y0, hi = y;
      // Expand the bracket until g(hi) <= target.
      auto g = [&](double yy) { return -alpha * (yy - y0) + log_phi * (std::log(yy) - std::log(y0)); };
      while (g(hi) > target) hi = y0 + 2.0 * (hi - y0) + 1.0;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double gm = g(mid);
        double d = -alpha + log_phi / mid;
        // Newton step from the midpoint, kept inside the bracket.
        double next = mid - (gm - target) / d;
        if (gm > target) lo = mid; else hi = mid;
        if (next > lo && next < hi) {
          double gn = g(next);
          if (gn > target) lo = next; else hi = next;
        }
        if (hi - lo < 1e-14 * std::max(1.0, hi)) break;
      }
      return std::exp(0.5 * (lo + hi));
    }
    case TailKind::bounded_uniform:
      return u * bound;
    case TailKind::constant:
      return bound;
    case TailKind::zero:
      return 0.0;
  }
  return 0.0;
}

double TailLaw::tail_prob(double x) const {
  switch (kind) {
    case TailKind::pareto:
    case TailKind::pareto_log:
      if (x < cutoff_x0) return 1.0;
      return heavy_survival(*this, x);
    case TailKind::bounded_uniform:
      if (x < 0.0) return 1.0;
      if (x >= bound) return 0.0;
      return 1.0 - x / bound;
    case TailKind::constant:
      return x < bound ? 1.0 : 0.0;
    case TailKind::zero:
      return x < 0.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

double TailLaw::truncated_mean(double z) const {
  switch (kind) {
    case TailKind::pareto: {
      if (z < cutoff_x0) return 0.0;
      if (alpha == 1.0) return cutoff_x0 * std::log(z / cutoff_x0);
      double a = alpha, x0 = cutoff_x0;
      return a * std::pow(x0, a) * (std::pow(z, 1.0 - a) - std::pow(x0, 1.0 - a)) / (1.0 - a);
    }
    case TailKind::pareto_log: {
      // No closed form: use the identity E[Z 1{Z<=z}] = int_0^z P[Z>y] dy - z P[Z>z].
      if (z < cutoff_x0) return 0.0;
      double integral = cutoff_x0 + integrate_survival(*this, cutoff_x0, z);
      return integral - z * heavy_survival(*this, z);
    }
    case TailKind::bounded_uniform:
      if (z <= 0.0) return 0.0;
      if (z >= bound) return 0.5 * bound;
      return 0.5 * z * z / bound;
    case TailKind::constant:
      return bound <= z ? bound : 0.0;
    case TailKind::zero:
      return 0.0;
  }
  return 0.0;
}

double TailLaw::karamata_asymptote(double z) const {
  if (!heavy()) throw std::domain_error("karamata_asymptote: law has no regularly varying tail");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("karamata_asymptote: needs alpha in (0,1)");
  }
  if (!(z > cutoff_x0)) throw std::domain_error("karamata_asymptote: z must exceed the cutoff");
  double slowly = std::pow(cutoff_x0, alpha);
  if (kind == TailKind::pareto_log) {
    slowly *= std::pow(std::log(z) / std::log(cutoff_x0), log_phi);
  }
  return alpha / (1.0 - alpha) * std::pow(z, 1.0 - alpha) * slowly;
}

double TailLaw::moment_sup() const {
  return heavy() ? alpha : inf;
}

double TailLaw::tail_exponent() const {
  return heavy() ? alpha : inf;
}

}  // namespace heavywalk
