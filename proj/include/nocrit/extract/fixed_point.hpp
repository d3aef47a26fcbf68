#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "nocrit/errors.hpp"

namespace nocrit {

struct FixedPointProblem {
  std::function<double(double)> F;  // defined on (alpha_min, inf)
  double lo = 0.5;                  // bracket hint
  double hi = 1.0;
  double alpha_min = 0.0;           // F may be undefined at or below this
  double tol = 1e-10;
  int spot_checks = 16;
};

struct FixedPointResult {
  double alpha;
  double residual;  // |F(alpha) - alpha|
  int evaluations;
};

// Unique root of G(a) = a - F(a) under the semi-contraction
// F(b) - F(a) <= (b - a)/2 for b >= a, which makes G strictly increasing.
inline FixedPointResult solve_fixed_point(const FixedPointProblem& p) {
  int evals = 0;
  auto G = [&](double a) {
    ++evals;
    return a - p.F(a);
  };

  double hi = std::max({p.hi, 1.0, p.F(1.0) + 1.0});
  double g_hi = G(hi);
  for (int k = 0; g_hi <= 0 && k < 60; ++k) {
    hi *= 2.0;
    g_hi = G(hi);
  }
  if (g_hi <= 0) throw BracketError("fixed-point:bracket", "G stays nonpositive on expansion");
  if (g_hi == 0) return {hi, 0.0, evals};

  double lo = std::min(p.lo, hi);
  double g_lo = G(lo);
  while (g_lo >= 0) {
    if (g_lo == 0) return {lo, 0.0, evals};
    const double next = 0.5 * lo;
    if (next <= p.alpha_min)
      throw BracketError("fixed-point:bracket", "no sign change above alpha_min=" + std::to_string(p.alpha_min));
    lo = next;
    g_lo = G(lo);
  }

  // spot-check the semi-contraction on the bracket
  for (int k = 0; k < p.spot_checks; ++k) {
    const double a = lo + (hi - lo) * (k + 0.25) / p.spot_checks;
    const double b = lo + (hi - lo) * (k + 0.75) / p.spot_checks;
    const double fa = p.F(a), fb = p.F(b);
    evals += 2;
    if (fb - fa > 0.5 * (b - a) + 1e-12 * (1.0 + std::abs(fa)))
      throw ContractViolation("fixed-point:semi-contraction",
                              "F(" + std::to_string(b) + ") - F(" + std::to_string(a) + ") exceeds half the gap");
  }

  // G is increasing with slope >= 1/2, so bisection to the last ulp is safe
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g = G(mid);
    if (g == 0) return {mid, 0.0, evals};
    if (g < 0) {
      lo = mid;
      g_lo = g;
    } else {
      hi = mid;
      g_hi = g;
    }
  }
  // one secant polish, kept only if it lowers the residual
  double best = std::abs(g_lo) < std::abs(g_hi) ? lo : hi;
  double best_res = std::min(std::abs(g_lo), std::abs(g_hi));
  if (g_hi != g_lo) {
    const double s = lo - g_lo * (hi - lo) / (g_hi - g_lo);
    if (s >= lo && s <= hi) {
      const double gs = std::abs(G(s));
      if (gs < best_res) {
        best = s;
        best_res = gs;
      }
    }
  }
  if (best_res > p.tol)
    throw BracketError("fixed-point:tolerance", "residual " + std::to_string(best_res) + " above tolerance");
  return {best, best_res, evals};
}

}  // namespace nocrit
