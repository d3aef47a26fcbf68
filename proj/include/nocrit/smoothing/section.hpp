#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "nocrit/errors.hpp"
#include "nocrit/seqspace.hpp"

namespace nocrit {

using NormFn = std::function<double(const SparseVec&)>;
using NormGrad = std::function<SparseVec(const SparseVec&)>;

namespace detail {

// minimizer of a convex function of one variable near t0
inline double golden_min(const std::function<double(double)>& F, double t0, double tol) {
  // probe wide enough for the change to show above rounding
  const double h = std::max(tol, 1e-7) * std::max(1.0, std::abs(t0));
  const double f0 = F(t0);
  if (f0 <= F(t0 - h) && f0 <= F(t0 + h)) return t0;
  // walk downhill with doubling steps until the value rises
  const double dir = F(t0 + h) < f0 ? 1.0 : -1.0;
  double step = std::max(1e-3, 1e-3 * std::abs(t0));
  double prev = t0, a = t0, b = t0 + dir * step, fa = f0, fb = F(b);
  int guard = 0;
  while (fb < fa) {
    prev = a;
    a = b;
    fa = fb;
    step *= 2.0;
    b = t0 + dir * step;
    fb = F(b);
    if (++guard > 200) throw OptimizationError("section:bracket", "no bracket for the line search");
  }
  double lo = std::min(prev, b), hi = std::max(prev, b);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = F(c), fd = F(d);
  while (hi - lo > tol * std::max(1.0, std::abs(lo))) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = F(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = F(d);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// argmin over span{e_j : j in target} of v -> norm(w + v), by coordinate
// descent with golden-section line searches
inline SparseVec graph_section(const SparseVec& w, const std::vector<Index>& target, const NormFn& norm,
                               double tol = 1e-10, int max_sweeps = 10000) {
  for (Index j : target)
    if (w.get(j) != 0.0) throw DomainError("section:complement", "w has a component in the target block");
  SparseVec v(w.dim());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double moved = 0.0;
    for (Index j : target) {
      const SparseVec base = w + v;
      const double t0 = v.get(j);
      auto F = [&](double t) { return norm(axpy(t - t0, SparseVec::unit(j, 1.0, w.dim()), base)); };
      const double t = detail::golden_min(F, t0, tol);
      moved = std::max(moved, std::abs(t - t0));
      v.set(j, t);
    }
    if (moved <= tol) return v;
  }
  throw OptimizationError("section:convergence", "coordinate descent did not settle");
}

// |<J(w), e_j0>| >= tau |w_j0| / norm(w), with J the gradient of the norm;
// false when w_j0 = 0. Without a gradient callback the partial derivative is
// taken by central differences.
inline bool suppression_check(const NormFn& norm, const NormGrad& grad, Index j0, const SparseVec& w,
                              double tau = 1e-6) {
  if (w.empty() || l2_norm(w) == 0.0) throw DomainError("suppression:nonzero", "w must be nonzero");
  const double wj = w.get(j0);
  if (wj == 0.0) return false;
  double dj;
  if (grad) {
    dj = grad(w).get(j0);
  } else {
    const double h = 1e-6 * std::max(1.0, std::abs(wj));
    const SparseVec e = SparseVec::unit(j0, h, w.dim());
    dj = (norm(w + e) - norm(w - e)) / (2.0 * h);
  }
  return std::abs(dj) >= tau * std::abs(wj) / norm(w);
}

}  // namespace nocrit
