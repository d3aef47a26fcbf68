#pragma once

#include <functional>
#include <memory>

#include "nocrit/extract/fixed_point.hpp"
#include "nocrit/gauges.hpp"
#include "nocrit/seqspace.hpp"

namespace nocrit {

using ScalarField = std::function<double(const SparseVec&)>;

struct SchemeStep {
  ProductPoint point;
  double rho;    // gauge of the input (forward) or fixed point (inverse)
  double alpha;  // curve parameter used; >= 1 means the map acted as the identity
};

// h(x1, x2) = (x1, x2 + gamma(rho(x))) with rho = mu_S(psi(x1), omega(x2)).
// Extracts K = {psi = 0} x {0}: h maps E \ K onto W1 x E2 where W1 is the
// domain of psi, and is the identity wherever rho >= 1.
class ExtractionScheme {
 public:
  ExtractionScheme(ProductSplit split, ScalarField psi, double tol_k = 0.0, double tol_fp = 1e-12,
                   std::size_t max_terms = 64)
      : split_(std::move(split)),
        kit_(std::make_shared<GaugeKit>(split_, max_terms)),
        psi_(std::move(psi)),
        tol_k_(tol_k),
        tol_fp_(tol_fp) {}

  static ExtractionScheme point_deletion(ProductSplit split, double tol_k = 0.0) {
    return ExtractionScheme(std::move(split), [](const SparseVec&) { return 0.0; }, tol_k);
  }

  const ProductSplit& split() const { return split_; }
  const GaugeKit& kit() const { return *kit_; }
  double psi(const SparseVec& x1) const { return psi_(x1); }

  double rho(const ProductPoint& p) const { return kit_->rho(psi_(p.x1), p.x2); }

  SchemeStep forward_step(const ProductPoint& p) const {
    const double r = rho(p);
    if (r <= tol_k_) throw ExcludedSetError("scheme:excluded-set", "point lies on the extracted set");
    if (r >= 1.0) return {p, r, r};
    return {{p.x1, p.x2 + kit_->gamma(r)}, r, r};
  }

  ProductPoint forward(const ProductPoint& p) const { return forward_step(p).point; }

  SchemeStep inverse_step(const ProductPoint& q) const {
    const double psi_val = psi_(q.x1);
    const double r = kit_->rho(psi_val, q.x2);
    if (r >= 1.0) return {q, r, r};
    FixedPointProblem prob;
    prob.F = [&](double a) { return kit_->rho(psi_val, q.x2 - kit_->gamma(a)); };
    prob.hi = 1.0;
    prob.lo = 0.5;
    prob.alpha_min = kit_->gamma.t_min() * (1.0 - 1e-12);
    prob.tol = tol_fp_;
    const double a = solve_fixed_point(prob).alpha;
    return {{q.x1, q.x2 - kit_->gamma(a)}, a, a};
  }

  ProductPoint inverse(const ProductPoint& q) const { return inverse_step(q).point; }

 private:
  ProductSplit split_;
  std::shared_ptr<const GaugeKit> kit_;
  ScalarField psi_;
  double tol_k_;
  double tol_fp_;
};

}  // namespace nocrit
