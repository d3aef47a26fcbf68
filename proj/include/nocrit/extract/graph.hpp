#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "nocrit/extract/flatten.hpp"
#include "nocrit/extract/tube.hpp"

namespace nocrit {

struct GraphSpec {
  ProductSplit split;
  std::vector<GraphSample> samples;  // X1 with the values of f on it
  Window U = Window::everywhere();
  double delta = 0.5;
  int series = 12;
  double tol_k = 1e-8;
  std::uint64_t seed = 7;

  static GraphSpec from_function(ProductSplit split, const std::vector<SparseVec>& base,
                                 const std::function<SparseVec(const SparseVec&)>& f, Window U, double delta) {
    GraphSpec s{std::move(split), {}, std::move(U), delta};
    for (const auto& x : base) s.samples.push_back({x, f(x)});
    return s;
  }
};

// Removal of the graph X = {(x1, f(x1)) : x1 in X1} inside U.
//   inverse = phimap^-1 o g o h : E \ X -> E \ (X \ U)   (the extracting map)
//   forward = h^-1 o g^-1 o phimap, its inverse, defined on E \ (X \ U)
// with (h, phimap) the flattening pair at budget delta/2 and g the tube
// extraction of X1 x {0} inside W = h(U) at budget delta/4.
class GraphExtraction {
 public:
  using W = FlattenMaps::Which;

  explicit GraphExtraction(GraphSpec spec) : spec_(std::move(spec)) {
    if (!(spec_.delta > 0.0)) throw DomainError("graph:budget", "delta must be positive");
    if (spec_.samples.empty()) throw DomainError("graph:nonempty", "no graph samples");
    std::vector<SparseVec> base;
    for (const auto& s : spec_.samples) {
      spec_.split.check({s.x1, s.value});
      base.push_back(s.x1);
    }
    try {
      FlattenConfig cfg;
      cfg.eps = std::min(1.0, spec_.delta / 2.0);
      cfg.series = spec_.series;
      cfg.seed = spec_.seed;
      flat_ = std::make_shared<FlattenMaps>(spec_.samples, spec_.U, cfg);
    } catch (const Error& e) {
      throw StageError("flatten", e);
    }
    // fibers of h are (1/2)-Lipschitz perturbations of the identity, so h maps a
    // ball of radius r around p onto a set containing the fiber ball of radius r/2
    auto flat = flat_;
    Window U = spec_.U;
    Window hU{[flat, U](const ProductPoint& q) { return 0.5 * U.clearance(flat->inverse(q, W::H)); }};
    try {
      auto tube = std::make_shared<TubeWindow>(base, hU, spec_.delta / 4.0);
      tube->verify(base, spec_.split.second(), spec_.seed);
      inner_ = std::make_shared<TubeExtraction>(spec_.split, tube, spec_.tol_k);
    } catch (const Error& e) {
      throw StageError("tube", e);
    }
  }

  const GraphSpec& spec() const { return spec_; }
  const FlattenMaps& flatten() const { return *flat_; }
  const TubeExtraction& inner() const { return *inner_; }

  ProductPoint forward(const ProductPoint& x) const {
    const ProductPoint z = flat_->forward(x, W::PhiMap);
    if (!inner_->tube().contains(z)) {
      if (inner_->excluded(z)) throw ExcludedSetError("graph:retained", "retained graph point has no image");
      if (flat_->forward(x, W::H) == z) return x;
      return flat_->inverse(z, W::H);
    }
    return flat_->inverse(inner_->release(z), W::H);
  }

  ProductPoint inverse(const ProductPoint& y) const {
    const ProductPoint z = flat_->forward(y, W::H);
    const ProductPoint w = inner_->extract(z);
    if (w == z && flat_->forward(y, W::PhiMap) == z) return y;
    return flat_->inverse(w, W::PhiMap);
  }

  // a graph sample is removed by inverse() iff forward() reaches it
  bool removes(const GraphSample& s) const { return inner_->tube().contains(flat_->forward({s.x1, s.value}, W::PhiMap)); }

 private:
  GraphSpec spec_;
  std::shared_ptr<FlattenMaps> flat_;
  std::shared_ptr<TubeExtraction> inner_;
};

}  // namespace nocrit
