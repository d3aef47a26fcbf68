#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "nocrit/extract/convex.hpp"
#include "nocrit/extract/extension.hpp"
#include "nocrit/extract/scheme.hpp"
#include "nocrit/extract/window.hpp"

namespace nocrit {

// Radius function phi and zero-set function eta over the first factor:
// {|x2| < phi(x1)} sits inside W, phi <= delta/2, and eta vanishes exactly on
// the sample set X1.
class TubeWindow {
 public:
  TubeWindow(std::vector<SparseVec> base, Window W, double delta, double soft_exponent = 8.0)
      : W_(std::move(W)), delta_(delta), soft_(SoftDistance(std::move(base), soft_exponent)) {
    if (!(delta > 0.0)) throw DomainError("tube:budget", "delta must be positive");
  }

  // tube of fixed radius around the whole zero section (eta = 0 everywhere)
  static TubeWindow constant(double radius) {
    if (!(radius > 0.0)) throw DomainError("tube:budget", "radius must be positive");
    return TubeWindow(radius);
  }

  // G = min(delta/2, dist((x1, 0), complement of W))
  double bound(const SparseVec& x1) const {
    if (fixed_ > 0.0) return fixed_;
    return std::min(0.5 * delta_, W_.clearance({x1, SparseVec(x1.dim())}));
  }

  // 3/8 of a smooth minimum of the two terms of G, so that G/4 < phi < G/2
  double phi(const SparseVec& x1) const {
    if (fixed_ > 0.0) return fixed_;
    const double c = W_.clearance({x1, SparseVec(x1.dim())});
    if (!(c > 0.0)) return 0.0;
    const double a = 0.5 * delta_;
    const double m = std::min(a, c), M = std::max(a, c);
    const double q = std::pow(m / M, 4.0);
    return 0.375 * m * std::pow(1.0 + q, -0.25);
  }

  double eta(const SparseVec& x1) const {
    if (!soft_) return 0.0;
    const double d = (*soft_)(x1);
    return d * d;
  }

  bool contains(const ProductPoint& p) const { return l2_norm(p.x2) < phi(p.x1); }

  const Window& window() const { return W_; }
  double delta() const { return delta_; }

  // Samples tube points over the given base points (shell radii up to the
  // tube radius, random E2 directions) and checks that W contains them all.
  void verify(const std::vector<SparseVec>& x1s, const std::vector<Index>& fiber, std::uint64_t seed,
              int per_point = 8) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& x1 : x1s) {
      const double r = phi(x1);
      if (r <= 0.0) continue;
      for (int k = 0; k < per_point; ++k) {
        std::vector<Entry> e;
        for (Index i : fiber) e.push_back({i, g(rng)});
        SparseVec dir(x1.dim(), e);
        const double n = l2_norm(dir);
        if (n == 0.0) continue;
        const double scale = k == 0 ? 1.0 - 1e-12 : std::sqrt(u(rng));
        ProductPoint p{x1, (scale * r / n) * dir};
        if (!W_.contains(p))
          throw WindowConsistencyError("tube:containment", "tube point escapes the window");
      }
    }
  }

 private:
  explicit TubeWindow(double radius) : W_(Window::everywhere()), delta_(2.0 * radius), fixed_(radius) {}

  Window W_;
  double delta_;
  double fixed_ = 0.0;
  std::optional<SoftDistance> soft_;
};

// Extraction of X1 x {0} inside the tube: g = Phi^-1 o H o Phi with
// Phi(x1, x2) = (x1, h2(x2 / phi(x1))), h2 the radial map from the unit ball
// of E2 onto {omega <= 1}, and H the scheme on psi = eta / phi.
// extract() is g (defined off X1 x {0}); release() is its inverse.
class TubeExtraction {
 public:
  TubeExtraction(ProductSplit split, std::shared_ptr<const TubeWindow> tube, double tol_k = 1e-8,
                 std::size_t max_terms = 64)
      : split_(split), tube_(std::move(tube)), tol_k_(tol_k) {
    auto t = tube_;
    scheme_ = std::make_unique<ExtractionScheme>(
        split_, [t](const SparseVec& x1) { return t->eta(x1) / t->phi(x1); }, 0.0, 1e-12, max_terms);
    const OmegaFunctional* w = &scheme_->kit().omega;
    h2_ = ConvexBodyDiffeo::nested([](const SparseVec& v) { return l2_norm(v); },
                                   [w](const SparseVec& v) { return w->eval(v); });
  }

  const TubeWindow& tube() const { return *tube_; }
  const ExtractionScheme& scheme() const { return *scheme_; }

  bool excluded(const ProductPoint& p) const { return tube_->eta(p.x1) == 0.0 && l2_norm(p.x2) <= tol_k_; }

  ProductPoint extract(const ProductPoint& p) const {
    if (excluded(p)) throw ExcludedSetError("tube:excluded-set", "point lies on X1 x {0}");
    const double r = tube_->phi(p.x1);
    if (!(l2_norm(p.x2) < r)) return p;
    const auto step = scheme_->forward_step(to_model(p, r));
    if (step.alpha >= 1.0) return p;
    return from_model(step.point, r);
  }

  ProductPoint release(const ProductPoint& q) const {
    const double r = tube_->phi(q.x1);
    if (!(l2_norm(q.x2) < r)) return q;
    const auto step = scheme_->inverse_step(to_model(q, r));
    if (step.alpha >= 1.0) return q;
    return from_model(step.point, r);
  }

  ProductPoint to_model(const ProductPoint& p, double r) const { return {p.x1, h2_((1.0 / r) * p.x2)}; }
  ProductPoint from_model(const ProductPoint& z, double r) const { return {z.x1, r * h2_.inverse(z.x2)}; }

 private:
  ProductSplit split_;
  std::shared_ptr<const TubeWindow> tube_;
  double tol_k_;
  std::unique_ptr<ExtractionScheme> scheme_;
  ConvexBodyDiffeo h2_ = ConvexBodyDiffeo::nested(nullptr, nullptr);
};

}  // namespace nocrit
