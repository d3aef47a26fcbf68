#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "nocrit/seqspace.hpp"

namespace nocrit {

// Open set described by a lower bound on the distance to its complement:
// clearance(p) > 0 iff p is inside, and the ball of that radius stays inside.
struct Window {
  std::function<double(const ProductPoint&)> clearance;

  bool contains(const ProductPoint& p) const { return clearance(p) > 0.0; }

  static Window everywhere() {
    return {[](const ProductPoint&) { return std::numeric_limits<double>::infinity(); }};
  }

  // B(c, R) x E2
  static Window cylinder(SparseVec center, double radius) {
    return {[c = std::move(center), radius](const ProductPoint& p) {
      return std::max(0.0, radius - distance(p.x1, c));
    }};
  }

  static Window ball(ProductPoint center, double radius) {
    return {[c = std::move(center), radius](const ProductPoint& p) {
      return std::max(0.0, radius - distance(p, c));
    }};
  }

  static Window intersect(std::vector<Window> parts) {
    return {[parts = std::move(parts)](const ProductPoint& p) {
      double c = std::numeric_limits<double>::infinity();
      for (const auto& w : parts) {
        c = std::min(c, w.clearance(p));
        if (c <= 0.0) return 0.0;
      }
      return c;
    }};
  }

  // removes a finite point set
  static Window punctured(Window base, std::vector<ProductPoint> holes) {
    return {[base = std::move(base), holes = std::move(holes)](const ProductPoint& p) {
      double c = base.clearance(p);
      for (const auto& h : holes) {
        if (c <= 0.0) return 0.0;
        c = std::min(c, distance(p, h));
      }
      return c;
    }};
  }
};

}  // namespace nocrit
