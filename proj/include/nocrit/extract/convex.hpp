#pragma once

#include <cmath>
#include <functional>
#include <memory>

#include "nocrit/errors.hpp"
#include "nocrit/gauges.hpp"
#include "nocrit/seqspace.hpp"

namespace nocrit {

using Gauge = std::function<double(const SparseVec&)>;

// Radial diffeomorphism carrying the body {mu_in <= 1} onto {mu_out <= 1},
// for nested bodies with {mu_in <= 1} inside {mu_out <= 1}:
//   g(x) = (theta(mu_in(x)) mu_in(x) / mu_out(x) + 1 - theta(mu_in(x))) x
// with theta rising on [1/2, 1]. The general case goes through the body
// {mu_1 + mu_2 <= 1}, which sits inside both.
class ConvexBodyDiffeo {
 public:
  static ConvexBodyDiffeo nested(Gauge inner, Gauge outer) {
    ConvexBodyDiffeo d;
    d.second_ = std::make_shared<Radial>(std::move(inner), std::move(outer));
    return d;
  }

  static ConvexBodyDiffeo general(Gauge mu1, Gauge mu2) {
    Gauge sum = [mu1, mu2](const SparseVec& x) { return mu1(x) + mu2(x); };
    ConvexBodyDiffeo d;
    d.first_ = std::make_shared<Radial>(sum, std::move(mu1));
    d.second_ = std::make_shared<Radial>(sum, std::move(mu2));
    return d;
  }

  SparseVec operator()(const SparseVec& x) const {
    return second_->apply(first_ ? first_->invert(x) : x);
  }

  SparseVec inverse(const SparseVec& y) const {
    const SparseVec x = second_->invert(y);
    return first_ ? first_->apply(x) : x;
  }

 private:
  struct Radial {
    Gauge in, out;
    SmoothStep theta{0.5, 1.0, Direction::Rising};

    Radial(Gauge i, Gauge o) : in(std::move(i)), out(std::move(o)) {}

    // mu_in, and the ratio c = mu_in / mu_out >= 1 along the ray of x
    std::pair<double, double> gauges(const SparseVec& x) const {
      const double m = in(x), v = out(x);
      if (!(m > 0.0) || !(v > 0.0)) throw InvalidGaugeError("convex:gauge", "gauge vanishes on a nonzero vector");
      const double c = m / v;
      if (c < 1.0 - 1e-12) throw InvalidGaugeError("convex:nesting", "inner body not contained in outer body");
      return {m, std::max(c, 1.0)};
    }

    SparseVec apply(const SparseVec& x) const {
      if (x.nnz() == 0) return x;
      const auto [m, c] = gauges(x);
      const double t = theta(m);
      if (t == 0.0) return x;
      return (t * c + 1.0 - t) * x;
    }

    // radial profile s -> s (1 + theta(s)(c - 1)) is increasing; solve it for mu_in(y)
    SparseVec invert(const SparseVec& y) const {
      if (y.nnz() == 0) return y;
      const auto [m, c] = gauges(y);
      if (m <= 0.5) return y;
      double s;
      if (m / c >= 1.0) {
        s = m / c;
      } else {
        auto R = [&](double u) { return u * (1.0 + theta(u) * (c - 1.0)); };
        double lo = std::max(0.5, m / c), hi = std::min(1.0, m);
        for (int it = 0; it < 200 && hi > lo; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          (R(mid) < m ? lo : hi) = mid;
        }
        s = std::abs(R(lo) - m) <= std::abs(R(hi) - m) ? lo : hi;
      }
      return (s / m) * y;
    }
  };

  std::shared_ptr<const Radial> first_;  // null in the nested case
  std::shared_ptr<const Radial> second_;
};

}  // namespace nocrit
