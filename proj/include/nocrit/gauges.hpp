#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nocrit/errors.hpp"
#include "nocrit/profile.hpp"
#include "nocrit/seqspace.hpp"

namespace nocrit {

enum class Direction { Rising, Falling };

// C-infinity transition between exact plateaus: rising goes 0 -> 1 on [lo, hi],
// falling goes 1 -> 0. The declared derivative bound is checked by a grid scan
// at construction.
class SmoothStep {
 public:
  SmoothStep(double lo, double hi, Direction dir,
             double bound = std::numeric_limits<double>::infinity())
      : lo_(lo), hi_(hi), dir_(dir), bound_(bound) {
    if (!(lo < hi)) throw DomainError("smoothstep:interval", "need lo < hi");
    if (std::isfinite(bound)) {
      constexpr int kScan = 1024;
      for (int i = 0; i <= kScan; ++i) {
        const double t = lo + (hi - lo) * i / kScan;
        if (std::abs(deriv(t)) > bound * (1.0 + 1e-12))
          throw CertificationError("smoothstep:derivative-bound",
                                   "|slope| " + std::to_string(std::abs(deriv(t))) +
                                       " exceeds declared bound " + std::to_string(bound));
      }
    }
  }

  double operator()(double t) const { return eval(t); }

  double eval(double t) const {
    const auto& p = BumpProfile::instance();
    const double s = (t - lo_) / (hi_ - lo_);
    return dir_ == Direction::Rising ? p.value(s) : p.value(1.0 - s);
  }

  double deriv(double t) const {
    const auto& p = BumpProfile::instance();
    const double w = hi_ - lo_;
    const double s = (t - lo_) / w;
    return dir_ == Direction::Rising ? p.derivative(s) / w : -p.derivative(1.0 - s) / w;
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  Direction direction() const { return dir_; }
  double bound() const { return bound_; }
  // exact sup |slope| of the profile on this interval
  double max_slope() const { return BumpProfile::instance().max_slope() / (hi_ - lo_); }

 private:
  double lo_, hi_;
  Direction dir_;
  double bound_;
};

// omega(x) = || diag(4^-k) x || where k is the 1-based position of each index in
// an ordered list. Indices outside the list are outside the functional's domain.
class OmegaFunctional {
 public:
  explicit OmegaFunctional(std::size_t dim = kDefaultDim) : OmegaFunctional(dim, iota_list(dim)) {}

  OmegaFunctional(std::size_t dim, const std::vector<Index>& order)
      : dim_(dim), order_(order), weight_(dim + 1, 0.0) {
    double w = 1.0;
    for (Index i : order_) {
      if (i == 0 || i > dim) throw TruncationError("seqspace:truncation", "omega index outside 1..D");
      w *= 0.25;
      weight_[i] = w;
    }
  }

  std::size_t dim() const { return dim_; }
  const std::vector<Index>& order() const { return order_; }
  double weight(Index i) const { return i <= dim_ ? weight_[i] : 0.0; }

  double operator()(const SparseVec& v) const { return eval(v); }

  double eval(const SparseVec& v) const {
    double s = 0.0;
    for (const Entry& e : v.entries()) {
      const double a = weight_of(e.index) * e.value;
      s += a * a;
    }
    return std::sqrt(s);
  }

  // A^2 v / |Av|
  SparseVec grad(const SparseVec& v) const {
    const double n = eval(v);
    if (n == 0.0) throw SingularPointError("omega:smooth-off-origin", "gradient at 0");
    std::vector<Entry> out;
    for (const Entry& e : v.entries()) {
      const double w = weight_[e.index];
      out.push_back({e.index, w * w * e.value / n});
    }
    return SparseVec(v.dim(), std::move(out));
  }

 private:
  static std::vector<Index> iota_list(std::size_t dim) {
    std::vector<Index> v(dim);
    std::iota(v.begin(), v.end(), Index{1});
    return v;
  }

  double weight_of(Index i) const {
    const double w = i <= dim_ ? weight_[i] : 0.0;
    if (w == 0.0) throw DomainError("omega:domain", "index " + std::to_string(i) + " outside the weighted block");
    return w;
  }

  std::size_t dim_;
  std::vector<Index> order_;
  std::vector<double> weight_;
};

// gamma(t) = sum_k theta(2^(k-1) t) y_k with y_k = e_{b(k)} / 4, where b lists
// the first K indices of the omega order. The finite sum is exact for
// t >= 2^-K; smaller t would need anchors beyond the truncation.
class DeletingCurve {
 public:
  DeletingCurve(const OmegaFunctional& omega, std::size_t max_terms = 64)
      : dim_(omega.dim()), theta_(0.5, 1.0, Direction::Falling, 4.0) {
    const auto& ord = omega.order();
    const std::size_t k = std::min(max_terms, ord.size());
    anchors_.assign(ord.begin(), ord.begin() + static_cast<long>(k));
    if (anchors_.empty()) throw DomainError("deleting-curve:anchors", "no anchor coordinates");
    t_min_ = std::ldexp(1.0, -static_cast<int>(anchors_.size()));
  }

  static constexpr double kAnchorScale = 0.25;

  const SmoothStep& theta() const { return theta_; }
  const std::vector<Index>& anchors() const { return anchors_; }
  std::size_t terms() const { return anchors_.size(); }
  double t_min() const { return t_min_; }
  SparseVec anchor(std::size_t k) const { return SparseVec::unit(anchors_.at(k - 1), kAnchorScale, dim_); }

  SparseVec operator()(double t) const { return eval(t); }

  SparseVec eval(double t) const {
    check(t);
    std::vector<Entry> out;
    double s = t;
    for (Index b : anchors_) {
      if (s >= 1.0) break;
      const double th = theta_(s);
      if (th != 0.0) out.push_back({b, kAnchorScale * th});
      s *= 2.0;
    }
    return SparseVec(dim_, std::move(out));
  }

  SparseVec deriv(double t) const {
    check(t);
    std::vector<Entry> out;
    double s = t, scale = 1.0;
    for (Index b : anchors_) {
      if (s >= 1.0) break;
      const double d = theta_.deriv(s);
      if (d != 0.0) out.push_back({b, kAnchorScale * scale * d});
      s *= 2.0;
      scale *= 2.0;
    }
    return SparseVec(dim_, std::move(out));
  }

 private:
  void check(double t) const {
    if (!(t > 0.0)) throw DomainError("deleting-curve:domain", "gamma needs t > 0");
    if (t < t_min_)
      throw TruncationError("deleting-curve:truncation",
                            "t=" + std::to_string(t) + " needs anchors beyond the extraction block");
  }

  std::size_t dim_;
  SmoothStep theta_;
  std::vector<Index> anchors_;
  double t_min_;
};

// Gauge of S = { Phi(|x|) + Phi(|y|) <= 1 } with Phi convex, Phi = 0 on [0,1/2],
// Phi(1) = 1. The boundary is flat on {1} x [-1/2,1/2] and its mirror images.
class SmoothSquare {
 public:
  static constexpr int kArcTable = 4096;

  static const SmoothSquare& instance() {
    static const SmoothSquare s;
    return s;
  }

  // boundary profile Phi and its derivative
  double phi(double t) const {
    if (t <= 0.5) return 0.0;
    if (t >= 1.0) return 1.0 + slope_end_ * (t - 1.0);
    const double v = 2.0 * t - 1.0;
    const double x = v * kArcTable;
    int i = static_cast<int>(x);
    if (i >= kArcTable) i = kArcTable - 1;
    const double h = 1.0 / kArcTable;
    const double u = x - i;
    const double u2 = u * u, u3 = u2 * u;
    const double q = (2 * u3 - 3 * u2 + 1) * q_[i] + (u3 - 2 * u2 + u) * h * p_[i] +
                     (-2 * u3 + 3 * u2) * q_[i + 1] + (u3 - u2) * h * p_[i + 1];
    return q / total_;
  }

  double phi_deriv(double t) const {
    if (t <= 0.5) return 0.0;
    if (t >= 1.0) return slope_end_;
    return 2.0 * BumpProfile::instance().value(2.0 * t - 1.0) / total_;
  }

  double mu(double a, double b) const {
    const double A = std::abs(a), B = std::abs(b);
    if (B <= 0.5 * A) return A;
    if (A <= 0.5 * B) return B;
    return solve_ray(A, B);
  }

  std::pair<double, double> grad(double a, double b) const {
    const double A = std::abs(a), B = std::abs(b);
    if (A == 0.0 && B == 0.0) throw SingularPointError("smooth-square:smooth-off-origin", "gradient at origin");
    const double sa = a < 0 ? -1.0 : 1.0, sb = b < 0 ? -1.0 : 1.0;
    if (B <= 0.5 * A) return {sa, 0.0};
    if (A <= 0.5 * B) return {0.0, sb};
    const double t = solve_ray(A, B);
    const double p = A / t, q = B / t;
    const double dp = phi_deriv(p), dq = phi_deriv(q);
    const double den = dp * p + dq * q;
    return {sa * dp / den, sb * dq / den};
  }

 private:
  SmoothSquare() : q_(kArcTable + 1), p_(kArcTable + 1) {
    const auto& prof = BumpProfile::instance();
    const double h = 1.0 / kArcTable;
    static constexpr double xg[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                     0.9602898564975363};
    static constexpr double wg[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                     0.1012285362903763};
    double sum = 0.0;
    q_[0] = 0.0;
    for (int i = 0; i < kArcTable; ++i) {
      const double mid = (i + 0.5) * h;
      double cell = 0.0;
      for (int g = 0; g < 4; ++g)
        cell += wg[g] * (prof.value(mid - 0.5 * h * xg[g]) + prof.value(mid + 0.5 * h * xg[g]));
      sum += 0.5 * h * cell;
      q_[i + 1] = sum;
    }
    total_ = sum;
    q_[kArcTable] = total_;  // phi(1) == 1 exactly
    for (int i = 0; i <= kArcTable; ++i) p_[i] = prof.value(i * h);
    slope_end_ = 2.0 / total_;
  }

  // root of Phi(A/t) + Phi(B/t) = 1 on [max, 2 max]; both ratios exceed 1/2 there
  double solve_ray(double A, double B) const {
    const double M = std::max(A, B);
    double lo = M, hi = 2.0 * M;
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double g = phi(A / t) + phi(B / t) - 1.0;
      if (g > 0) lo = t;
      else if (g < 0) hi = t;
      else return t;
      const double dg = -(phi_deriv(A / t) * A + phi_deriv(B / t) * B) / (t * t);
      double next = dg != 0.0 ? t - g / dg : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 1e-15 * M || hi - lo <= 1e-15 * M) return next;
      t = next;
    }
    return t;
  }

  std::vector<double> q_, p_;
  double total_ = 0.5;
  double slope_end_ = 4.0;
};

// rho = mu_S(psi, omega(x2))
inline double rho(const SmoothSquare& sq, double psi_val, const OmegaFunctional& w, const SparseVec& x2) {
  if (!(psi_val >= 0.0)) throw DomainError("rho:psi-nonnegative", "psi value must be >= 0");
  return sq.mu(psi_val, w(x2));
}

// omega, gamma and the smooth square bound to one ordered extraction block.
struct GaugeKit {
  OmegaFunctional omega;
  DeletingCurve gamma;
  const SmoothSquare* square;

  explicit GaugeKit(const ProductSplit& split, std::size_t max_terms = 64)
      : omega(split.dim(), split.second()), gamma(omega, max_terms), square(&SmoothSquare::instance()) {}

  double rho(double psi_val, const SparseVec& x2) const { return nocrit::rho(*square, psi_val, omega, x2); }
};

}  // namespace nocrit
