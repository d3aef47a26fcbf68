#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "nocrit/extract/extension.hpp"
#include "nocrit/extract/window.hpp"
#include "nocrit/gauges.hpp"

namespace nocrit {

struct FlattenConfig {
  double eps = 0.5;  // closeness budget |h^-1 - phi^-1|, in (0, 1]
  int series = 12;   // terms of the staircase and twin series
  double picard_tol = 1e-10;
  int picard_cap = 200;
  std::uint64_t seed = 7;
};

struct PicardStats {
  int iterations = 0;
  double max_ratio = 0.0;  // largest observed |step_k| / |step_(k-1)|
  double last_step = 0.0;
};

// F(r, x1) = f_1 + sum_n h_(n+1)(r) (f_(n+1) - f_n), closed by f_(N+1) = fbar so
// that F(r, .) = fbar for r >= 1 - 2^-(N+1). f_n blends the exact extension
// (off W_n = {dist < 1/n}) with a smooth approximant (on W_(n+1)).
class Staircase {
 public:
  Staircase(std::shared_ptr<const ShepardExtension> fbar, std::vector<ShepardExtension> approximants)
      : fbar_(std::move(fbar)), approx_(std::move(approximants)) {
    const int N = static_cast<int>(approx_.size());
    if (N < 1) throw DomainError("staircase:series", "need at least one approximant");
    for (int n = 2; n <= N + 1; ++n) {
      const double lo = 1.0 - std::ldexp(1.0, 1 - n), hi = 1.0 - std::ldexp(1.0, -n);
      steps_.emplace_back(lo, hi, Direction::Rising, std::ldexp(1.0, n + 1));
    }
    std::vector<SparseVec> nodes;
    for (const auto& s : fbar_->samples()) nodes.push_back(s.x1);
    // exponent large enough that the soft distance is within (N+1)/(N+2) of the
    // true one, which keeps the blend windows [1/(n+1), hi_n] nonempty
    const double ns = static_cast<double>(nodes.size());
    const double p = std::ceil(std::log(std::max(ns, 2.0)) / std::log((N + 2.0) / (N + 1.0))) + 1.0;
    soft_ = std::make_unique<SoftDistance>(nodes, p);
    const double shrink = std::pow(std::max(ns, 1.0), -1.0 / p);
    for (int n = 1; n <= N; ++n) blends_.emplace_back(1.0 / (n + 1), shrink / n, Direction::Rising);
  }

  int series() const { return static_cast<int>(approx_.size()); }
  double threshold() const { return 1.0 - std::ldexp(1.0, -(series() + 1)); }

  // f_k for k = 1..N, and fbar for k = N+1
  SparseVec level(int k, const SparseVec& x1) const {
    if (k > series()) return (*fbar_)(x1);
    const double lam = blends_[k - 1]((*soft_)(x1));
    if (lam == 1.0) return (*fbar_)(x1);
    if (lam == 0.0) return approx_[k - 1](x1);
    return axpy(lam, (*fbar_)(x1), (1.0 - lam) * approx_[k - 1](x1));
  }

  SparseVec operator()(double r, const SparseVec& x1) const {
    const int k = segment(r);
    if (k == 0) return level(1, x1);
    if (k > series()) return (*fbar_)(x1);
    const double v = steps_[k - 1](r);
    if (v == 0.0) return level(k, x1);
    if (v == 1.0) return level(k + 1, x1);
    const SparseVec fk = level(k, x1);
    return axpy(v, level(k + 1, x1) - fk, fk);
  }

  SparseVec dr(double r, const SparseVec& x1) const {
    const int k = segment(r);
    if (k == 0 || k > series()) return SparseVec(fbar_->samples().front().value.dim());
    const double dv = steps_[k - 1].deriv(r);
    if (dv == 0.0) return SparseVec(fbar_->samples().front().value.dim());
    return dv * (level(k + 1, x1) - level(k, x1));
  }

  const ShepardExtension& fbar() const { return *fbar_; }

 private:
  // 0 below 1/2; k when r is inside the transition of h_(k+1); N+1 past the threshold
  int segment(double r) const {
    if (r <= 0.5) return 0;
    for (int k = 1; k <= series(); ++k)
      if (r < 1.0 - std::ldexp(1.0, -(k + 1))) return k;
    return series() + 1;
  }

  std::shared_ptr<const ShepardExtension> fbar_;
  std::vector<ShepardExtension> approx_;
  std::vector<SmoothStep> steps_;
  std::vector<SmoothStep> blends_;
  std::unique_ptr<SoftDistance> soft_;
};

// phi = 1 exactly on the graph of fbar and < 1 off it; phi~ additionally drops
// below 1 on graph points inside U, and coincides with phi bit for bit outside U.
class TwinFunctions {
 public:
  struct Constants {
    double a, b, c, tol, delta, kappa;
  };

  TwinFunctions(std::shared_ptr<const ShepardExtension> fbar, Window U, double eps, int series,
                const std::vector<SparseVec>& probes)
      : fbar_(std::move(fbar)), U_(std::move(U)), eps_(eps) {
    const double R = BumpProfile::instance().max_slope();
    for (int n = 1; n <= series; ++n) {
      Constants k;
      k.a = eps * std::ldexp(1.0, -2 * n);
      k.b = 2.0 * k.a;
      k.c = eps * std::ldexp(1.0, -4 * n);
      k.tol = eps * std::ldexp(1.0, -2 * n - 3);
      k.delta = k.tol + k.b;
      k.kappa = 2.0 * k.delta;
      consts_.push_back(k);
    }
    validate(R);
    d_star_ = 0.0;
    for (const auto& k : consts_) d_star_ += k.c;
    for (int n = 1; n <= series; ++n) {
      const auto& k = consts_[n - 1];
      bumps_.emplace_back(k.a, k.b, Direction::Falling, R / (k.b - k.a) * (1.0 + 1e-9));
      const double upper = n == 1 ? 2.0 * k.kappa : consts_[n - 2].kappa;
      windows_.emplace_back(k.kappa, upper, Direction::Falling);
      centers_.push_back(certified_approximant(fbar_->samples(), *fbar_, probes, k.tol));
    }
  }

  const std::vector<Constants>& constants() const { return consts_; }
  double d_star() const { return d_star_; }

  double phi(const ProductPoint& p) const { return 1.0 - (d_star_ - psi(p, nullptr)); }

  double phi_tilde(const ProductPoint& p) const {
    std::vector<double> lam(consts_.size());
    const double clear = U_.clearance({p.x1, (*fbar_)(p.x1)});
    for (std::size_t n = 0; n < consts_.size(); ++n) lam[n] = windows_[n](clear);
    return 1.0 - (d_star_ - psi(p, &lam));
  }

  // gradient of phi in the second slot
  SparseVec phi_grad2(const ProductPoint& p) const {
    SparseVec g(p.x2.dim());
    for (std::size_t n = 0; n < consts_.size(); ++n) {
      const SparseVec r = p.x2 - centers_[n](p.x1);
      const double t = l2_norm(r);
      const double s = bumps_[n].deriv(t);
      if (s != 0.0 && t > 0.0) g = axpy(consts_[n].c * s / t, r, g);
    }
    return g;
  }

 private:
  double psi(const ProductPoint& p, const std::vector<double>* lam) const {
    double s = 0.0;
    for (std::size_t n = 0; n < consts_.size(); ++n) {
      const double l = lam ? (*lam)[n] : 1.0;
      if (l == 0.0) {
        s += 0.0;
        continue;
      }
      const double t = distance(p.x2, centers_[n](p.x1));
      s += l * (consts_[n].c * bumps_[n](t));
    }
    return s;
  }

  void validate(double R) const {
    double sum_c = 0.0, sum_d = 0.0;
    for (std::size_t n = 0; n < consts_.size(); ++n) {
      const auto& k = consts_[n];
      if (!(k.a < k.b)) throw ScheduleError("twin:ordering", "a_n < b_n fails");
      if (n + 1 < consts_.size()) {
        const auto& k1 = consts_[n + 1];
        if (!(k1.tol + k1.b < k.a - k.tol)) throw ScheduleError("twin:nesting", "eps_(n+1) + b_(n+1) < a_n - eps_n fails");
      }
      sum_c += k.c;
      sum_d += k.c * R / (k.b - k.a);
    }
    if (sum_c > eps_ / 2) throw ScheduleError("twin:height-budget", "sum c_n exceeds eps/2");
    if (sum_d > 0.5) throw ScheduleError("twin:slope-budget", "sum d_n exceeds 1/2");
  }

  std::shared_ptr<const ShepardExtension> fbar_;
  Window U_;
  double eps_;
  double d_star_ = 0.0;
  std::vector<Constants> consts_;
  std::vector<SmoothStep> bumps_;
  std::vector<SmoothStep> windows_;
  std::vector<ShepardExtension> centers_;
};

// The pair of fiber-preserving maps h, phimap: both flatten E onto itself by
// x2 -> x2 - F(phi(x), x1); h sends the whole graph of f to E1 x {0}, phimap
// only the part outside U. Inverses by Picard iteration on the 1/4-contraction.
class FlattenMaps {
 public:
  enum class Which { H, PhiMap };

  FlattenMaps(std::vector<GraphSample> samples, Window U, FlattenConfig cfg = {})
      : cfg_(cfg) {
    if (!(cfg.eps > 0.0 && cfg.eps <= 1.0)) throw DomainError("flatten:budget", "eps must lie in (0, 1]");
    fbar_ = std::make_shared<ShepardExtension>(extend_function(samples));
    const auto probes = certification_probes(samples, 1.0, cfg.seed);
    std::vector<ShepardExtension> approx;
    for (int n = 1; n <= cfg.series; ++n)
      approx.push_back(certified_approximant(samples, *fbar_, probes, std::ldexp(1.0, -2 * n - 4)));
    stair_ = std::make_unique<Staircase>(fbar_, std::move(approx));
    twin_ = std::make_unique<TwinFunctions>(fbar_, std::move(U), cfg.eps, cfg.series, probes);
  }

  const FlattenConfig& config() const { return cfg_; }
  const Staircase& staircase() const { return *stair_; }
  const TwinFunctions& twin() const { return *twin_; }
  SparseVec fbar(const SparseVec& x1) const { return (*fbar_)(x1); }

  double level(const ProductPoint& p, Which w) const {
    return w == Which::H ? twin_->phi(p) : twin_->phi_tilde(p);
  }

  SparseVec displacement(const ProductPoint& p, Which w) const { return (*stair_)(level(p, w), p.x1); }

  ProductPoint forward(const ProductPoint& p, Which w) const { return {p.x1, p.x2 - displacement(p, w)}; }

  ProductPoint inverse(const ProductPoint& q, Which w, PicardStats* stats = nullptr) const {
    SparseVec y = q.x2;
    PicardStats st;
    double prev_step = -1.0;
    int slow = 0;
    for (int it = 1; it <= cfg_.picard_cap; ++it) {
      SparseVec next = q.x2 + displacement({q.x1, y}, w);
      const double step = distance(next, y);
      y = std::move(next);
      st.iterations = it;
      st.last_step = step;
      if (prev_step > 1e-12) {
        const double ratio = step / prev_step;
        st.max_ratio = std::max(st.max_ratio, ratio);
        slow = ratio > 0.9 ? slow + 1 : 0;
        if (slow >= 3) throw ContractViolation("flatten:contraction", "Picard steps stopped shrinking");
      }
      if (step <= cfg_.picard_tol) {
        if (stats) *stats = st;
        return {q.x1, y};
      }
      prev_step = step;
    }
    throw ContractViolation("flatten:contraction", "Picard iteration cap reached");
  }

 private:
  FlattenConfig cfg_;
  std::shared_ptr<ShepardExtension> fbar_;
  std::unique_ptr<Staircase> stair_;
  std::unique_ptr<TwinFunctions> twin_;
};

}  // namespace nocrit
