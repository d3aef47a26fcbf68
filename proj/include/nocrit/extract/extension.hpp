#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "nocrit/errors.hpp"
#include "nocrit/seqspace.hpp"

namespace nocrit {

struct GraphSample {
  SparseVec x1;
  SparseVec value;
};

// Inverse-distance (Shepard) blend of sample values. Exact at the nodes and
// C-infinity off them. With a positive regularization s the weights become
// 1/(d^2 + s^2): smooth everywhere, O(s^2) away from the exact blend.
class ShepardExtension {
 public:
  ShepardExtension(std::vector<GraphSample> samples, double reg = 0.0, double exponent = 2.0)
      : samples_(std::move(samples)), reg2_(reg * reg), exponent_(exponent) {
    if (samples_.empty()) throw DomainError("extension:nonempty", "no samples to extend");
    dim_ = samples_.front().value.dim();
  }

  const std::vector<GraphSample>& samples() const { return samples_; }
  double regularization() const { return std::sqrt(reg2_); }

  SparseVec operator()(const SparseVec& x) const {
    if (samples_.size() == 1) return samples_.front().value;
    std::vector<double> w(samples_.size());
    double total = 0.0;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const double d = distance(x, samples_[i].x1);
      if (reg2_ == 0.0 && d == 0.0) return samples_[i].value;
      const double q = d * d + reg2_;
      w[i] = exponent_ == 2.0 ? 1.0 / q : std::pow(q, -0.5 * exponent_);
      total += w[i];
    }
    std::vector<double> acc(dim_ + 1, 0.0);
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const double c = w[i] / total;
      for (const Entry& e : samples_[i].value.entries()) acc[e.index] += c * e.value;
    }
    std::vector<Entry> out;
    for (std::size_t k = 1; k <= dim_; ++k)
      if (acc[k] != 0.0) out.push_back({static_cast<Index>(k), acc[k]});
    return SparseVec(dim_, std::move(out));
  }

 private:
  std::vector<GraphSample> samples_;
  double reg2_;
  double exponent_;
  std::size_t dim_;
};

// Smooth-off-set flag selects the weight exponent: 2 gives a C-infinity blend off
// the samples, 1 a continuous blend with cusps at the nodes.
inline ShepardExtension extend_function(std::vector<GraphSample> samples, bool smooth_off_set = true) {
  return ShepardExtension(std::move(samples), 0.0, smooth_off_set ? 2.0 : 1.0);
}

// (sum_i d_i^-p)^(-1/p): a smooth lower bound for the distance to a finite set,
// within a factor n^(-1/p) of the true minimum and zero exactly on the set.
class SoftDistance {
 public:
  SoftDistance(std::vector<SparseVec> points, double p) : points_(std::move(points)), p_(p) {
    if (points_.empty()) throw DomainError("extension:nonempty", "soft distance to an empty set");
  }

  double operator()(const SparseVec& x) const {
    // log-sum-exp of -p log d_i
    std::vector<double> l(points_.size());
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const double d = distance(x, points_[i]);
      if (d == 0.0) return 0.0;
      l[i] = -p_ * std::log(d);
      m = std::max(m, l[i]);
    }
    double s = 0.0;
    for (double v : l) s += std::exp(v - m);
    return std::exp(-(m + std::log(s)) / p_);
  }

  double exact(const SparseVec& x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : points_) best = std::min(best, distance(x, q));
    return best;
  }

  const std::vector<SparseVec>& points() const { return points_; }
  double exponent() const { return p_; }

 private:
  std::vector<SparseVec> points_;
  double p_;
};

// Probe points around the samples for the corpus-based sup-error certificates:
// the nodes themselves plus random offsets at several scales.
inline std::vector<SparseVec> certification_probes(const std::vector<GraphSample>& samples, double reach,
                                                   std::uint64_t seed, int per_sample = 12) {
  std::vector<Index> coords;
  for (const auto& s : samples)
    for (const Entry& e : s.x1.entries()) coords.push_back(e.index);
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  std::vector<SparseVec> probes;
  for (const auto& s : samples) probes.push_back(s.x1);
  if (coords.empty()) return probes;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const std::size_t dim = samples.front().x1.dim();
  for (const auto& s : samples) {
    for (int k = 0; k < per_sample; ++k) {
      std::vector<Entry> e;
      for (Index c : coords) e.push_back({c, g(rng)});
      SparseVec dir(dim, e);
      const double n = l2_norm(dir);
      if (n == 0.0) continue;
      const double r = reach * std::pow(10.0, -6.0 * k / std::max(1, per_sample - 1));
      probes.push_back(axpy(r / n, dir, s.x1));
    }
  }
  return probes;
}

// Regularized Shepard approximant whose sup-distance to the exact blend is
// certified <= tol on the probe set. The regularization starts from an O(s^2)
// error estimate and is halved until the certificate passes.
inline ShepardExtension certified_approximant(const std::vector<GraphSample>& samples, const ShepardExtension& exact,
                                              const std::vector<SparseVec>& probes, double tol,
                                              double* achieved = nullptr) {
  double sep = std::numeric_limits<double>::infinity(), span = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      sep = std::min(sep, distance(samples[i].x1, samples[j].x1));
      span = std::max(span, distance(samples[i].value, samples[j].value));
    }
  if (samples.size() < 2 || span == 0.0) {
    if (achieved) *achieved = 0.0;
    return ShepardExtension(samples, 1.0);
  }
  if (sep == 0.0) throw DomainError("extension:distinct-nodes", "two samples share a base point");
  std::vector<SparseVec> exact_vals;
  exact_vals.reserve(probes.size());
  for (const auto& p : probes) exact_vals.push_back(exact(p));
  double s = sep * std::sqrt(tol / (8.0 * static_cast<double>(samples.size()) * span));
  for (int attempt = 0; attempt < 40; ++attempt, s *= 0.5) {
    ShepardExtension cand(samples, s);
    double worst = 0.0;
    for (std::size_t k = 0; k < probes.size() && worst <= tol; ++k)
      worst = std::max(worst, distance(cand(probes[k]), exact_vals[k]));
    if (worst <= tol) {
      if (achieved) *achieved = worst;
      return cand;
    }
  }
  throw CertificationError("approximant:sup-error", "no regularization met tolerance " + std::to_string(tol));
}

}  // namespace nocrit
