#pragma once

#include <vector>

#include "nocrit/gauges.hpp"
#include "nocrit/smoothing/cover.hpp"

namespace nocrit {

struct PartitionValue {
  std::vector<std::size_t> active;    // ball indices with h_k(x) > 0
  std::vector<double> weights;        // psi_k on the active set
  std::vector<SparseVec> gradients;   // grad psi_k on the active set
  std::vector<SparseVec> raw_grads;   // grad h_k on the active set
  Eigen::MatrixXd sigma;              // grad psi_k = sum_j sigma(k, j) grad h_j
  double total = 0.0;                 // sum of raw bumps
};

// Raw bumps h_k(x) = theta(|x - y_k| / r_k) with theta falling from 1 to 0 on
// [1/2, 1], normalized psi_k = h_k / sum_j h_j. The quotient rule gives
// sigma(k, j) = (delta_kj - psi_k) / sum_j h_j.
class PartitionOfUnity {
 public:
  explicit PartitionOfUnity(const BallCover& cover) : cover_(&cover), theta_(0.5, 1.0, Direction::Falling) {}

  const BallCover& cover() const { return *cover_; }

  double bump(std::size_t k, const SparseVec& x) const {
    const auto& b = cover_->balls[k];
    return theta_(distance(x, b.center) / b.radius);
  }

  // Factored through the profile: where theta is 0 its derivative is exactly 0,
  // so the returned gradient is the zero vector.
  SparseVec bump_grad(std::size_t k, const SparseVec& x) const {
    const auto& b = cover_->balls[k];
    const double d = distance(x, b.center);
    const double slope = theta_.deriv(d / b.radius);
    if (slope == 0.0 || d == 0.0) return SparseVec(x.dim());
    return (slope / (b.radius * d)) * (x - b.center);
  }

  PartitionValue eval(const SparseVec& x, bool with_gradients = true) const {
    PartitionValue out;
    for (std::size_t k : cover_->touching(x)) {
      const double h = bump(k, x);
      if (h > 0.0) {
        out.active.push_back(k);
        out.weights.push_back(h);
      }
    }
    if (out.active.empty()) throw CoverageError("partition:coverage", "point outside every ball");
    for (double h : out.weights) out.total += h;
    for (double& w : out.weights) w /= out.total;
    if (!with_gradients) return out;

    const auto n = static_cast<Eigen::Index>(out.active.size());
    out.sigma.resize(n, n);
    SparseVec sum(x.dim());
    for (std::size_t k : out.active) {
      out.raw_grads.push_back(bump_grad(k, x));
      sum = sum + out.raw_grads.back();
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      for (Eigen::Index j = 0; j < n; ++j) out.sigma(i, j) = ((i == j ? 1.0 : 0.0) - out.weights[ui]) / out.total;
      out.gradients.push_back((1.0 / out.total) * axpy(-out.weights[ui], sum, out.raw_grads[ui]));
    }
    return out;
  }

  // largest active index n_x at x
  std::size_t top_active(const SparseVec& x) const {
    auto v = eval(x, false);
    return v.active.back();
  }

 private:
  const BallCover* cover_;
  SmoothStep theta_;
};

}  // namespace nocrit
