#pragma once

#include <Eigen/SVD>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "nocrit/smoothing/blocks.hpp"
#include "nocrit/smoothing/partition.hpp"

namespace nocrit {

struct JacobianAt {
  Target value;
  std::vector<Index> coords;  // columns of the jacobian
  Eigen::MatrixXd jacobian;   // m x coords.size()
};

// phi(y) = sum_n (f(y_n) + T_n(y - y_n)) psi_n(y)
class Approximant {
 public:
  Approximant(MapField f, const BallCover& cover, BlockSurjections ops, BlockDecomposition decomp)
      : f_(std::move(f)), cover_(&cover), pu_(cover), ops_(std::move(ops)), decomp_(std::move(decomp)) {
    for (const auto& b : cover.balls) anchor_.push_back(f_(b.center));
    const auto& g = decomp_.block("guard").indices;
    guard_.assign(g.begin(), g.end());
  }

  const BallCover& cover() const { return *cover_; }
  const PartitionOfUnity& partition() const { return pu_; }
  const BlockSurjections& operators() const { return ops_; }
  const BlockDecomposition& decomposition() const { return decomp_; }
  std::size_t m() const { return ops_.m; }

  // f(y_n) + T_n(y - y_n)
  Target local(std::size_t n, const SparseVec& y) const {
    return anchor_[n] + ops_.apply(n, y - cover_->balls[n].center);
  }

  Target value(const SparseVec& y) const {
    const auto pv = pu_.eval(y, false);
    Target out = Target::Zero(static_cast<Eigen::Index>(m()));
    for (std::size_t i = 0; i < pv.active.size(); ++i) out += pv.weights[i] * local(pv.active[i], y);
    return out;
  }

  // D phi(y) v
  Target derivative(const SparseVec& y, const SparseVec& v) const {
    const auto pv = pu_.eval(y);
    Target out = Target::Zero(static_cast<Eigen::Index>(m()));
    for (std::size_t i = 0; i < pv.active.size(); ++i) {
      const std::size_t n = pv.active[i];
      out += pv.weights[i] * ops_.apply(n, v) + inner(pv.gradients[i], v) * local(n, y);
    }
    return out;
  }

  // value and analytic jacobian over the active gradient coordinates, the
  // blocks of the active balls and any extra columns requested
  JacobianAt eval(const SparseVec& y, const std::vector<Index>& extra = {}) const {
    const auto pv = pu_.eval(y);
    std::set<Index> cols(extra.begin(), extra.end());
    for (std::size_t i = 0; i < pv.active.size(); ++i) {
      for (const auto& e : pv.gradients[i].entries()) cols.insert(e.index);
      for (Index j : ops_.blocks[pv.active[i]]) cols.insert(j);
    }
    JacobianAt out;
    out.coords.assign(cols.begin(), cols.end());
    const auto M = static_cast<Eigen::Index>(m());
    out.value = Target::Zero(M);
    out.jacobian = Eigen::MatrixXd::Zero(M, static_cast<Eigen::Index>(out.coords.size()));
    for (std::size_t i = 0; i < pv.active.size(); ++i) {
      const std::size_t n = pv.active[i];
      const Target loc = local(n, y);
      out.value += pv.weights[i] * loc;
      for (std::size_t c = 0; c < out.coords.size(); ++c) {
        const auto cc = static_cast<Eigen::Index>(c);
        const double dpsi = pv.gradients[i].get(out.coords[c]);
        if (dpsi != 0.0) out.jacobian.col(cc) += dpsi * loc;
        const auto& I = ops_.blocks[n];
        for (std::size_t r = 0; r < I.size(); ++r)
          if (I[r] == out.coords[c]) out.jacobian(static_cast<Eigen::Index>(r), cc) += pv.weights[i] * ops_.scale[n];
      }
    }
    return out;
  }

  // x has a nonzero coordinate outside span{e_j : j in the guard block or j <= N_n}
  bool guard(const SparseVec& y) const {
    const Index top = cover_->balls[pu_.top_active(y)].span_top;
    for (const auto& e : y.entries())
      if (e.value != 0.0 && e.index > top && !std::binary_search(guard_.begin(), guard_.end(), e.index)) return true;
    return false;
  }

 private:
  MapField f_;
  const BallCover* cover_;
  PartitionOfUnity pu_;
  BlockSurjections ops_;
  BlockDecomposition decomp_;
  std::vector<Target> anchor_;
  std::vector<Index> guard_;
};

inline double smallest_singular_value(const Eigen::MatrixXd& J) {
  if (J.cols() < J.rows() || J.rows() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  return svd.singularValues().minCoeff();
}

struct CriticalVerdict {
  double sigma_min = 0.0;
  std::string verdict;  // "surjective", "inconclusive", "critical"
  bool guard = false;
};

inline CriticalVerdict critical_certificate(const Eigen::MatrixXd& J, bool guard, double tau_rank = 1e-6) {
  CriticalVerdict v;
  v.sigma_min = smallest_singular_value(J);
  v.guard = guard;
  if (v.sigma_min >= tau_rank) v.verdict = "surjective";
  else if (v.sigma_min >= tau_rank / 10.0) v.verdict = "inconclusive";
  else v.verdict = "critical";
  return v;
}

inline CriticalVerdict critical_certificate(const Approximant& phi, const SparseVec& y, double tau_rank = 1e-6) {
  return critical_certificate(phi.eval(y).jacobian, phi.guard(y), tau_rank);
}

// central differences of a map into R^m over the given coordinates
inline Eigen::MatrixXd finite_difference_jacobian(const MapField& F, const SparseVec& x,
                                                  const std::vector<Index>& coords, double step = 1e-6) {
  const Target f0 = F(x);
  Eigen::MatrixXd J(f0.size(), static_cast<Eigen::Index>(coords.size()));
  for (std::size_t c = 0; c < coords.size(); ++c) {
    const SparseVec e = SparseVec::unit(coords[c], step, x.dim());
    J.col(static_cast<Eigen::Index>(c)) = (F(x + e) - F(x - e)) / (2.0 * step);
  }
  return J;
}

}  // namespace nocrit
