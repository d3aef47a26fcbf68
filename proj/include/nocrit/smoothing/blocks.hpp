#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "nocrit/smoothing/cover.hpp"

namespace nocrit {

enum class BlockMode {
  Disjoint,  // one private block per ball
  Colored,   // balls that can be active together get disjoint blocks
};

// T_n = (eps(y_n) / 4) S_n with S_n the selection of the block I_n onto R^m.
struct BlockSurjections {
  std::size_t m = 0;
  std::vector<std::vector<Index>> blocks;  // I_n, ordered; S_n sends e_{I_n[i]} to the i-th unit vector
  std::vector<double> scale;               // |T_n| = eps(y_n) / 4
  std::size_t colors = 0;

  // T_n v
  Target apply(std::size_t n, const SparseVec& v) const {
    Target out = Target::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) out(static_cast<Eigen::Index>(i)) = scale[n] * v.get(blocks[n][i]);
    return out;
  }

  // S_n as an m x |I_n| matrix
  Eigen::MatrixXd selection(std::size_t n) const {
    return Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(blocks[n].size()));
  }

  double norm(std::size_t n) const { return scale[n]; }
};

inline BlockSurjections block_operators(std::size_t m, const BallCover& cover, const BlockDecomposition& decomp,
                                        BlockMode mode = BlockMode::Disjoint) {
  if (m == 0) throw DomainError("blocks:target", "target dimension must be positive");
  const auto& reserved = decomp.block("guard").indices;
  BlockSurjections ops;
  ops.m = m;
  const std::size_t n = cover.size();
  std::vector<std::size_t> color(n, 0);
  if (mode == BlockMode::Disjoint) {
    for (std::size_t k = 0; k < n; ++k) color[k] = k;
    ops.colors = n;
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      std::set<std::size_t> taken;
      for (std::size_t j = 0; j < k; ++j) {
        const auto& a = cover.balls[j];
        const auto& b = cover.balls[k];
        if (std::abs(a.center_norm - b.center_norm) < a.radius + b.radius &&
            distance(a.center, b.center) < a.radius + b.radius)
          taken.insert(color[j]);
      }
      while (taken.count(color[k])) ++color[k];
      ops.colors = std::max(ops.colors, color[k] + 1);
    }
  }
  if (ops.colors * m > reserved.size())
    throw CapacityError("blocks:capacity", std::to_string(ops.colors) + " blocks of size " + std::to_string(m) +
                                               " exceed the reserved block of " + std::to_string(reserved.size()));
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Index> I(reserved.begin() + static_cast<long>(color[k] * m),
                         reserved.begin() + static_cast<long>((color[k] + 1) * m));
    ops.blocks.push_back(std::move(I));
    ops.scale.push_back(cover.balls[k].eps_center / 4.0);
  }
  return ops;
}

}  // namespace nocrit
