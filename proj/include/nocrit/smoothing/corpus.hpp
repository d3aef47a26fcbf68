#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "nocrit/smoothing/cover.hpp"

namespace nocrit {

// Seeded corpus: support of 5..20 coordinates drawn uniformly from the data
// block, standard normal coefficients, then v / (1 + |v|) into the unit ball.
inline std::vector<SparseVec> sample_corpus(const BlockDecomposition& decomp, std::size_t n, std::uint64_t seed) {
  const auto& data = decomp.block("data").indices;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const std::size_t hi = std::min<std::size_t>(20, data.size());
  const std::size_t lo = std::min<std::size_t>(5, hi);
  std::uniform_int_distribution<std::size_t> size(lo, hi);
  std::vector<SparseVec> out;
  std::vector<Index> pool = data;
  for (std::size_t k = 0; k < n; ++k) {
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t s = size(rng);
    std::vector<Entry> e;
    for (std::size_t i = 0; i < s; ++i) e.push_back({pool[i], g(rng)});
    SparseVec v(decomp.dim(), e);
    out.push_back((1.0 / (1.0 + l2_norm(v))) * v);
  }
  return out;
}

// x -> (|x_i|)_i over the given coordinates
inline MapField abs_map(std::vector<Index> coords) {
  return [coords = std::move(coords)](const SparseVec& x) {
    Target out(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t i = 0; i < coords.size(); ++i) out(static_cast<Eigen::Index>(i)) = std::abs(x.get(coords[i]));
    return out;
  };
}

// eps(x) = base (1 + |x|)
inline EpsField affine_eps(double base) {
  return [base](const SparseVec& x) { return base * (1.0 + l2_norm(x)); };
}

}  // namespace nocrit
