#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nocrit/errors.hpp"

namespace nocrit {

using Index = std::uint32_t;  // basis indices start at 1

inline constexpr std::size_t kDefaultDim = 64;

struct Entry {
  Index index;
  double value;
  bool operator==(const Entry&) const = default;
};

// Finitely supported coefficient sequence truncated at dim(). Entries are kept
// sorted by index and never store an exact zero.
class SparseVec {
 public:
  explicit SparseVec(std::size_t dim = kDefaultDim) : dim_(dim) {}

  SparseVec(std::size_t dim, std::vector<Entry> entries) : dim_(dim) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.index < b.index; });
    for (const Entry& e : entries) {
      check_index(e.index);
      if (!entries_.empty() && entries_.back().index == e.index) {
        entries_.back().value += e.value;
      } else {
        entries_.push_back(e);
      }
    }
    std::erase_if(entries_, [](const Entry& e) { return e.value == 0.0; });
  }

  SparseVec(std::size_t dim, std::initializer_list<Entry> entries)
      : SparseVec(dim, std::vector<Entry>(entries)) {}

  static SparseVec unit(Index k, double scale = 1.0, std::size_t dim = kDefaultDim) {
    return SparseVec(dim, {Entry{k, scale}});
  }

  static SparseVec from_dense(std::span<const double> dense, std::size_t dim = kDefaultDim) {
    if (dense.size() > dim) throw TruncationError("seqspace:truncation", "dense input longer than D");
    std::vector<Entry> e;
    for (std::size_t i = 0; i < dense.size(); ++i)
      if (dense[i] != 0.0) e.push_back({static_cast<Index>(i + 1), dense[i]});
    return SparseVec(dim, std::move(e));
  }

  std::vector<double> to_dense() const {
    std::vector<double> out(dim_, 0.0);
    for (const Entry& e : entries_) out[e.index - 1] = e.value;
    return out;
  }

  std::size_t dim() const { return dim_; }
  std::span<const Entry> entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  Index max_index() const { return entries_.empty() ? 0 : entries_.back().index; }

  double get(Index k) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), k,
                               [](const Entry& e, Index i) { return e.index < i; });
    return (it != entries_.end() && it->index == k) ? it->value : 0.0;
  }

  void set(Index k, double v) {
    check_index(k);
    auto it = std::lower_bound(entries_.begin(), entries_.end(), k,
                               [](const Entry& e, Index i) { return e.index < i; });
    if (it != entries_.end() && it->index == k) {
      if (v == 0.0) entries_.erase(it);
      else it->value = v;
    } else if (v != 0.0) {
      entries_.insert(it, Entry{k, v});
    }
  }

  bool operator==(const SparseVec& o) const { return dim_ == o.dim_ && entries_ == o.entries_; }

  void check_index(Index k) const {
    if (k == 0 || k > dim_)
      throw TruncationError("seqspace:truncation",
                            "index " + std::to_string(k) + " outside 1.." + std::to_string(dim_));
  }

 private:
  std::size_t dim_;
  std::vector<Entry> entries_;
};

namespace detail {
inline void same_dim(const SparseVec& v, const SparseVec& w) {
  if (v.dim() != w.dim())
    throw TruncationError("seqspace:truncation", "operands truncated at different D");
}
}  // namespace detail

// a*v + w
inline SparseVec axpy(double a, const SparseVec& v, const SparseVec& w) {
  detail::same_dim(v, w);
  if (a == 0.0) return w;
  auto ve = v.entries();
  auto we = w.entries();
  std::vector<Entry> out;
  out.reserve(ve.size() + we.size());
  std::size_t i = 0, j = 0;
  while (i < ve.size() || j < we.size()) {
    if (j == we.size() || (i < ve.size() && ve[i].index < we[j].index)) {
      out.push_back({ve[i].index, a * ve[i].value});
      ++i;
    } else if (i == ve.size() || we[j].index < ve[i].index) {
      out.push_back(we[j]);
      ++j;
    } else {
      out.push_back({ve[i].index, a * ve[i].value + we[j].value});
      ++i;
      ++j;
    }
  }
  return SparseVec(v.dim(), std::move(out));
}

inline double inner(const SparseVec& v, const SparseVec& w) {
  detail::same_dim(v, w);
  auto ve = v.entries();
  auto we = w.entries();
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < ve.size() && j < we.size()) {
    if (ve[i].index < we[j].index) ++i;
    else if (we[j].index < ve[i].index) ++j;
    else s += ve[i++].value * we[j++].value;
  }
  return s;
}

inline double l2_norm(const SparseVec& v) {
  double s = 0.0;
  for (const Entry& e : v.entries()) s += e.value * e.value;
  return std::sqrt(s);
}

// ||v - w|| without materializing the difference.
inline double distance(const SparseVec& v, const SparseVec& w) {
  detail::same_dim(v, w);
  auto ve = v.entries();
  auto we = w.entries();
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < ve.size() || j < we.size()) {
    double d;
    if (j == we.size() || (i < ve.size() && ve[i].index < we[j].index)) d = ve[i++].value;
    else if (i == ve.size() || we[j].index < ve[i].index) d = -we[j++].value;
    else d = ve[i++].value - we[j++].value;
    s += d * d;
  }
  return std::sqrt(s);
}

inline SparseVec operator+(const SparseVec& v, const SparseVec& w) { return axpy(1.0, v, w); }
inline SparseVec operator-(const SparseVec& v, const SparseVec& w) { return axpy(-1.0, w, v); }
inline SparseVec operator*(double a, const SparseVec& v) {
  if (a == 0.0) return SparseVec(v.dim());
  std::vector<Entry> e(v.entries().begin(), v.entries().end());
  for (Entry& x : e) x.value *= a;
  return SparseVec(v.dim(), std::move(e));
}
inline SparseVec operator-(const SparseVec& v) { return -1.0 * v; }

// Named partition of {1..D} into disjoint index blocks.
class BlockDecomposition {
 public:
  struct Block {
    std::string name;
    std::vector<Index> indices;
  };

  BlockDecomposition(std::size_t dim, std::vector<Block> blocks)
      : dim_(dim), blocks_(std::move(blocks)), owner_(dim + 1, -1) {
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      for (Index i : blocks_[b].indices) {
        if (i == 0 || i > dim_)
          throw TruncationError("seqspace:truncation", "block index outside 1..D");
        if (owner_[i] != -1)
          throw DomainError("seqspace:partition", "index " + std::to_string(i) + " in two blocks");
        owner_[i] = static_cast<int>(b);
      }
    }
    for (std::size_t i = 1; i <= dim_; ++i)
      if (owner_[i] == -1)
        throw DomainError("seqspace:partition", "index " + std::to_string(i) + " in no block");
  }

  // Guarded block = multiples of 4; the remaining indices are split into a
  // leading data block and a trailing extraction block of the given size.
  static BlockDecomposition standard(std::size_t dim, std::size_t extraction_size = 0) {
    std::vector<Index> guard, rest;
    for (Index i = 1; i <= dim; ++i) (i % 4 == 0 ? guard : rest).push_back(i);
    if (extraction_size == 0) extraction_size = rest.size() / 2;
    if (extraction_size >= rest.size())
      throw DomainError("seqspace:partition", "extraction block leaves no data coordinates");
    std::vector<Index> data(rest.begin(), rest.end() - static_cast<long>(extraction_size));
    std::vector<Index> ext(rest.end() - static_cast<long>(extraction_size), rest.end());
    return BlockDecomposition(dim, {{"data", data}, {"guard", guard}, {"extraction", ext}});
  }

  std::size_t dim() const { return dim_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  const Block& block(const std::string& name) const {
    for (const Block& b : blocks_)
      if (b.name == name) return b;
    throw DomainError("seqspace:partition", "no block named " + name);
  }

  const std::string& owner(Index i) const {
    if (i == 0 || i > dim_) throw TruncationError("seqspace:truncation", "index outside 1..D");
    return blocks_[static_cast<std::size_t>(owner_[i])].name;
  }

  SparseVec project(const SparseVec& v, const std::string& name) const {
    const int b = block_id(name);
    std::vector<Entry> out;
    for (const Entry& e : v.entries())
      if (owner_[e.index] == b) out.push_back(e);
    return SparseVec(v.dim(), std::move(out));
  }

 private:
  int block_id(const std::string& name) const {
    for (std::size_t b = 0; b < blocks_.size(); ++b)
      if (blocks_[b].name == name) return static_cast<int>(b);
    throw DomainError("seqspace:partition", "no block named " + name);
  }

  std::size_t dim_;
  std::vector<Block> blocks_;
  std::vector<int> owner_;
};

struct ProductPoint {
  SparseVec x1;
  SparseVec x2;
  bool operator==(const ProductPoint&) const = default;
};

// E = E1 (+) E2 where E2 is an ordered index list and E1 is everything else.
// The order of E2 matters to the gauges: the first entries carry the largest
// weights of the asymmetric functional and host the deleting-curve anchors.
class ProductSplit {
 public:
  ProductSplit(std::size_t dim, std::vector<Index> second)
      : dim_(dim), second_(std::move(second)), pos_(dim + 1, -1) {
    for (std::size_t k = 0; k < second_.size(); ++k) {
      Index i = second_[k];
      if (i == 0 || i > dim_) throw TruncationError("seqspace:truncation", "E2 index outside 1..D");
      if (pos_[i] != -1) throw DomainError("seqspace:partition", "repeated E2 index");
      pos_[i] = static_cast<int>(k);
    }
    if (second_.empty()) throw DomainError("seqspace:partition", "empty second block");
  }

  std::size_t dim() const { return dim_; }
  const std::vector<Index>& second() const { return second_; }
  bool in_second(Index i) const { return pos_[i] >= 0; }
  // 0-based position of i inside E2, or -1.
  int position(Index i) const { return pos_[i]; }

  ProductPoint split(const SparseVec& v) const {
    std::vector<Entry> a, b;
    for (const Entry& e : v.entries()) (in_second(e.index) ? b : a).push_back(e);
    return {SparseVec(v.dim(), std::move(a)), SparseVec(v.dim(), std::move(b))};
  }

  SparseVec join(const ProductPoint& p) const { return p.x1 + p.x2; }

  void check(const ProductPoint& p) const {
    for (const Entry& e : p.x1.entries())
      if (in_second(e.index)) throw DomainError("seqspace:product", "x1 has an E2 coordinate");
    for (const Entry& e : p.x2.entries())
      if (!in_second(e.index)) throw DomainError("seqspace:product", "x2 has an E1 coordinate");
  }

 private:
  std::size_t dim_;
  std::vector<Index> second_;
  std::vector<int> pos_;
};

inline double distance(const ProductPoint& p, const ProductPoint& q) {
  const double a = distance(p.x1, q.x1), b = distance(p.x2, q.x2);
  return std::sqrt(a * a + b * b);
}

// Point of the upper unit sphere in E + R, charted by u with t = sqrt(1-|u|^2).
struct SpherePoint {
  SparseVec u;
  double t;
};

inline constexpr double kEquatorMargin = 0.1;

inline SpherePoint lift_to_sphere(const SparseVec& u, double t_min = kEquatorMargin) {
  const double n2 = inner(u, u);
  const double t2 = 1.0 - n2;
  if (!(t2 >= t_min * t_min))
    throw EquatorError("sphere:equator-margin",
                       "|u|^2=" + std::to_string(n2) + " leaves t below " + std::to_string(t_min));
  return {u, std::sqrt(t2)};
}

inline const SparseVec& drop_height(const SpherePoint& y) { return y.u; }

// Slope of the tangent hyperplane at y: L_y(w) = -<u_y, w> / t_y.
inline double tangent_slope(const SpherePoint& y, const SparseVec& w) {
  return -inner(y.u, w) / y.t;
}

}  // namespace nocrit
