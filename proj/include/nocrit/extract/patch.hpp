#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <vector>

#include "nocrit/extract/graph.hpp"

namespace nocrit {

// One member (X_i, W_i, V_i) of a finite family: X_i is the graph of the
// shared map over the base points, W_i and V_i nested windows around it.
struct CoverPiece {
  std::vector<SparseVec> base;
  Window inner;  // W_i
  Window outer;  // V_i
};

struct CoverPatch {
  ProductSplit split;
  std::function<SparseVec(const SparseVec&)> f;
  std::vector<CoverPiece> pieces;  // pieces[0] carries X_0, the set to extract
  Window U = Window::everywhere();
  double eps = 0.5;             // total displacement budget
  std::vector<double> budgets;  // per intersection piece; default eps / 2^n each
  double tol_set = 1e-9;
  int series = 12;
};

// Removal of the part of X_0 inside U, one intersection piece Z_m at a time.
// Pieces with more memberships come first. Each is removed by a graph
// extraction inside U and the W_i of its members, with the current images of
// points of the non-member sets (and of points kept earlier) punched out.
class PatchedExtraction {
 public:
  struct Piece {
    std::vector<std::size_t> members;  // indices i with Z_m inside X_i
    std::vector<std::size_t> points;   // indices into graph_points()
    double budget = 0.0;
    std::shared_ptr<GraphExtraction> map;
  };

  explicit PatchedExtraction(CoverPatch cp) : cp_(std::move(cp)) {
    const std::size_t n = cp_.pieces.size();
    if (n == 0) throw ConfigError("patch:family", "empty family");
    if (n - 1 > 5) throw ConfigError("patch:family", "at most five pieces besides X_0");
    collect_points();
    plan();
    build();
  }

  const std::vector<Piece>& pieces() const { return pieces_; }
  const CoverPatch& patch() const { return cp_; }
  double total_budget() const {
    double s = 0.0;
    for (const auto& p : pieces_) s += p.budget;
    return s;
  }

  // graph points of every member, X_0's first
  const std::vector<GraphSample>& graph_points() const { return points_; }
  // membership[k][i]: graph point k lies in X_i
  bool member(std::size_t k, std::size_t i) const { return membership_[k][i]; }

  // the extracting map V \ X_0 -> V \ (X_0 \ U)
  ProductPoint inverse(ProductPoint x) const {
    for (const auto& p : pieces_) x = p.map->inverse(x);
    return x;
  }

  ProductPoint forward(ProductPoint y) const {
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) y = it->map->forward(y);
    return y;
  }

 private:
  void collect_points() {
    auto same = [&](const SparseVec& a, const SparseVec& b) { return distance(a, b) <= cp_.tol_set; };
    for (const auto& piece : cp_.pieces)
      for (const auto& b : piece.base) {
        bool seen = false;
        for (const auto& q : points_) seen = seen || same(q.x1, b);
        if (!seen) points_.push_back({b, cp_.f(b)});
      }
    for (const auto& q : points_) {
      std::vector<bool> row;
      for (const auto& piece : cp_.pieces) {
        bool in = false;
        for (const auto& b : piece.base) in = in || same(q.x1, b);
        row.push_back(in);
      }
      membership_.push_back(row);
    }
    for (std::size_t k = 0; k < points_.size(); ++k)
      for (std::size_t i = 0; i < cp_.pieces.size(); ++i) {
        ProductPoint p{points_[k].x1, points_[k].value};
        if (membership_[k][i] && !cp_.pieces[i].inner.contains(p))
          throw ConfigError("patch:nesting", "X_i point outside W_i");
      }
  }

  void plan() {
    const std::size_t n = cp_.pieces.size() - 1;
    std::vector<unsigned> masks;
    for (unsigned m = 0; m < (1u << n); ++m) masks.push_back(m);
    // more memberships first
    std::stable_sort(masks.begin(), masks.end(),
                     [](unsigned a, unsigned b) { return __builtin_popcount(a) > __builtin_popcount(b); });
    const double each = cp_.eps / static_cast<double>(1u << n);
    std::size_t slot = 0;
    for (unsigned mask : masks) {
      Piece p;
      p.members.push_back(0);
      for (std::size_t i = 1; i <= n; ++i)
        if (mask & (1u << (i - 1))) p.members.push_back(i);
      for (std::size_t k = 0; k < points_.size(); ++k) {
        if (!membership_[k][0]) continue;
        bool match = true;
        for (std::size_t i = 1; i <= n; ++i) match = match && membership_[k][i] == bool(mask & (1u << (i - 1)));
        if (match) p.points.push_back(k);
      }
      p.budget = cp_.budgets.empty() ? each : cp_.budgets.at(slot);
      ++slot;
      if (!p.points.empty()) pieces_.push_back(std::move(p));
    }
    double total = 0.0;
    for (const auto& p : pieces_) total += p.budget;
    if (total > cp_.eps * (1.0 + 1e-12)) throw BudgetError("patch:budget", "piece budgets exceed eps");
  }

  void build() {
    std::vector<ProductPoint> where;
    std::vector<bool> gone(points_.size(), false), kept(points_.size(), false);
    for (const auto& q : points_) where.push_back({q.x1, q.value});
    for (auto& piece : pieces_) {
      std::vector<Window> parts{cp_.U};
      for (std::size_t i : piece.members) parts.push_back(cp_.pieces[i].inner);
      std::vector<ProductPoint> holes;
      std::vector<bool> mine(points_.size(), false);
      for (std::size_t k : piece.points) mine[k] = true;
      for (std::size_t k = 0; k < points_.size(); ++k) {
        if (mine[k] || gone[k]) continue;
        bool foreign = kept[k];
        for (std::size_t i = 0; i < cp_.pieces.size(); ++i)
          if (membership_[k][i] && std::find(piece.members.begin(), piece.members.end(), i) == piece.members.end())
            foreign = true;
        if (foreign) holes.push_back(where[k]);
      }
      Window window = Window::punctured(Window::intersect(parts), holes);

      GraphSpec spec{cp_.split, {}, window, piece.budget};
      spec.series = cp_.series;
      for (std::size_t k : piece.points) spec.samples.push_back({where[k].x1, where[k].x2});
      try {
        piece.map = std::make_shared<GraphExtraction>(spec);
      } catch (const Error& e) {
        throw StageError("patch", e);
      }
      for (std::size_t k = 0; k < points_.size(); ++k) {
        if (gone[k]) continue;
        if (mine[k]) {
          gone[k] = piece.map->removes({where[k].x1, where[k].x2});
          kept[k] = !gone[k];
          continue;
        }
        where[k] = piece.map->inverse(where[k]);
      }
    }
  }

  CoverPatch cp_;
  std::vector<GraphSample> points_;
  std::vector<std::vector<bool>> membership_;
  std::vector<Piece> pieces_;
};

}  // namespace nocrit
