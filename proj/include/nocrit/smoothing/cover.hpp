#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <vector>

#include "nocrit/errors.hpp"
#include "nocrit/seqspace.hpp"

namespace nocrit {

using Target = Eigen::VectorXd;
using MapField = std::function<Target(const SparseVec&)>;
using EpsField = std::function<double(const SparseVec&)>;

struct CoverConfig {
  double r_max = 1.0;       // first radius tried; also keeps |T_n(y - y_n)| <= eps/4
  double r_min = 1e-7;      // give up below this
  double shrink = 0.5;
  double oscillation = 1.0 / 16.0;  // certified fraction of eps(y_n)
  double gram_cond = 1e8;
  double nudge = 1e-6;
  int random_probes = 8;
  std::vector<Index> probe_axes;  // extra axis probes besides the center's support
  std::vector<Index> nudge_axes;  // directions allowed for nudges; empty = all outside the guard
  std::uint64_t seed = 17;
};

struct Ball {
  SparseVec center;
  double radius = 0.0;
  double eps_center = 0.0;
  double osc_f = 0.0;    // certified oscillation of f on the probes
  double osc_eps = 0.0;  // and of eps
  int probes = 0;
  bool nudged = false;   // center moved for linear independence
  double gram_cond = 1.0;  // Gram condition of this center and its overlapping predecessors
  Index span_top = 0;    // N_n: largest basis index used by centers 1..n
  double center_norm = 0.0;

  double norm_hint() const { return center_norm; }
  void set_norm_hint() { center_norm = l2_norm(center); }
};

struct BallCover {
  std::vector<Ball> balls;
  CoverConfig config;

  std::size_t size() const { return balls.size(); }

  // balls with |x - y_n| < r_n, in construction order
  std::vector<std::size_t> touching(const SparseVec& x) const {
    std::vector<std::size_t> out;
    const double nx = l2_norm(x);
    for (std::size_t k = 0; k < balls.size(); ++k) {
      const auto& b = balls[k];
      if (std::abs(nx - b.norm_hint()) >= b.radius) continue;
      if (distance(x, b.center) < b.radius) out.push_back(k);
    }
    return out;
  }

  std::size_t dependent() const {
    std::size_t n = 0;
    for (const auto& b : balls) n += b.gram_cond > config.gram_cond;
    return n;
  }

  bool in_core(const SparseVec& x) const {
    const double nx = l2_norm(x);
    for (const auto& b : balls) {
      if (std::abs(nx - b.norm_hint()) > 0.5 * b.radius) continue;
      if (distance(x, b.center) <= 0.5 * b.radius) return true;
    }
    return false;
  }
};

namespace detail {

// probe set for a ball: axis pairs over the center's support and the extra
// axes, the radial pair, seeded random directions, and corpus points inside
inline std::vector<SparseVec> ball_probes(const SparseVec& c, double r, const CoverConfig& cfg,
                                          const std::vector<SparseVec>& corpus, std::mt19937_64& rng) {
  const double s = r * (1.0 - 1e-9);
  std::vector<SparseVec> p{c};
  std::set<Index> axes(cfg.probe_axes.begin(), cfg.probe_axes.end());
  for (const auto& e : c.entries()) axes.insert(e.index);
  for (Index i : axes) {
    p.push_back(c + SparseVec::unit(i, s, c.dim()));
    p.push_back(c + SparseVec::unit(i, -s, c.dim()));
  }
  const double n = l2_norm(c);
  if (n > 0.0) {
    p.push_back(((n + s) / n) * c);
    p.push_back(((n - s) / n) * c);
  }
  std::normal_distribution<double> g;
  std::vector<Index> pool(axes.begin(), axes.end());
  if (!pool.empty()) {
    for (int k = 0; k < cfg.random_probes; ++k) {
      std::vector<Entry> e;
      for (Index i : pool) e.push_back({i, g(rng)});
      SparseVec d(c.dim(), e);
      const double dn = l2_norm(d);
      if (dn > 0.0) p.push_back(axpy(s / dn, d, c));
    }
  }
  for (const auto& x : corpus)
    if (distance(x, c) < r) p.push_back(x);
  return p;
}

inline double spread(const std::vector<Target>& v) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) m = std::max(m, (v[i] - v[j]).norm());
  return m;
}

inline double gram_condition(const std::vector<const SparseVec*>& vs) {
  const auto n = static_cast<Eigen::Index>(vs.size());
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) G(i, j) = G(j, i) = inner(*vs[i], *vs[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

}  // namespace detail

// Greedy cover of the corpus. A corpus point outside the core (half radius)
// of every ball so far becomes a new center; its radius is shrunk from r_max
// until the oscillation of f and eps over the probe set is below
// oscillation * eps(center). Centers of overlapping balls are kept linearly
// independent (Gram condition number), nudging a dependent center along the
// first basis direction the neighbours do not use.
inline BallCover build_ball_cover(const MapField& f, const EpsField& eps, const std::vector<SparseVec>& corpus,
                                  CoverConfig cfg = {}) {
  if (corpus.empty()) throw CoverError("cover:nonempty", "empty corpus");
  BallCover cover;
  cover.config = cfg;
  std::mt19937_64 rng(cfg.seed);
  Index top = 0;
  for (const auto& x : corpus) {
    if (cover.in_core(x)) continue;
    Ball b;
    b.center = x;
    const double ec = eps(x);
    if (!(ec > 0.0)) throw CoverError("cover:eps-positive", "eps must be positive");
    double r = cfg.r_max;
    for (;;) {
      if (r < cfg.r_min) throw CoverError("cover:oscillation", "oscillation certificate fails at minimum radius");
      auto probes = detail::ball_probes(x, r, cfg, corpus, rng);
      std::vector<Target> fv;
      std::vector<Target> ev;
      for (const auto& p : probes) {
        fv.push_back(f(p));
        ev.push_back(Target::Constant(1, eps(p)));
      }
      const double of = detail::spread(fv), oe = detail::spread(ev);
      if (of <= cfg.oscillation * ec && oe <= cfg.oscillation * ec) {
        b.osc_f = of;
        b.osc_eps = oe;
        b.probes = static_cast<int>(probes.size());
        break;
      }
      r *= cfg.shrink;
    }
    b.radius = r;
    b.eps_center = ec;

    std::vector<const SparseVec*> near;
    std::set<Index> used;
    for (const auto& o : cover.balls)
      if (distance(o.center, x) < o.radius + r) {
        near.push_back(&o.center);
        for (const auto& e : o.center.entries()) used.insert(e.index);
      }
    for (const auto& e : x.entries()) used.insert(e.index);
    near.push_back(&b.center);
    if (detail::gram_condition(near) > cfg.gram_cond) {
      std::vector<Index> axes = cfg.nudge_axes;
      if (axes.empty())
        for (Index i = 1; i <= x.dim(); ++i)
          if (i % 4 != 0) axes.push_back(i);
      Index free = 0;
      for (Index i : axes)
        if (free == 0 && !used.count(i)) free = i;
      // out of directions: the ledger records the dependence instead
      if (free != 0) {
        b.center.set(free, b.center.get(free) + cfg.nudge);
        b.nudged = true;
      }
    }
    b.gram_cond = detail::gram_condition(near);
    top = std::max(top, b.center.max_index());
    b.span_top = top;
    b.set_norm_hint();
    cover.balls.push_back(std::move(b));
  }
  return cover;
}

}  // namespace nocrit
