#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nocrit/extract/graph.hpp"
#include "nocrit/extract/patch.hpp"
#include "nocrit/smoothing/corpus.hpp"
#include "nocrit/smoothing/negative.hpp"
#include "nocrit/smoothing/pipeline.hpp"

namespace nocrit::suites {

struct SuiteOptions {
  std::size_t dim = 64;
  std::uint64_t seed = 7;
  double scale = 1.0;  // multiplies every sample count
  double tol_fp = 1e-12;
  double tol_rank = 1e-6;
  std::size_t corpus = 1000;  // end-to-end corpus size
  double eps_base = 0.1;
  std::size_t extraction_size = 0;

  BlockDecomposition layout() const { return BlockDecomposition::standard(dim, extraction_size); }
  ProductSplit split() const { return ProductSplit(dim, layout().block("extraction").indices); }

  std::size_t count(std::size_t full) const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(full) * scale)));
  }
};

struct ClauseCount {
  std::string clause;
  std::size_t checks = 0;
  std::size_t failures = 0;
};

struct SuiteResult {
  std::string id;
  std::string name;
  bool pass = true;
  std::string clause;  // first violated clause, empty on pass
  std::string detail;
  double seconds = 0.0;
  std::vector<ClauseCount> clauses;  // in first-seen order
};

// rows for the plot-ready tables
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

namespace detail {

// collects named checks; the first failing one names the clause
class Tally {
 public:
  void check(bool ok, const std::string& clause) {
    auto it = std::find_if(counts_.begin(), counts_.end(), [&](const ClauseCount& c) { return c.clause == clause; });
    if (it == counts_.end()) it = counts_.insert(counts_.end(), {clause, 0, 0});
    ++it->checks;
    if (ok) return;
    ++it->failures;
    if (pass_) {
      pass_ = false;
      clause_ = clause;
    }
  }
  template <class T>
  void note(const std::string& key, const T& v) {
    if (!notes_.str().empty()) notes_ << ", ";
    notes_ << key << "=" << v;
  }
  SuiteResult finish(std::string id, std::string name, double seconds) const {
    return {std::move(id), std::move(name), pass_, clause_, notes_.str(), seconds, counts_};
  }

 private:
  std::vector<ClauseCount> counts_;
  bool pass_ = true;
  std::string clause_;
  std::ostringstream notes_;
};

inline double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class Body>
SuiteResult run(const std::string& id, const std::string& name, Body body) {
  const auto t0 = std::chrono::steady_clock::now();
  Tally t;
  try {
    body(t);
  } catch (const Error& e) {
    t.check(false, e.clause());
    t.note("error", e.what());
  } catch (const std::exception& e) {
    t.check(false, "unexpected");
    t.note("error", e.what());
  }
  return t.finish(id, name, since(t0));
}

}  // namespace detail

inline SuiteResult deleting_curve(const SuiteOptions& o) {
  return detail::run("AC1", "deleting-curve inequality", [&](detail::Tally& t) {
    const auto split = o.split();
    GaugeKit kit(split);
    const auto& gamma = kit.gamma;
    const double lo = std::max(1e-4, gamma.t_min());
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> u(lo, 2.0), lu(std::log(lo), std::log(2.0));
    double worst = -1e300;
    for (std::size_t k = 0; k < o.count(10000); ++k) {
      double a = k % 2 ? u(rng) : std::exp(lu(rng)), b = k % 3 ? u(rng) : std::exp(lu(rng));
      if (a > b) std::swap(a, b);
      const double lhs = kit.omega(gamma(a) - gamma(b));
      worst = std::max(worst, lhs - 0.5 * (b - a));
      t.check(lhs <= 0.5 * (b - a) + 1e-12, "deleting-curve:semi-lipschitz");
    }
    for (double s : {1.0, 1.0 + 1e-12, 1.5, 2.0, 10.0}) t.check(gamma(s).empty(), "deleting-curve:vanishes-past-1");
    t.note("alpha_lo", lo);
    t.note("worst_excess", worst);
  });
}

inline SuiteResult smooth_square(const SuiteOptions& o) {
  return detail::run("AC2", "smooth-square clauses", [&](detail::Tally& t) {
    const auto& sq = SmoothSquare::instance();
    std::mt19937_64 rng(o.seed + 1);
    std::uniform_real_distribution<double> u(-3, 3), lam(0, 5), tt(0, 3);
    double worst_grad = 0.0;
    for (std::size_t i = 0; i < o.count(10000); ++i) {
      const double x = u(rng), y = u(rng);
      const double m = sq.mu(x, y);
      const double ax = std::abs(x), ay = std::abs(y), mx = std::max(ax, ay);
      t.check(m <= ax + ay + 1e-10 && ax + ay <= 2 * m + 1e-10, "smooth-square:l1-comparison");
      t.check(mx <= m + 1e-10 && m <= 2 * mx + 1e-10, "smooth-square:sup-comparison");
      if (ay <= ax / 2) t.check(m == ax, "smooth-square:flat-x");
      if (ax <= ay / 2) t.check(m == ay, "smooth-square:flat-y");
      const double l = lam(rng);
      t.check(std::abs(sq.mu(l * x, l * y) - l * m) <= 1e-10 * (1 + l), "smooth-square:homogeneity");
      const double t1 = tt(rng), t2 = tt(rng);
      t.check(sq.mu(x, std::min(t1, t2) * y) <= sq.mu(x, std::max(t1, t2) * y) + 1e-10, "smooth-square:monotone");
      if (m == 0.0) continue;
      const auto [gx, gy] = sq.grad(x, y);
      const double h = 1e-7;
      const double ex = std::abs(gx - (sq.mu(x + h, y) - sq.mu(x - h, y)) / (2 * h));
      const double ey = std::abs(gy - (sq.mu(x, y + h) - sq.mu(x, y - h)) / (2 * h));
      worst_grad = std::max({worst_grad, ex, ey});
      t.check(ex <= 1e-6 && ey <= 1e-6, "smooth-square:gradient");
    }
    t.note("worst_gradient_gap", worst_grad);
  });
}

inline SuiteResult fixed_point(const SuiteOptions& o) {
  return detail::run("AC3", "fixed point", [&](detail::Tally& t) {
    const auto split = o.split();
    auto del = ExtractionScheme::point_deletion(split);
    const auto& kit = del.kit();
    const double limit = 1.0 / (4.0 * std::sqrt(15.0));
    const double f0 = kit.omega(kit.gamma(kit.gamma.t_min()));
    t.check(std::abs(f0 - limit) <= 1e-10, "fixed-point:small-alpha-limit");
    t.note("F(0+)", f0);

    // the hierarchical scan: 10^3 cells, then 10^3 points inside the sign-change cell
    auto scan = [](const std::function<double(double)>& G, double lo, double hi) {
      const int n = 1000;
      double a0 = lo, g0 = G(lo);
      for (int level = 0; level < 2; ++level) {
        const double w = (hi - lo) / n;
        for (int i = 1; i <= n; ++i) {
          const double a = lo + w * i, g = G(a);
          if (g0 <= 0 && g > 0) {
            if (level == 1) return a0 - g0 * (a - a0) / (g - g0);
            lo = a0;
            hi = a;
            break;
          }
          a0 = a;
          g0 = g;
        }
        a0 = lo;
        g0 = G(lo);
      }
      return std::nan("");
    };

    std::mt19937_64 rng(o.seed + 2);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> up(0.0, 0.6), us(0.0, 1.0);
    double worst_res = 0.0, worst_gap = 0.0;
    std::size_t solved = 0;
    const auto& ext = split.second();
    while (solved < o.count(1000)) {
      const double psi = solved % 4 == 0 ? 0.0 : up(rng);
      std::vector<Entry> e;
      for (std::size_t k = 0; k < 4; ++k) e.push_back({ext[(solved + k) % std::min<std::size_t>(ext.size(), 8)], g(rng)});
      SparseVec x2(o.dim, e);
      x2 = (us(rng) / std::max(1e-12, kit.omega(x2))) * x2;
      if (kit.rho(psi, x2) >= 1.0) continue;
      FixedPointProblem p;
      p.F = [&](double a) { return kit.rho(psi, x2 - kit.gamma(a)); };
      p.alpha_min = kit.gamma.t_min() * (1.0 - 1e-12);
      p.tol = o.tol_fp;
      const auto r = solve_fixed_point(p);
      worst_res = std::max(worst_res, r.residual);
      t.check(r.residual <= 1e-10, "fixed-point:residual");
      const double oracle = scan([&](double a) { return a - p.F(a); }, kit.gamma.t_min() * (1 + 1e-9), 1.0);
      worst_gap = std::max(worst_gap, std::abs(oracle - r.alpha));
      t.check(std::abs(oracle - r.alpha) <= 1e-8, "fixed-point:grid-oracle");
      ++solved;
    }
    t.note("problems", solved);
    t.note("worst_residual", worst_res);
    t.note("worst_oracle_gap", worst_gap);
  });
}

inline SuiteResult scheme_bijectivity(const SuiteOptions& o) {
  return detail::run("AC4", "scheme bijectivity", [&](detail::Tally& t) {
    const auto split = o.split();
    const auto data = o.layout().block("data").indices;
    ExtractionScheme s(split, [&](const SparseVec& x1) { return 1.5 * std::abs(x1.get(data[0]) - 0.2); }, 0.0,
                       o.tol_fp);
    std::mt19937_64 rng(o.seed + 3);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(-0.5, 0.5), scale(0.0, 3.0);
    double worst = 0.0;
    std::size_t moved = 0, still = 0;
    for (std::size_t k = 0; k < o.count(1000); ++k) {
      SparseVec x1(o.dim, {{data[0], u(rng)}, {data[1], g(rng)}, {data[3], g(rng)}});
      std::vector<Entry> e;
      for (std::size_t j = 0; j < 4; ++j) e.push_back({split.second()[(k + j) % 6], g(rng)});
      ProductPoint p{x1, scale(rng) * SparseVec(o.dim, e)};
      if (s.rho(p) <= 0) continue;
      const auto fw = s.forward_step(p);
      t.check(fw.point.x1 == p.x1, "scheme:first-coordinate");
      if (fw.rho >= 1.0) {
        t.check(fw.point == p && s.inverse(p) == p, "scheme:identity-off-support");
        ++still;
      } else {
        ++moved;
      }
      const double e1 = distance(s.inverse(fw.point), p);
      const ProductPoint inv = s.inverse(p);
      t.check(inv.x1 == p.x1, "scheme:first-coordinate");
      const double e2 = distance(s.forward(inv), p);
      worst = std::max({worst, e1, e2});
      t.check(e1 <= 1e-8 && e2 <= 1e-8, "scheme:roundtrip");
    }
    t.note("moved", moved);
    t.note("identity", still);
    t.note("worst_roundtrip", worst);
  });
}

inline SuiteResult flattening(const SuiteOptions& o) {
  return detail::run("AC5", "flattening", [&](detail::Tally& t) {
    using W = FlattenMaps::Which;
    const auto& dec = o.layout();
    const auto& d = dec.block("data").indices;
    const auto& x = dec.block("extraction").indices;
    auto value = [&](const SparseVec& x1) {
      return SparseVec(o.dim, {{x[0], std::abs(x1.get(d[0]))}, {x[1], std::sin(x1.get(d[1]))}, {x[2], 0.3 * x1.get(d[2])}});
    };
    std::mt19937_64 rng(o.seed + 4);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::vector<GraphSample> samples;
    for (int i = 0; i < 12; ++i) {
      const bool in = 3 * i < 24;
      const double sc = in ? 0.4 : 1.0, off = in ? 0.0 : (i % 2 ? 1.6 : -1.6);
      SparseVec x1(o.dim, {{d[0], off + sc * u(rng)}, {d[1], sc * u(rng)}, {d[2], sc * u(rng)}});
      samples.push_back({x1, value(x1)});
    }
    const Window U = Window::cylinder(SparseVec(o.dim), 1.0);
    FlattenConfig cfg;
    cfg.eps = 0.25;
    FlattenMaps m(samples, U, cfg);
    for (const auto& s : samples)
      t.check(l2_norm(m.forward({s.x1, s.value}, W::H).x2) <= 1e-8, "flatten:graph-to-zero-section");

    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> ux(-1.6, 1.6), ur(-0.2, 1.2);
    double worst_ratio = 0.0, worst_gap = 0.0, worst_dF = 0.0, worst_dphi = 0.0, worst_rt = 0.0;
    std::size_t outside = 0;
    for (std::size_t k = 0; k < o.count(1000); ++k) {
      SparseVec x1(o.dim, {{d[0], ux(rng)}, {d[1], ux(rng)}, {d[2], ux(rng)}});
      SparseVec x2(o.dim, {{x[0], g(rng)}, {x[1], 0.2 * g(rng)}, {x[3], 0.1 * g(rng)}});
      if (k % 2 == 0) {
        x1 = axpy(0.02 * g(rng), SparseVec::unit(d[2], 1.0, o.dim), samples[k % 12].x1);
        x2 = SparseVec::unit(x[1], std::pow(10.0, -1.0 - static_cast<double>(k % 5)) * g(rng), o.dim);
      }
      const ProductPoint p{x1, x2};
      const ProductPoint hp = m.forward(p, W::H);
      t.check(hp.x1 == p.x1, "flatten:fiber-preserving");
      const double rt = distance(m.inverse(hp, W::H), p);
      worst_rt = std::max(worst_rt, rt);
      t.check(rt <= 1e-8, "flatten:roundtrip");
      if (!U.contains(p)) {
        ++outside;
        t.check(m.forward(p, W::H) == m.forward(p, W::PhiMap), "flatten:bit-identical-outside-U");
      }
      PicardStats s1, s2;
      const ProductPoint a = m.inverse(p, W::H, &s1), b = m.inverse(p, W::PhiMap, &s2);
      worst_gap = std::max(worst_gap, distance(a, b));
      t.check(distance(a, b) <= cfg.eps, "flatten:inverse-closeness");
      worst_ratio = std::max({worst_ratio, s1.max_ratio, s2.max_ratio});

      // dF/dr along the staircase, dphi/dx2 along the gradient direction
      const double r = ur(rng), h = 1e-7;
      const double dF = distance(m.staircase()(r + h, x1), m.staircase()(r - h, x1)) / (2 * h);
      worst_dF = std::max(worst_dF, dF);
      t.check(dF <= 0.5 + 1e-6, "flatten:staircase-slope");
      const SparseVec gr = m.twin().phi_grad2(p);
      const double n = l2_norm(gr);
      if (n > 0) {
        const double hh = 1e-9 * std::max(1e-3, l2_norm(x2));
        const SparseVec dir = (1.0 / n) * gr;
        const double fd = (m.twin().phi({x1, axpy(hh, dir, x2)}) - m.twin().phi({x1, axpy(-hh, dir, x2)})) / (2 * hh);
        worst_dphi = std::max(worst_dphi, std::abs(fd));
        t.check(std::abs(fd) <= 0.5 + 1e-5, "flatten:twin-slope");
      }
    }
    t.check(worst_ratio <= 0.5, "flatten:picard-ratio");
    t.note("outside_U", outside);
    t.note("worst_roundtrip", worst_rt);
    t.note("worst_inverse_gap", worst_gap);
    t.note("worst_picard_ratio", worst_ratio);
    t.note("worst_dF_dr", worst_dF);
    t.note("worst_dphi", worst_dphi);
  });
}

inline SuiteResult graph_extraction(const SuiteOptions& o, Table* table = nullptr) {
  return detail::run("AC6", "graph extraction displacement", [&](detail::Tally& t) {
    const auto& dec = o.layout();
    const auto& d = dec.block("data").indices;
    const auto& x = dec.block("extraction").indices;
    const auto split = o.split();
    auto f = [&](const SparseVec& x1) {
      return SparseVec(o.dim, {{x[0], 0.2 * std::abs(x1.get(d[0]))}, {x[1], 0.1 * std::sin(3 * x1.get(d[1]))}, {x[2], 0.05}});
    };
    std::mt19937_64 brng(o.seed + 5);
    std::uniform_real_distribution<double> bu(-1.0, 1.0);
    std::vector<SparseVec> base;
    for (int i = 0; i < 8; ++i) {
      const double off = i < 6 ? 0.0 : (i % 2 ? 2.0 : -2.0);
      base.push_back(SparseVec(o.dim, {{d[0], off + 0.5 * bu(brng)}, {d[1], 0.5 * bu(brng)}, {d[2], 0.5 * bu(brng)}}));
    }
    if (table) table->header = {"delta", "sample_id", "forward_displacement", "inverse_displacement", "roundtrip", "identity"};
    for (double delta : {0.1, 0.5}) {
      GraphExtraction G(GraphSpec::from_function(split, base, f, Window::cylinder(SparseVec(o.dim), 1.0), delta));
      const auto& spec = G.spec();
      for (const auto& s : spec.samples) {
        const ProductPoint p{s.x1, s.value};
        if (spec.U.contains(p)) {
          const ProductPoint y = G.forward(p);
          t.check(distance(y, p) <= delta, "graph:displacement");
          t.check(distance(G.inverse(y), p) <= 1e-7, "graph:roundtrip");
        }
      }
      std::mt19937_64 rng(o.seed + 6);
      std::uniform_real_distribution<double> u(-1.0, 1.0), sc(0.0, 1.0);
      std::normal_distribution<double> g;
      double worst = 0.0, worst_rt = 0.0;
      std::size_t moved = 0, identity = 0;
      for (std::size_t k = 0; k < o.count(1000); ++k) {
        const auto& b = spec.samples[k % spec.samples.size()];
        SparseVec x1 = k % 4 == 0 ? SparseVec(o.dim, {{d[0], 1.5 * u(rng)}, {d[1], u(rng)}})
                                  : axpy(0.05 * u(rng), SparseVec::unit(d[2], 1.0, o.dim), b.x1);
        std::vector<Entry> e;
        for (std::size_t j = 0; j < 1 + k % 5; ++j) e.push_back({x[j], g(rng)});
        SparseVec fib(o.dim, e);
        fib = (sc(rng) * sc(rng) * delta / l2_norm(fib)) * fib;
        const ProductPoint p{x1, f(x1) + fib};
        const ProductPoint y = G.forward(p), z = G.inverse(p);
        worst = std::max({worst, distance(p, y), distance(p, z)});
        t.check(distance(p, y) <= delta && distance(p, z) <= delta, "graph:displacement");
        const double rt = std::max(distance(G.inverse(y), p), distance(G.forward(z), p));
        worst_rt = std::max(worst_rt, rt);
        t.check(rt <= 1e-7, "graph:roundtrip");
        const ProductPoint hz = G.flatten().forward(p, FlattenMaps::Which::H);
        const bool off_tube = !G.inner().tube().contains(hz) && hz == G.flatten().forward(p, FlattenMaps::Which::PhiMap);
        const bool fixed = off_tube || !spec.U.contains(p);
        if (fixed) {
          ++identity;
          t.check(y == p && z == p, "graph:identity-off-tube");
        }
        if (table)
          table->rows.push_back({delta, static_cast<double>(k), distance(p, y), distance(p, z), rt, fixed ? 1.0 : 0.0});
        moved += !(y == p);
      }
      std::ostringstream key;
      key << "delta" << delta;
      t.note(key.str() + "_worst", worst);
      t.note(key.str() + "_roundtrip", worst_rt);
      t.note(key.str() + "_moved", moved);
      t.note(key.str() + "_identity", identity);
    }
  });
}

inline CoverPatch three_piece_patch(const SuiteOptions& o) {
  const std::size_t dim = o.dim;
  const auto dec = o.layout();
  const auto d = dec.block("data").indices;
  const auto x = dec.block("extraction").indices;
  auto base = [=](double a, double b, double c) { return SparseVec(dim, {{d[0], a}, {d[1], b}, {d[2], c}}); };
  auto cyl = [=](double a, double r) { return Window::cylinder(base(a, 0, 0), r); };
  auto f = [=](const SparseVec& x1) { return SparseVec(dim, {{x[0], 0.002 * x1.get(d[0])}, {x[1], 0.05}}); };
  std::vector<SparseVec> all3{base(0, 0.2, 0), base(0, -0.2, 0.1)};
  std::vector<SparseVec> b01{base(0.7, 0.3, 0), base(0.9, -0.2, 0.1)};
  std::vector<SparseVec> b02{base(-0.8, 0.1, 0.2)};
  std::vector<SparseVec> b0{base(0, 0.8, 0.1), base(1.6, 0, 0)};
  std::vector<SparseVec> b1{base(0.02, 0.2, 0), base(0.7, 0.32, 0), base(0.3, 0.1, 0.3)};
  std::vector<SparseVec> b2{base(0, -0.18, 0.1), base(-0.81, 0.1, 0.21), base(-0.3, 0.2, -0.3)};
  auto cat = [](std::initializer_list<std::vector<SparseVec>> parts) {
    std::vector<SparseVec> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
  };
  CoverPatch cp{o.split(), f, {}, cyl(0, 1.2), 0.4, {}};
  cp.pieces.push_back({cat({all3, b01, b02, b0}), cyl(0, 2.0), cyl(0, 2.2)});
  cp.pieces.push_back({cat({all3, b01, b1}), cyl(0.6, 0.9), cyl(0.6, 1.1)});
  cp.pieces.push_back({cat({all3, b02, b2}), cyl(-0.6, 0.9), cyl(-0.6, 1.1)});
  return cp;
}

inline SuiteResult finite_patching(const SuiteOptions& o) {
  return detail::run("AC7", "finite patching", [&](detail::Tally& t) {
    const auto& dec = o.layout();
    const auto& d = dec.block("data").indices;
    const auto& x = dec.block("extraction").indices;
    PatchedExtraction P(three_piece_patch(o));
    const auto& cp = P.patch();
    const auto& pts = P.graph_points();
    std::size_t violations = 0, carried = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (P.member(k, 0)) continue;
      const ProductPoint y = P.inverse({pts[k].x1, pts[k].value});
      for (std::size_t i = 1; i < cp.pieces.size(); ++i)
        if (P.member(k, i)) {
          ++carried;
          if (!cp.pieces[i].outer.contains(y)) ++violations;
        }
    }
    t.check(violations == 0, "patch:carried-into-V");

    std::mt19937_64 rng(o.seed + 7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> g;
    std::vector<ProductPoint> images;
    double worst = 0.0;
    for (std::size_t k = 0; k < o.count(1000); ++k) {
      ProductPoint p;
      if (k % 3 == 0) {
        p = {SparseVec(o.dim, {{d[0], 2.0 * u(rng)}, {d[1], u(rng)}, {d[2], u(rng)}}),
             SparseVec::unit(x[2 * (k % 4)], 0.3 * g(rng), o.dim)};
      } else {
        const auto& s = pts[k % pts.size()];
        SparseVec x1 = axpy(0.02 * u(rng), SparseVec::unit(d[1], 1.0, o.dim), s.x1);
        const double off = (k % 2 ? 1.0 : -1.0) * 4e-3 * (0.5 + u(rng) * u(rng));
        p = {x1, cp.f(x1) + SparseVec::unit(x[2], off, o.dim)};
      }
      const ProductPoint y = P.inverse(p);
      worst = std::max(worst, distance(p, y));
      t.check(distance(P.forward(y), p) <= 1e-7, "patch:roundtrip");
      images.push_back(y);
    }
    t.check(worst <= P.total_budget(), "patch:displacement-budget");
    double closest = 1e300;
    for (std::size_t a = 0; a < images.size(); ++a)
      for (std::size_t b = a + 1; b < images.size(); ++b) closest = std::min(closest, distance(images[a], images[b]));
    t.check(closest > 1e-9, "patch:injectivity");
    t.note("cover_members", P.patch().pieces.size());
    t.note("extraction_maps", P.pieces().size());
    t.note("carried_points", carried);
    t.note("worst_displacement", worst);
    t.note("budget", P.total_budget());
    t.note("closest_images", closest);
  });
}

inline SuiteResult end_to_end(const SuiteOptions& o, PipelineReport* out = nullptr) {
  return detail::run("AC8", "end-to-end approximation", [&](detail::Tally& t) {
    const auto& dec = o.layout();
    const auto& d = dec.block("data").indices;
    const auto corpus = sample_corpus(dec, o.corpus, o.seed);
    PipelineConfig cfg;
    cfg.tau_rank = o.tol_rank;
    Pipeline P(abs_map({d[0], d[1]}), affine_eps(o.eps_base), corpus, dec, cfg);
    auto rep = P.report();
    std::size_t outside = 0;
    double worst_phi = 0.0;
    for (const auto& s : rep.samples) {
      worst_phi = std::max(worst_phi, s.err_phi / s.eps);
      t.check(s.err_phi <= s.eps / 2, "approximant:half-eps");
      t.check(s.err <= s.eps, "pipeline:eps");
      t.check(s.sigma_min >= o.tol_rank, "pipeline:surjective");
      if (!(s.displacement < s.cover_radius)) ++outside;
    }
    t.check(outside == 0, "pipeline:limited-by-cover");

    // held-out points inside the balls, off the corpus
    std::mt19937_64 rng(o.seed + 8);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_held = 0.0, min_sigma_held = 1e300;
    std::vector<Index> dirs = d;
    for (Index i : dec.block("guard").indices) dirs.push_back(i);
    for (std::size_t k = 0; k < std::min<std::size_t>(corpus.size(), o.count(200)); ++k) {
      const auto& b = P.cover().balls[k % P.cover().size()];
      std::vector<Entry> e;
      for (Index i : dirs) e.push_back({i, g(rng)});
      SparseVec v(o.dim, e);
      const SparseVec y = axpy(0.9 * b.radius * u(rng) / l2_norm(v), v, b.center);
      const auto r = P.evaluate(y, P.cover_radii()[0]);
      worst_held = std::max(worst_held, r.err / r.eps);
      min_sigma_held = std::min(min_sigma_held, r.sigma_min);
      t.check(r.err <= r.eps, "pipeline:eps-held-out");
      t.check(r.sigma_min >= o.tol_rank, "pipeline:surjective-held-out");
    }
    // chain rule against end-to-end differences at a few points
    double worst_chain = 0.0;
    for (std::size_t k = 0; k < corpus.size(); k += std::max<std::size_t>(1, corpus.size() / 10)) {
      const auto cols = P.columns(corpus[k]);
      const Eigen::MatrixXd J = P.jacobian(corpus[k], cols);
      const Eigen::MatrixXd fd = finite_difference_jacobian([&](const SparseVec& y) { return P.g(y); }, corpus[k], cols);
      worst_chain = std::max(worst_chain, (J - fd).cwiseAbs().maxCoeff());
    }
    t.check(worst_chain <= 1e-4, "pipeline:chain-rule");
    t.note("balls", rep.balls);
    t.note("colors", rep.colors);
    t.note("worst_err_over_eps", rep.worst_ratio());
    t.note("worst_phi_err_over_eps", worst_phi);
    t.note("min_sigma", rep.min_sigma());
    t.note("held_out_worst_err_over_eps", worst_held);
    t.note("held_out_min_sigma", min_sigma_held);
    t.note("tube_radius", rep.tube_radius);
    t.note("chain_rule_gap", worst_chain);
    if (out) *out = std::move(rep);
  });
}

inline SuiteResult partition_suite(const SuiteOptions& o) {
  return detail::run("AC9", "partition of unity", [&](detail::Tally& t) {
    const auto& dec = o.layout();
    const auto& d = dec.block("data").indices;
    const auto& guard = dec.block("guard").indices;
    std::mt19937_64 rng(o.seed + 9);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const SparseVec c0(o.dim, {{d[0], 0.3}, {d[1], -0.2}, {d[2], 0.1}});
    std::vector<SparseVec> corpus;
    for (int k = 0; k < 150; ++k) {
      SparseVec v(o.dim, {{d[0], g(rng)}, {d[1], g(rng)}, {d[2], g(rng)}});
      corpus.push_back(c0 + (0.02 * std::cbrt(u(rng)) / l2_norm(v)) * v);
    }
    const BallCover cover = build_ball_cover(abs_map({d[0], d[1]}), affine_eps(o.eps_base), corpus);
    const PartitionOfUnity pu(cover);
    double rmin = 1.0;
    for (const auto& b : cover.balls) rmin = std::min(rmin, b.radius);
    double worst_sum = 0.0, worst_grad = 0.0, worst_fd = 0.0;
    std::size_t overlapped = 0, vanishing = 0;
    const std::size_t n = o.count(1000);
    for (std::size_t k = 0; k < n; ++k) {
      SparseVec v(o.dim, {{d[0], g(rng)}, {d[1], g(rng)}, {d[2], g(rng)}, {guard[0], 0.3 * g(rng)}});
      const SparseVec x = axpy(0.4 * rmin * u(rng) / l2_norm(v), v, corpus[k % corpus.size()]);
      const auto p = pu.eval(x);
      double s = 0.0;
      SparseVec gs(o.dim);
      for (std::size_t i = 0; i < p.active.size(); ++i) {
        s += p.weights[i];
        gs = gs + p.gradients[i];
        t.check(p.weights[i] >= 0.0, "partition:nonnegative");
      }
      worst_sum = std::max(worst_sum, std::abs(s - 1.0));
      worst_grad = std::max(worst_grad, l2_norm(gs));
      t.check(std::abs(s - 1.0) <= 1e-12, "partition:sum");
      t.check(l2_norm(gs) <= 1e-6, "partition:gradient-sum");
      overlapped += p.active.size() > 1;
      for (std::size_t b = 0; b < cover.size(); ++b)
        if (pu.bump(b, x) == 0.0) {
          ++vanishing;
          t.check(pu.bump_grad(b, x).empty(), "partition:bump-vanishing");
        }
      if (k < n / 10 + 1) {
        // total weight by central differences
        for (Index j : {d[0], d[1], guard[0]}) {
          const double h = 1e-6;
          auto total = [&](const SparseVec& y) {
            const auto q = pu.eval(y, false);
            double a = 0.0;
            for (double w : q.weights) a += w;
            return a;
          };
          const double fd = (total(x + SparseVec::unit(j, h, o.dim)) - total(x - SparseVec::unit(j, h, o.dim))) / (2 * h);
          worst_fd = std::max(worst_fd, std::abs(fd));
          t.check(std::abs(fd) <= 1e-6, "partition:gradient-sum-fd");
        }
      }
    }
    t.check(overlapped > 0, "partition:overlap-exercised");
    t.note("balls", cover.size());
    t.note("points_with_overlap", overlapped);
    t.note("vanishing_bumps_checked", vanishing);
    t.note("worst_sum_gap", worst_sum);
    t.note("worst_gradient_sum", worst_grad);
    t.note("worst_fd_gradient_sum", worst_fd);
  });
}

inline SuiteResult negative(const SuiteOptions& o, LineScan* out = nullptr) {
  return detail::run("AC10", "negative demo", [&](detail::Tally& t) {
    const auto s = negative_demo(o.layout(), 1.0 / 3.0, 1e-3, 1e-2, o.tol_rank);
    t.check(s.theta_left >= 2.0 / 3.0 && s.theta_right >= 2.0 / 3.0 && s.theta_mid <= 1.0 / 3.0,
            "negative-demo:endpoint-values");
    bool interior = false;
    for (const auto& [a, b] : s.sign_changes) interior = interior || (a > -1.0 && b < 1.0);
    t.check(interior, "negative-demo:sign-change");
    t.check(s.certificates_pass, "negative-demo:surjective");
    double ms = 1e300;
    for (double v : s.sigma) ms = std::min(ms, v);
    t.note("theta(-1)", s.theta_left);
    t.note("theta(0)", s.theta_mid);
    t.note("theta(1)", s.theta_right);
    t.note("sign_changes", s.sign_changes.size());
    if (!s.sign_changes.empty()) t.note("first_bracket", std::to_string(s.sign_changes[0].first) + ".." + std::to_string(s.sign_changes[0].second));
    t.note("min_sigma", ms);
    if (out) *out = s;
  });
}

inline std::vector<SuiteResult> all(const SuiteOptions& o) {
  return {deleting_curve(o), smooth_square(o),    fixed_point(o),        scheme_bijectivity(o), flattening(o),
          graph_extraction(o), finite_patching(o), end_to_end(o),         partition_suite(o),    negative(o)};
}

}  // namespace nocrit::suites
