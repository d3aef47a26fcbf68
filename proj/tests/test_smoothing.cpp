#include <catch_amalgamated.hpp>

#include <random>

#include "nocrit/smoothing/corpus.hpp"
#include "nocrit/smoothing/pipeline.hpp"
#include "nocrit/smoothing/section.hpp"

using namespace nocrit;
using Catch::Approx;

namespace {

const BlockDecomposition& layout() {
  static const BlockDecomposition d = BlockDecomposition::standard(64);
  return d;
}

// a tight cluster in span{e1, e2, e3}, so that many balls overlap
std::vector<SparseVec> cluster(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SparseVec> out;
  for (std::size_t k = 0; k < n; ++k) {
    SparseVec d(64, {{1, g(rng)}, {2, g(rng)}, {3, g(rng)}});
    const double r = 0.02 * std::cbrt(u(rng));
    out.push_back(SparseVec(64, {{1, 0.3}, {2, -0.2}, {3, 0.1}}) + (r / l2_norm(d)) * d);
  }
  return out;
}

struct ClusterFixture {
  std::vector<SparseVec> corpus = cluster(150, 4);
  MapField f = abs_map({1, 2});
  EpsField eps = affine_eps(0.1);
  BallCover cover = build_ball_cover(f, eps, corpus);
  Approximant phi{f, cover, block_operators(2, cover, layout(), BlockMode::Colored), layout()};

  double min_radius() const {
    double r = 1.0;
    for (const auto& b : cover.balls) r = std::min(r, b.radius);
    return r;
  }

  // near a corpus point, with small guard-block components
  std::vector<SparseVec> eval_points(std::size_t n, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<SparseVec> out;
    for (std::size_t k = 0; k < n; ++k) {
      SparseVec d(64, {{1, g(rng)}, {2, g(rng)}, {3, g(rng)}, {4, 0.3 * g(rng)}, {8, 0.3 * g(rng)}});
      out.push_back(axpy(0.4 * min_radius() * u(rng) / l2_norm(d), d, corpus[k % corpus.size()]));
    }
    return out;
  }
};

const ClusterFixture& fixture() {
  static const ClusterFixture c;
  return c;
}

}  // namespace

TEST_CASE("ball cover") {
  auto small = sample_corpus(layout(), 50, 3);
  for (auto& x : small) x = 0.2 * x;
  MapField constant = [](const SparseVec&) { return Target::Constant(2, 0.7); };
  auto one = build_ball_cover(constant, [](const SparseVec&) { return 0.1; }, small);
  REQUIRE(one.size() == 1);

  MapField norm = [](const SparseVec& x) { return Target::Constant(1, l2_norm(x)); };
  auto corpus = sample_corpus(layout(), 200, 5);
  auto c = build_ball_cover(norm, [](const SparseVec&) { return 1.0; }, corpus);
  for (const auto& b : c.balls) REQUIRE(b.radius <= 1.0 / 16.0 + 1e-12);

  const auto& F = fixture();
  auto big = sample_corpus(layout(), 1000, 9);
  auto cover = build_ball_cover(F.f, F.eps, big);
  for (const auto& x : big) REQUIRE(!cover.touching(x).empty());
  for (const auto& b : cover.balls) {
    REQUIRE(b.osc_f <= b.eps_center / 16.0);
    REQUIRE(b.osc_eps <= b.eps_center / 16.0);
    // eps comparable on the ball
    for (const auto& x : big)
      if (distance(x, b.center) < b.radius) {
        REQUIRE(F.eps(x) >= 15.0 / 16.0 * b.eps_center);
        REQUIRE(F.eps(x) <= 17.0 / 16.0 * b.eps_center);
      }
  }

  // nothing certifies a jump
  MapField jump = [](const SparseVec& x) { return Target::Constant(1, x.get(1) >= 0.0 ? 1.0 : 0.0); };
  CoverConfig along1;
  along1.probe_axes = {1};
  REQUIRE_THROWS_AS(build_ball_cover(jump, [](const SparseVec&) { return 0.1; }, {SparseVec(64)}, along1), CoverError);

  // overlapping centers of the cluster: dependent ones are nudged
  std::size_t nudged = 0;
  for (const auto& b : F.cover.balls) nudged += b.nudged;
  REQUIRE(nudged > 0);
}

TEST_CASE("partition of unity") {
  const auto& F = fixture();
  const auto& pu = F.phi.partition();
  REQUIRE(F.cover.size() > 5);

  // at the first center only the first ball and possibly later ones are active
  const auto lone = sample_corpus(layout(), 20, 8);
  auto lc = build_ball_cover(F.f, F.eps, lone);
  PartitionOfUnity lp(lc);
  auto v = lp.eval(lc.balls[3].center);
  REQUIRE(v.active == std::vector<std::size_t>{3});
  REQUIRE(v.weights[0] == 1.0);

  int overlapped = 0;
  const auto pts = F.eval_points(1000, 21);
  for (const auto& x : pts) {
    auto p = pu.eval(x);
    double s = 0.0;
    SparseVec gsum(64);
    for (std::size_t i = 0; i < p.active.size(); ++i) {
      REQUIRE(p.weights[i] >= 0.0);
      s += p.weights[i];
      gsum = gsum + p.gradients[i];
      // sigma bookkeeping reproduces the gradient
      SparseVec viaSigma(64);
      for (std::size_t j = 0; j < p.active.size(); ++j)
        viaSigma = axpy(p.sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), p.raw_grads[j], viaSigma);
      REQUIRE(distance(viaSigma, p.gradients[i]) <= 1e-9 * (1.0 + l2_norm(p.gradients[i])));
    }
    REQUIRE(s == Approx(1.0).margin(1e-12));
    REQUIRE(l2_norm(gsum) <= 1e-6);
    overlapped += p.active.size() > 1;

    // bumps that vanish have exactly zero gradient
    for (std::size_t k = 0; k < F.cover.size(); ++k)
      if (pu.bump(k, x) == 0.0) REQUIRE(pu.bump_grad(k, x).empty());
  }
  REQUIRE(overlapped > 100);

  // gradients against central differences
  for (std::size_t t = 0; t < 100; ++t) {
    const auto& x = pts[t];
    auto p = pu.eval(x);
    for (std::size_t i = 0; i < p.active.size(); ++i) {
      const std::size_t k = p.active[i];
      for (Index j : {1u, 2u, 3u, 4u}) {
        const double h = 1e-7;
        auto wt = [&](const SparseVec& y) {
          auto q = pu.eval(y, false);
          for (std::size_t a = 0; a < q.active.size(); ++a)
            if (q.active[a] == k) return q.weights[a];
          return 0.0;
        };
        const double fd = (wt(x + SparseVec::unit(j, h)) - wt(x - SparseVec::unit(j, h))) / (2 * h);
        REQUIRE(p.gradients[i].get(j) == Approx(fd).margin(1e-4 * (1.0 + std::abs(fd))));
      }
    }
  }

  REQUIRE_THROWS_AS(pu.eval(SparseVec::unit(5, 3.0)), CoverageError);
}

TEST_CASE("block operators") {
  auto three = sample_corpus(layout(), 3, 2);
  MapField f1 = [](const SparseVec& x) { return Target::Constant(1, std::abs(x.get(1))); };
  BallCover c;
  for (const auto& x : three) {
    Ball b;
    b.center = x;
    b.radius = 0.01;
    b.eps_center = 0.3;
    b.set_norm_hint();
    c.balls.push_back(b);
  }
  auto ops = block_operators(1, c, layout());
  REQUIRE(ops.blocks.size() == 3);
  std::set<Index> seen;
  for (const auto& I : ops.blocks) {
    REQUIRE(I.size() == 1);
    REQUIRE(I[0] % 4 == 0);
    seen.insert(I[0]);
  }
  REQUIRE(seen.size() == 3);
  for (std::size_t n = 0; n < 3; ++n) {
    REQUIRE(ops.norm(n) == 0.3 / 4.0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ops.selection(n));
    REQUIRE(svd.singularValues().minCoeff() >= 1.0 - 1e-12);
    // |T_n v| = eps/4 |v| on the block, 0 off it
    REQUIRE(ops.apply(n, SparseVec::unit(ops.blocks[n][0], 2.0))(0) == 2.0 * 0.3 / 4.0);
    REQUIRE(ops.apply(n, SparseVec::unit(1, 2.0))(0) == 0.0);
  }

  auto m2 = block_operators(2, c, layout());
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b)
      for (Index i : m2.blocks[a]) REQUIRE(std::find(m2.blocks[b].begin(), m2.blocks[b].end(), i) == m2.blocks[b].end());

  for (int k = 0; k < 6; ++k) c.balls.push_back(c.balls[0]);
  REQUIRE_THROWS_AS(block_operators(2, c, layout()), CapacityError);
  // coloring only separates balls that meet
  const auto& F = fixture();
  auto col = block_operators(2, F.cover, layout(), BlockMode::Colored);
  for (std::size_t a = 0; a < F.cover.size(); ++a)
    for (std::size_t b = a + 1; b < F.cover.size(); ++b)
      if (distance(F.cover.balls[a].center, F.cover.balls[b].center) < F.cover.balls[a].radius + F.cover.balls[b].radius)
        REQUIRE(col.blocks[a] != col.blocks[b]);
}

TEST_CASE("approximant") {
  const auto& F = fixture();
  const auto& phi = F.phi;

  // ball 0 alone at a point of its core far from the others
  auto lone = sample_corpus(layout(), 20, 8);
  auto lc = build_ball_cover(F.f, F.eps, lone);
  Approximant lp(F.f, lc, block_operators(2, lc, layout(), BlockMode::Colored), layout());
  SparseVec x = axpy(0.1 * lc.balls[2].radius, SparseVec::unit(lp.operators().blocks[2][1]), lc.balls[2].center);
  auto J = lp.eval(x);
  const Target expect = F.f(lc.balls[2].center) + lp.operators().apply(2, x - lc.balls[2].center);
  REQUIRE((J.value - expect).norm() == 0.0);
  REQUIRE(J.coords == lp.operators().blocks[2]);
  REQUIRE(J.jacobian.isApprox(lc.balls[2].eps_center / 4.0 * Eigen::MatrixXd::Identity(2, 2)));

  auto big = sample_corpus(layout(), 300, 13);
  auto bc = build_ball_cover(F.f, F.eps, big);
  Approximant bp(F.f, bc, block_operators(2, bc, layout(), BlockMode::Colored), layout());
  for (const auto& y : big) REQUIRE((bp.value(y) - F.f(y)).norm() <= F.eps(y) / 2.0);

  const auto pts = F.eval_points(100, 5);
  for (const auto& y : pts) {
    REQUIRE((phi.value(y) - F.f(y)).norm() <= F.eps(y) / 2.0);
    auto a = phi.eval(y);
    Eigen::MatrixXd fd = finite_difference_jacobian([&](const SparseVec& z) { return phi.value(z); }, y, a.coords, 1e-7);
    REQUIRE((a.jacobian - fd).cwiseAbs().maxCoeff() <= 1e-5);
    // derivative() agrees with the matrix
    for (std::size_t c = 0; c < a.coords.size(); ++c)
      REQUIRE((phi.derivative(y, SparseVec::unit(a.coords[c])) - a.jacobian.col(static_cast<Eigen::Index>(c))).norm() <=
              1e-12);
  }
}

TEST_CASE("critical certificate") {
  Eigen::MatrixXd J(2, 3);
  J << 1, 0, 0, 0, 1e-5, 0;
  REQUIRE(critical_certificate(J, false).verdict == "surjective");
  J(1, 1) = 5e-7;
  REQUIRE(critical_certificate(J, false).verdict == "inconclusive");
  J(1, 1) = 0.0;
  REQUIRE(critical_certificate(J, false).verdict == "critical");
  REQUIRE(critical_certificate(Eigen::MatrixXd::Ones(2, 1), false).sigma_min == 0.0);

  const auto& F = fixture();
  // the cluster lives in span{e1, e2, e3} plus nudges: guard false there
  const SparseVec& y0 = F.corpus[0];
  REQUIRE(!F.phi.guard(y0));
  // a coordinate past every center's span is guarded, and the verdict is surjective
  SparseVec y1 = y0 + SparseVec::unit(63, 1e-4);
  REQUIRE(F.phi.guard(y1));
  REQUIRE(critical_certificate(F.phi, y1).verdict == "surjective");
}

TEST_CASE("graph section") {
  NormFn l2 = [](const SparseVec& v) { return l2_norm(v); };
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int k = 0; k < 20; ++k) {
    SparseVec w(64, {{1, g(rng)}, {2, g(rng)}});
    REQUIRE(graph_section(w, {3, 4}, l2).empty());
  }

  // weighted l4 of a mixed vector on coordinates 1..4
  Eigen::Matrix4d M;
  M << 1.0, 0.3, 0.2, 0.0, 0.1, 1.0, 0.4, 0.2, 0.3, 0.0, 1.0, 0.5, 0.2, 0.1, 0.3, 1.0;
  const Eigen::Vector4d a(1.0, 2.0, 0.5, 1.5);
  NormFn l4 = [&](const SparseVec& v) {
    Eigen::Vector4d x(v.get(1), v.get(2), v.get(3), v.get(4));
    const Eigen::Vector4d y = M * x;
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += a(i) * std::pow(y(i), 4);
    return std::pow(s, 0.25);
  };
  for (int k = 0; k < 5; ++k) {
    SparseVec w(64, {{1, g(rng)}, {2, g(rng)}});
    SparseVec v = graph_section(w, {3, 4}, l4);
    // grid scan on [-3, 3]^2, then two finer local grids
    double best = 1e300, b3 = 0, b4 = 0;
    auto scan = [&](double c3, double c4, double half, int n) {
      for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j) {
          const double s = c3 + half * i / n, t = c4 + half * j / n;
          const double val = l4(w + SparseVec(64, {{3, s}, {4, t}}));
          if (val < best) best = val, b3 = s, b4 = t;
        }
    };
    scan(0.0, 0.0, 3.0, 300);
    scan(b3, b4, 0.01, 100);
    scan(b3, b4, 1e-4, 100);
    REQUIRE(v.get(3) == Approx(b3).margin(1e-4));
    REQUIRE(v.get(4) == Approx(b4).margin(1e-4));

    // sampled modulus of continuity
    SparseVec w2 = w + SparseVec(64, {{1, 1e-3 / std::sqrt(2.0)}, {2, -1e-3 / std::sqrt(2.0)}});
    REQUIRE(distance(graph_section(w2, {3, 4}, l4), v) <= 10.0 * std::sqrt(1e-3));
  }
}

TEST_CASE("suppression check") {
  NormFn l2 = [](const SparseVec& v) { return l2_norm(v); };
  NormGrad l2g = [](const SparseVec& v) { return (1.0 / l2_norm(v)) * v; };
  const SparseVec w(64, {{1, 1.0}, {2, 1.0}});
  REQUIRE(suppression_check(l2, l2g, 1, w));
  REQUIRE(l2g(w).get(1) == Approx(1.0 / std::sqrt(2.0)));
  REQUIRE(!suppression_check(l2, l2g, 3, w));
  REQUIRE_THROWS_AS(suppression_check(l2, l2g, 1, SparseVec(64)), DomainError);

  // weighted l4, coordinatewise so that deleting a coordinate never increases it
  NormFn l4 = [](const SparseVec& v) {
    const double w4[] = {1.0, 0.5, 2.0, 0.25};
    double s = 0.0;
    for (Index i = 1; i <= 4; ++i) s += w4[i - 1] * std::pow(v.get(i), 4);
    return std::pow(s, 0.25);
  };
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<Index> pick(1, 4);
  for (int k = 0; k < 1000; ++k) {
    SparseVec v(64, {{1, g(rng)}, {2, g(rng)}, {3, g(rng)}, {4, g(rng)}});
    const Index j0 = pick(rng);
    if (v.get(j0) == 0.0) continue;
    REQUIRE(suppression_check(l4, nullptr, j0, v));
  }
}

TEST_CASE("smoothness upgrade") {
  const auto& F = fixture();
  SmoothMap phi = [&](const SparseVec& y) { return F.phi.eval(y); };
  const auto pts = F.eval_points(60, 9);

  auto same = upgrade_smoothness(phi, phi, F.eps, pts);
  for (const auto& r : same.records) {
    REQUIRE(r.ok);
    REQUIRE(r.value_gap == 0.0);
  }

  SmoothMap noisy = [&](const SparseVec& y) {
    auto j = F.phi.eval(y);
    j.value.array() += 1e-9;
    j.jacobian.array() += 1e-9;
    return j;
  };
  auto nz = upgrade_smoothness(phi, noisy, F.eps, pts);
  for (const auto& r : nz.records) {
    REQUIRE(r.eta >= 1e-8);
    REQUIRE(r.sigma_g > 0.0);
  }

  // derivative pushed by sigma_min / 2 along its weakest direction at one point
  const SparseVec bad = pts[7];
  SmoothMap pushed = [&](const SparseVec& y) {
    auto j = F.phi.eval(y);
    if (y == bad) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(j.jacobian, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto k = svd.singularValues().size() - 1;
      j.jacobian -= 0.5 * svd.singularValues()(k) * svd.matrixU().col(k) * svd.matrixV().col(k).transpose();
    }
    return j;
  };
  auto rec = certify_upgrade(phi, pushed, F.eps, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) REQUIRE(rec.records[i].ok == (i != 7));
  REQUIRE_THROWS_AS(upgrade_smoothness(phi, pushed, F.eps, pts), OracleError);
}

TEST_CASE("pipeline") {
  const auto& F = fixture();
  // single ball over an affine surjective map: nothing extracted
  auto small = sample_corpus(layout(), 20, 6);
  for (auto& x : small) x = 0.05 * x;
  MapField lin = [](const SparseVec& x) {
    Target t(2);
    t << x.get(4) + 0.1 * x.get(1), x.get(8);
    return t;
  };
  Pipeline one(lin, [](const SparseVec&) { return 1.0; }, small, layout());
  REQUIRE(one.cover().size() == 1);
  REQUIRE(!one.extracts());
  for (const auto& x : small) {
    REQUIRE(one.h(x) == x);
    REQUIRE(one.g(x) == one.phi().value(x));
  }

  auto corpus = sample_corpus(layout(), 120, 31);
  // plus the cluster, so that balls overlap
  corpus.insert(corpus.end(), F.corpus.begin(), F.corpus.begin() + 60);
  Pipeline P(F.f, F.eps, corpus, layout());
  REQUIRE(P.extracts());
  auto rep = P.report();
  REQUIRE(rep.samples.size() == corpus.size());
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    const auto& s = rep.samples[i];
    REQUIRE(s.err_phi <= s.eps / 2);
    REQUIRE(s.err <= s.eps);
    REQUIRE(s.sigma_min >= 1e-6);
    REQUIRE(s.verdict == "surjective");
    REQUIRE(s.guard);
    REQUIRE(s.displacement > 0.0);
    REQUIRE(s.displacement < s.cover_radius);
  }

  // chain rule against end-to-end differences
  for (std::size_t i = 0; i < corpus.size(); i += 12) {
    const auto cols = P.columns(corpus[i]);
    const Eigen::MatrixXd J = P.jacobian(corpus[i], cols);
    const Eigen::MatrixXd fd = finite_difference_jacobian([&](const SparseVec& y) { return P.g(y); }, corpus[i], cols, 1e-6);
    REQUIRE((J - fd).cwiseAbs().maxCoeff() <= 1e-4);
  }
}
