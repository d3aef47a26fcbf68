#include <catch_amalgamated.hpp>

#include <random>

#include "nocrit/seqspace.hpp"

using namespace nocrit;
using Catch::Approx;

namespace {

SparseVec random_sparse(std::mt19937_64& rng, std::size_t support, std::size_t dim = 64) {
  std::uniform_int_distribution<Index> pick(1, static_cast<Index>(dim));
  std::normal_distribution<double> coef;
  std::vector<Entry> e;
  for (std::size_t i = 0; i < support; ++i) e.push_back({pick(rng), coef(rng)});
  return SparseVec(dim, e);
}

}  // namespace

TEST_CASE("sparse vectors drop zeros and merge duplicates") {
  SparseVec v(64, {{3, 1.0}, {1, 2.0}, {3, -1.0}, {7, 0.0}});
  REQUIRE(v.nnz() == 1);
  REQUIRE(v.get(1) == 2.0);
  REQUIRE(v.get(3) == 0.0);
  v.set(1, 0.0);
  REQUIRE(v.empty());
}

TEST_CASE("indices beyond the truncation are rejected") {
  REQUIRE_THROWS_AS(SparseVec::unit(65), TruncationError);
  REQUIRE_THROWS_AS(SparseVec(16, {{17, 1.0}}), TruncationError);
  SparseVec v(16);
  REQUIRE_THROWS_AS(v.set(0, 1.0), TruncationError);
  REQUIRE_THROWS_AS(axpy(1.0, SparseVec(16), SparseVec(32)), TruncationError);
}

TEST_CASE("algebra basics") {
  std::mt19937_64 rng(1);
  SparseVec v = random_sparse(rng, 10), w = random_sparse(rng, 10);
  REQUIRE(axpy(0.0, v, w) == w);
  REQUIRE(l2_norm(SparseVec::unit(5)) == 1.0);
  // a*v + (-a*v) is the empty vector, not a vector of stored zeros
  REQUIRE(axpy(2.5, v, -2.5 * v).empty());
}

TEST_CASE("sparse algebra matches a dense brute force") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ua(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    SparseVec v = random_sparse(rng, 20), w = random_sparse(rng, 20);
    const double a = ua(rng);
    auto dv = v.to_dense(), dw = w.to_dense();
    double dot = 0, nv = 0, dd = 0;
    std::vector<double> dz(64);
    for (int i = 0; i < 64; ++i) {
      dz[i] = a * dv[i] + dw[i];
      dot += dv[i] * dw[i];
      nv += dv[i] * dv[i];
      dd += (dv[i] - dw[i]) * (dv[i] - dw[i]);
    }
    SparseVec z = axpy(a, v, w);
    auto zd = z.to_dense();
    for (int i = 0; i < 64; ++i) REQUIRE(std::abs(zd[i] - dz[i]) <= 1e-14);
    REQUIRE(std::abs(inner(v, w) - dot) <= 1e-14 * (1 + std::abs(dot)));
    REQUIRE(std::abs(l2_norm(v) - std::sqrt(nv)) <= 1e-14);
    REQUIRE(std::abs(distance(v, w) - std::sqrt(dd)) <= 1e-14);
    // Cauchy-Schwarz
    REQUIRE(std::abs(inner(v, w)) <= l2_norm(v) * l2_norm(w) + 1e-12);
  }
}

TEST_CASE("block decompositions") {
  auto d = BlockDecomposition::standard(64);
  REQUIRE(d.block("guard").indices.size() == 16);
  REQUIRE(d.block("extraction").indices.size() == 24);
  REQUIRE(d.block("data").indices.size() == 24);
  REQUIRE(d.owner(8) == "guard");
  REQUIRE(d.owner(1) == "data");
  REQUIRE(d.owner(63) == "extraction");

  REQUIRE_THROWS_AS(BlockDecomposition(4, {{"a", {1, 2}}, {"b", {2, 3, 4}}}), DomainError);
  REQUIRE_THROWS_AS(BlockDecomposition(4, {{"a", {1, 2}}, {"b", {3}}}), DomainError);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    SparseVec v = random_sparse(rng, 30);
    for (const auto& b : d.blocks()) {
      SparseVec p = d.project(v, b.name);
      REQUIRE(d.project(p, b.name) == p);
      REQUIRE(l2_norm(p) <= l2_norm(v));
    }
  }
}

TEST_CASE("product split") {
  ProductSplit s(16, {9, 10, 11});
  SparseVec v(16, {{1, 1.0}, {10, 2.0}, {12, 3.0}});
  ProductPoint p = s.split(v);
  REQUIRE(p.x1 == SparseVec(16, {{1, 1.0}, {12, 3.0}}));
  REQUIRE(p.x2 == SparseVec(16, {{10, 2.0}}));
  REQUIRE(s.join(p) == v);
  REQUIRE(s.position(10) == 1);
  REQUIRE_THROWS_AS(s.check({p.x2, p.x1}), DomainError);
}

TEST_CASE("upper sphere chart") {
  SpherePoint pole = lift_to_sphere(SparseVec(64));
  REQUIRE(pole.t == 1.0);
  REQUIRE(tangent_slope(pole, SparseVec::unit(3, 2.0)) == 0.0);

  SpherePoint y = lift_to_sphere(SparseVec::unit(1, 0.6));
  REQUIRE(y.t == Approx(0.8).margin(1e-15));

  // the -0.75 slope was frozen from a central difference of sqrt(1-|u|^2)
  REQUIRE(tangent_slope(y, SparseVec::unit(1)) == Approx(-0.75).margin(1e-14));
  const double h = 1e-6;
  auto height = [](double a) { return std::sqrt(1.0 - a * a); };
  REQUIRE(tangent_slope(y, SparseVec::unit(1)) == Approx((height(0.6 + h) - height(0.6 - h)) / (2 * h)).margin(1e-8));

  REQUIRE(tangent_slope(y, SparseVec::unit(2)) == 0.0);
  REQUIRE_THROWS_AS(lift_to_sphere(SparseVec::unit(1, 0.999)), EquatorError);

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    SparseVec u = random_sparse(rng, 8);
    u = (0.9 * std::uniform_real_distribution<double>(0, 1)(rng) / l2_norm(u)) * u;
    SpherePoint p = lift_to_sphere(u);
    REQUIRE(std::abs(inner(u, u) + p.t * p.t - 1.0) <= 1e-14);
    REQUIRE(drop_height(p) == u);
    SparseVec w1 = random_sparse(rng, 8), w2 = random_sparse(rng, 8);
    const double a = 1.7;
    REQUIRE(std::abs(tangent_slope(p, axpy(a, w1, w2)) - a * tangent_slope(p, w1) - tangent_slope(p, w2)) <= 1e-13);
  }
}
