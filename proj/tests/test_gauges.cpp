#include <catch_amalgamated.hpp>

#include <random>

#include "nocrit/gauges.hpp"

using namespace nocrit;
using Catch::Approx;

// Frozen from an adaptive-quadrature oracle (scipy.integrate.quad + brentq)
// for the profile exp(-1/(8 s (1-s))).
namespace frozen {
constexpr double kTheta06 = 0.8932523880880157;
constexpr double kProfile03 = 0.22563280812231065;
constexpr double kMaxSlope = 1.4124579371276011;
constexpr double kMu11 = 1.1534006802394448;
constexpr double kMu1_08 = 1.0549639307176935;
constexpr double kMu07_1 = 1.0215137634469513;
}  // namespace frozen

TEST_CASE("bump profile against quadrature oracle") {
  const auto& p = BumpProfile::instance();
  REQUIRE(p.value(0.3) == Approx(frozen::kProfile03).margin(1e-12));
  REQUIRE(p.value(0.5) == Approx(0.5).margin(1e-13));
  REQUIRE(p.max_slope() == Approx(frozen::kMaxSlope).margin(1e-12));
  REQUIRE(p.value(0.0) == 0.0);
  REQUIRE(p.value(1.0) == 1.0);
  REQUIRE(p.value(-3.0) == 0.0);
  REQUIRE(p.value(7.0) == 1.0);
}

TEST_CASE("smooth step plateaus, monotonicity and slope bound") {
  SmoothStep theta(0.5, 1.0, Direction::Falling, 4.0);
  REQUIRE(theta(0.25) == 1.0);
  REQUIRE(theta(0.5) == 1.0);
  REQUIRE(theta(2.0) == 0.0);
  REQUIRE(theta(1.0) == 0.0);
  REQUIRE(theta.deriv(0.3) == 0.0);
  REQUIRE(theta.deriv(1.3) == 0.0);
  REQUIRE(theta(0.6) == Approx(frozen::kTheta06).margin(1e-12));

  double max_slope = 0, prev = 1.0;
  for (int i = 0; i <= 100000; ++i) {
    const double t = 0.4 + 0.7 * i / 100000.0;
    max_slope = std::max(max_slope, std::abs(theta.deriv(t)));
    REQUIRE(theta(t) <= prev);
    prev = theta(t);
  }
  REQUIRE(max_slope <= 4.0);
  REQUIRE(max_slope == Approx(2 * frozen::kMaxSlope).margin(1e-9));

  // derivative matches central differences on a dense grid
  const double h = 1e-5;
  for (int i = 1; i < 2000; ++i) {
    const double t = 0.45 + 0.6 * i / 2000.0;
    REQUIRE(std::abs(theta.deriv(t) - (theta(t + h) - theta(t - h)) / (2 * h)) <= 1e-6);
  }

  SmoothStep rise(-1.0, 3.0, Direction::Rising);
  REQUIRE(rise(-1.0) == 0.0);
  REQUIRE(rise(3.0) == 1.0);
  REQUIRE(rise(1.0) == Approx(0.5).margin(1e-13));
  for (int i = 1; i < 2000; ++i) {
    const double t = -1.2 + 4.4 * i / 2000.0;
    REQUIRE(std::abs(rise.deriv(t) - (rise(t + h) - rise(t - h)) / (2 * h)) <= 1e-6);
  }

  // the bound is enforced: on an interval of length 1/4 the slope reaches 5.65
  REQUIRE_THROWS_AS(SmoothStep(0.5, 0.75, Direction::Falling, 4.0), CertificationError);
  REQUIRE_THROWS_AS(SmoothStep(1.0, 1.0, Direction::Rising), DomainError);
}

TEST_CASE("omega functional") {
  OmegaFunctional w(64);
  REQUIRE(w(SparseVec(64)) == 0.0);
  REQUIRE(w(SparseVec::unit(1)) == 0.25);
  REQUIRE(w(SparseVec::unit(2)) == 0.0625);
  REQUIRE(w.grad(SparseVec::unit(1)) == SparseVec::unit(1, 0.25));
  REQUIRE_THROWS_AS(w.grad(SparseVec(64)), SingularPointError);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<Index> pick(1, 10);
  auto rnd = [&] {
    std::vector<Entry> e;
    for (int i = 0; i < 6; ++i) e.push_back({pick(rng), g(rng)});
    return SparseVec(64, e);
  };
  for (int trial = 0; trial < 10000; ++trial) {
    SparseVec u = rnd(), v = rnd();
    REQUIRE(w(u + v) <= w(u) + w(v) + 1e-12);
    REQUIRE(w(u) - w(v) <= w(u - v) + 1e-12);
    REQUIRE(w(u) <= 0.25 * l2_norm(u) + 1e-15);
    const double r = std::abs(g(rng));
    REQUIRE(std::abs(w(r * u) - r * w(u)) <= 1e-12);
  }
  for (int trial = 0; trial < 200; ++trial) {
    SparseVec v = rnd();
    if (v.empty()) continue;
    SparseVec gr = w.grad(v);
    REQUIRE(std::abs(inner(gr, v) - w(v)) <= 1e-10);
    for (const Entry& e : v.entries()) {
      const double h = 1e-6;
      SparseVec vp = v, vm = v;
      vp.set(e.index, e.value + h);
      vm.set(e.index, e.value - h);
      REQUIRE(std::abs(gr.get(e.index) - (w(vp) - w(vm)) / (2 * h)) <= 1e-6);
    }
  }
  // countable-sum surrogate: omega of a finite sum vs sum of omegas
  for (int trial = 0; trial < 200; ++trial) {
    SparseVec s(64);
    double total = 0;
    for (int k = 0; k < 8; ++k) {
      SparseVec z = rnd();
      s = s + z;
      total += w(z);
    }
    REQUIRE(w(s) <= total + 1e-12);
  }
}

TEST_CASE("omega on an ordered block and anchor weights") {
  std::vector<Index> block{40, 33, 50, 61};
  OmegaFunctional w(64, block);
  DeletingCurve c(w);
  REQUIRE(c.terms() == 4);
  for (std::size_t k = 1; k <= 4; ++k) REQUIRE(w(c.anchor(k)) == std::ldexp(1.0, -2 * static_cast<int>(k + 1)));
  REQUIRE_THROWS_AS(w(SparseVec::unit(1)), DomainError);
}

TEST_CASE("escape: anchor sum leaves the range of the diagonal operator") {
  // A z_n = sum_k 4^-k y_k converges in E, but its preimage z_n = sum_k y_k has
  // |z_n|^2 = n/16, growing with the truncation level.
  double prev = 0.0;
  for (std::size_t dim : {16u, 32u, 64u}) {
    OmegaFunctional w(dim);
    DeletingCurve c(w);
    std::vector<Entry> image;
    for (std::size_t k = 1; k <= c.terms(); ++k) {
      const Index b = c.anchors()[k - 1];
      image.push_back({b, w.weight(b) * DeletingCurve::kAnchorScale});
    }
    SparseVec az(dim, image);
    double pre = 0.0;
    for (const Entry& e : az.entries()) {
      const double coef = e.value / w.weight(e.index);
      pre += coef * coef;
    }
    REQUIRE(pre == Approx(c.terms() / 16.0).epsilon(1e-14));
    REQUIRE(pre > prev);
    prev = pre;
  }
}

TEST_CASE("deleting curve") {
  ProductSplit split(64, {33, 34, 35, 37, 38, 39, 41, 42, 43, 45, 46, 47, 49, 50, 51, 53, 54, 55});
  GaugeKit kit(split);
  const auto& gamma = kit.gamma;
  REQUIRE(gamma(1.5).empty());
  REQUIRE(gamma(1.0).empty());
  SparseVec g06 = gamma(0.6);
  REQUIRE(g06.nnz() == 1);
  REQUIRE(g06.get(33) == Approx(0.25 * frozen::kTheta06).margin(1e-13));
  REQUIRE_THROWS_AS(gamma(0.0), DomainError);
  REQUIRE_THROWS_AS(gamma(-1.0), DomainError);
  REQUIRE_THROWS_AS(gamma(1e-7), TruncationError);
  REQUIRE(gamma(0.1).nnz() <= static_cast<std::size_t>(std::ceil(std::log2(1 / 0.1))) + 1);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(gamma.t_min(), 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    REQUIRE(kit.omega(gamma(a) - gamma(b)) <= 0.5 * (b - a) + 1e-12);
  }
  // derivative vs central differences
  for (double t : {0.01, 0.07, 0.3, 0.55, 0.9}) {
    const double h = 1e-7;
    SparseVec fd = (1.0 / (2 * h)) * (gamma(t + h) - gamma(t - h));
    REQUIRE(distance(fd, gamma.deriv(t)) <= 1e-5);
  }
}

TEST_CASE("smooth square gauge") {
  const auto& sq = SmoothSquare::instance();
  REQUIRE(sq.mu(0, 3) == 3.0);
  REQUIRE(sq.mu(-2, 0) == 2.0);
  REQUIRE(sq.mu(1, 0.4) == 1.0);
  REQUIRE(sq.mu(0, 0) == 0.0);
  REQUIRE(sq.mu(1, 1) == Approx(frozen::kMu11).margin(1e-10));
  REQUIRE(sq.mu(1, 0.8) == Approx(frozen::kMu1_08).margin(1e-10));
  REQUIRE(sq.mu(-0.7, 1) == Approx(frozen::kMu07_1).margin(1e-10));
  REQUIRE(sq.phi(1.0) == 1.0);
  REQUIRE(sq.phi(0.5) == 0.0);
  REQUIRE_THROWS_AS(sq.grad(0, 0), SingularPointError);

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-3, 3), lam(0, 5), tt(0, 3);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng), y = u(rng);
    const double m = sq.mu(x, y);
    const double ax = std::abs(x), ay = std::abs(y), mx = std::max(ax, ay);
    REQUIRE(m <= ax + ay + 1e-10);
    REQUIRE(ax + ay <= 2 * m + 1e-10);
    REQUIRE(mx <= m + 1e-10);
    REQUIRE(m <= 2 * mx + 1e-10);
    if (ay <= ax / 2) REQUIRE(m == ax);
    if (ax <= ay / 2) REQUIRE(m == ay);
    const double l = lam(rng);
    REQUIRE(std::abs(sq.mu(l * x, l * y) - l * m) <= 1e-10 * (1 + l));
    const double t1 = tt(rng), t2 = tt(rng);
    REQUIRE((sq.mu(x, std::min(t1, t2) * y) <= sq.mu(x, std::max(t1, t2) * y) + 1e-10));
    const auto [gx, gy] = sq.grad(x, y);
    const double h = 1e-7;
    REQUIRE(std::abs(gx - (sq.mu(x + h, y) - sq.mu(x - h, y)) / (2 * h)) <= 1e-6);
    REQUIRE(std::abs(gy - (sq.mu(x, y + h) - sq.mu(x, y - h)) / (2 * h)) <= 1e-6);
  }
}

TEST_CASE("rho mixes the two gauges") {
  ProductSplit split(64, {33, 34, 35, 37});
  GaugeKit kit(split);
  SparseVec zero(64);
  REQUIRE(kit.rho(0.0, zero) == 0.0);
  SparseVec x2(64, {{33, 0.3}, {35, -1.2}});
  REQUIRE(kit.rho(0.0, x2) == kit.omega(x2));
  REQUIRE(kit.rho(0.7, zero) == 0.7);
  REQUIRE_THROWS_AS(kit.rho(-0.1, x2), DomainError);

  // the x2-gradient of rho is continuous across psi = 0
  auto grad_x2 = [&](double psi) {
    const double h = 1e-7;
    SparseVec p = x2, m = x2;
    p.set(33, 0.3 + h);
    m.set(33, 0.3 - h);
    return (kit.rho(psi, p) - kit.rho(psi, m)) / (2 * h);
  };
  REQUIRE(std::abs(grad_x2(0.0) - grad_x2(1e-9)) < 1e-5);
}
