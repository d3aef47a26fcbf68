#pragma once

#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nocrit/extract/tube.hpp"
#include "nocrit/smoothing/approximant.hpp"

namespace nocrit {

struct PipelineConfig {
  CoverConfig cover;
  BlockMode mode = BlockMode::Colored;
  double tau_rank = 1e-6;
  double fd_step = 1e-6;
  double tube_fraction = 0.45;  // tube radius as a fraction of the smallest cover-ball radius of G
  int oscillation_probes = 8;   // random directions per point of G
};

struct SampleRecord {
  SparseVec x;
  double err = 0.0;      // |g(x) - f(x)|
  double err_phi = 0.0;  // |phi(x) - f(x)|
  double eps = 0.0;
  double sigma_min = 0.0;
  std::string verdict;
  bool guard = false;
  double displacement = 0.0;  // |h(x) - x|
  double cover_radius = 0.0;  // delta_z of the ball of G around x
  std::vector<std::size_t> active;
  std::vector<Index> coords;
  Eigen::MatrixXd jacobian;
};

struct PipelineReport {
  std::vector<SampleRecord> samples;
  std::size_t balls = 0;
  std::size_t colors = 0;
  std::size_t dependent_centers = 0;
  double tube_radius = 0.0;

  double worst_ratio() const {
    double w = 0.0;
    for (const auto& s : samples) w = std::max(w, s.err / s.eps);
    return w;
  }
  double min_sigma() const {
    double w = std::numeric_limits<double>::infinity();
    for (const auto& s : samples) w = std::min(w, s.sigma_min);
    return w;
  }
};

// g = phi o h. phi is the ball-cover approximant; h pushes every point off
// the subspace spanned by the data and guard coordinates (where the critical
// set of phi lives) through the tube extraction of E1 x {0} with a constant
// tube radius below the radii of the cover G = {B(z, delta_z)}, delta_z chosen
// so that phi oscillates by at most eps(z)/4 on B(z, delta_z).
class Pipeline {
 public:
  Pipeline(MapField f, EpsField eps, std::vector<SparseVec> corpus, BlockDecomposition decomp,
           PipelineConfig cfg = {})
      : f_(std::move(f)), eps_(std::move(eps)), corpus_(std::move(corpus)), decomp_(std::move(decomp)), cfg_(cfg) {
    const auto& data = decomp_.block("data").indices;
    if (cfg_.cover.probe_axes.empty()) cfg_.cover.probe_axes = data;
    if (cfg_.cover.nudge_axes.empty()) cfg_.cover.nudge_axes = data;
    try {
      cover_ = std::make_unique<BallCover>(build_ball_cover(f_, eps_, corpus_, cfg_.cover));
    } catch (const Error& e) {
      throw StageError("cover", e);
    }
    const auto m = static_cast<std::size_t>(f_(corpus_.front()).size());
    try {
      phi_ = std::make_unique<Approximant>(f_, *cover_, block_operators(m, *cover_, decomp_, cfg_.mode), decomp_);
    } catch (const Error& e) {
      throw StageError("blocks", e);
    }
    try {
      oscillation_cover();
    } catch (const Error& e) {
      throw StageError("oscillation-cover", e);
    }
    // a single ball makes phi affine with surjective derivative: nothing to extract
    if (cover_->size() > 1) {
      const auto& ext = decomp_.block("extraction").indices;
      split_ = std::make_unique<ProductSplit>(decomp_.dim(), ext);
      double r = std::numeric_limits<double>::infinity();
      for (double d : delta_) r = std::min(r, d);
      tube_radius_ = cfg_.tube_fraction * r;
      try {
        tube_ = std::make_unique<TubeExtraction>(*split_, std::make_shared<TubeWindow>(TubeWindow::constant(tube_radius_)));
      } catch (const Error& e) {
        throw StageError("extraction", e);
      }
    }
  }

  const Approximant& phi() const { return *phi_; }
  const BallCover& cover() const { return *cover_; }
  const std::vector<SparseVec>& corpus() const { return corpus_; }
  const std::vector<double>& cover_radii() const { return delta_; }
  double tube_radius() const { return tube_radius_; }
  bool extracts() const { return tube_ != nullptr; }

  SparseVec h(const SparseVec& x) const {
    if (!tube_) return x;
    return split_->join(tube_->release(split_->split(x)));
  }

  Target g(const SparseVec& x) const { return phi_->value(h(x)); }

  // Dg(x) = D phi(h(x)) Dh(x) over the given columns, Dh by central differences
  Eigen::MatrixXd jacobian(const SparseVec& x, const std::vector<Index>& coords) const {
    const SparseVec y = h(x);
    const JacobianAt Jp = phi_->eval(y);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(phi_->m()), static_cast<Eigen::Index>(coords.size()));
    for (std::size_t c = 0; c < coords.size(); ++c) {
      SparseVec col;
      if (!tube_) {
        col = SparseVec::unit(coords[c], 1.0, x.dim());
      } else {
        const SparseVec e = SparseVec::unit(coords[c], cfg_.fd_step, x.dim());
        col = (0.5 / cfg_.fd_step) * (h(x + e) - h(x - e));
      }
      Target v = Target::Zero(static_cast<Eigen::Index>(phi_->m()));
      for (std::size_t k = 0; k < Jp.coords.size(); ++k) {
        const double d = col.get(Jp.coords[k]);
        if (d != 0.0) v += d * Jp.jacobian.col(static_cast<Eigen::Index>(k));
      }
      out.col(static_cast<Eigen::Index>(c)) = v;
    }
    return out;
  }

  // columns used for Dg: support of x and h(x), the guard block, the extraction block
  std::vector<Index> columns(const SparseVec& x) const {
    std::set<Index> s;
    for (const auto& e : x.entries()) s.insert(e.index);
    const SparseVec y = h(x);
    for (const auto& e : y.entries()) s.insert(e.index);
    for (Index i : decomp_.block("guard").indices) s.insert(i);
    if (tube_)
      for (Index i : decomp_.block("extraction").indices) s.insert(i);
    return {s.begin(), s.end()};
  }

  SampleRecord evaluate(const SparseVec& x, double cover_radius) const {
    SampleRecord r;
    r.x = x;
    r.eps = eps_(x);
    const Target fx = f_(x);
    const SparseVec y = h(x);
    r.displacement = distance(x, y);
    r.cover_radius = cover_radius;
    r.err = (phi_->value(y) - fx).norm();
    r.err_phi = (phi_->value(x) - fx).norm();
    r.coords = columns(x);
    r.jacobian = jacobian(x, r.coords);
    r.active = phi_->partition().eval(y, false).active;
    const auto v = critical_certificate(r.jacobian, phi_->guard(y), cfg_.tau_rank);
    r.sigma_min = v.sigma_min;
    r.verdict = v.verdict;
    r.guard = v.guard;
    return r;
  }

  PipelineReport report() const {
    PipelineReport rep;
    rep.balls = cover_->size();
    rep.colors = phi_->operators().colors;
    rep.dependent_centers = cover_->dependent();
    rep.tube_radius = tube_radius_;
    for (std::size_t i = 0; i < corpus_.size(); ++i) rep.samples.push_back(evaluate(corpus_[i], delta_[i]));
    return rep;
  }

 private:
  // delta_z for every corpus point: halve from the radius of the ball whose
  // core holds z until phi oscillates by at most eps(z)/4 over the probes
  void oscillation_cover() {
    std::mt19937_64 rng(cfg_.cover.seed + 1);
    std::normal_distribution<double> g;
    const auto& ext = decomp_.block("extraction").indices;
    for (const auto& z : corpus_) {
      double r = 0.0;
      for (const auto& b : cover_->balls)
        if (distance(z, b.center) <= 0.5 * b.radius) r = std::max(r, 0.5 * b.radius);
      if (r == 0.0) throw CoverError("cover:membership", "corpus point outside every core");
      const double ez = eps_(z);
      for (;;) {
        if (r < cfg_.cover.r_min) throw CoverError("cover:oscillation", "phi oscillation certificate fails");
        std::vector<Index> axes;
        for (const auto& e : z.entries()) axes.push_back(e.index);
        for (std::size_t k = 0; k < std::min<std::size_t>(4, ext.size()); ++k) axes.push_back(ext[k]);
        std::vector<SparseVec> probes{z};
        const double s = r * (1.0 - 1e-9);
        for (Index i : axes) {
          probes.push_back(z + SparseVec::unit(i, s, z.dim()));
          probes.push_back(z + SparseVec::unit(i, -s, z.dim()));
        }
        for (int k = 0; k < cfg_.oscillation_probes; ++k) {
          std::vector<Entry> e;
          for (Index i : axes) e.push_back({i, g(rng)});
          for (Index i : ext) e.push_back({i, g(rng)});
          std::sort(e.begin(), e.end(), [](const Entry& a, const Entry& b) { return a.index < b.index; });
          e.erase(std::unique(e.begin(), e.end(), [](const Entry& a, const Entry& b) { return a.index == b.index; }),
                  e.end());
          SparseVec d(z.dim(), e);
          probes.push_back(axpy(s / l2_norm(d), d, z));
        }
        bool ok = true;
        std::vector<Target> vals;
        for (const auto& p : probes) {
          try {
            vals.push_back(phi_->value(p));
          } catch (const CoverageError&) {
            ok = false;
            break;
          }
        }
        if (ok && detail::spread(vals) <= 0.25 * ez) break;
        r *= 0.5;
      }
      delta_.push_back(r);
    }
  }

  MapField f_;
  EpsField eps_;
  std::vector<SparseVec> corpus_;
  BlockDecomposition decomp_;
  PipelineConfig cfg_;
  std::unique_ptr<BallCover> cover_;
  std::unique_ptr<Approximant> phi_;
  std::vector<double> delta_;
  std::unique_ptr<ProductSplit> split_;
  std::unique_ptr<TubeExtraction> tube_;
  double tube_radius_ = 0.0;
};

// A C1 map given by its value and jacobian.
using SmoothMap = std::function<JacobianAt(const SparseVec&)>;

struct UpgradeRecord {
  SparseVec x;
  double sigma_phi = 0.0;  // sigma_min(D phi(x)); r_x = sigma_phi / 2
  double eta = 0.0;        // min(eps/2, r_x/2)
  double value_gap = 0.0;
  double derivative_gap = 0.0;  // spectral norm of D phi - D g
  double sigma_g = 0.0;
  bool ok = false;
};

struct UpgradeResult {
  SmoothMap g;
  std::vector<UpgradeRecord> records;
};

namespace detail {

inline Eigen::MatrixXd on_columns(const JacobianAt& J, const std::vector<Index>& cols) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(J.jacobian.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    auto it = std::lower_bound(J.coords.begin(), J.coords.end(), cols[c]);
    if (it != J.coords.end() && *it == cols[c])
      out.col(static_cast<Eigen::Index>(c)) = J.jacobian.col(static_cast<Eigen::Index>(it - J.coords.begin()));
  }
  return out;
}

}  // namespace detail

// Accepts the oracle in place of phi once it stays within
// eta(x) = min(eps(x)/2, r_x/2) of phi in value and derivative at every corpus
// point, r_x = sigma_min(D phi(x))/2. Within that distance D g(x) is still onto.
inline UpgradeResult certify_upgrade(const SmoothMap& phi, const SmoothMap& oracle, const EpsField& eps,
                                     const std::vector<SparseVec>& corpus) {
  UpgradeResult out;
  out.g = oracle;
  for (const auto& x : corpus) {
    UpgradeRecord r;
    r.x = x;
    const JacobianAt a = phi(x), b = oracle(x);
    std::set<Index> s(a.coords.begin(), a.coords.end());
    s.insert(b.coords.begin(), b.coords.end());
    const std::vector<Index> cols(s.begin(), s.end());
    const Eigen::MatrixXd Ja = detail::on_columns(a, cols), Jb = detail::on_columns(b, cols);
    r.sigma_phi = smallest_singular_value(Ja);
    r.eta = std::min(eps(x) / 2.0, r.sigma_phi / 4.0);
    r.value_gap = (a.value - b.value).norm();
    r.derivative_gap = Eigen::JacobiSVD<Eigen::MatrixXd>(Ja - Jb).singularValues()(0);
    r.sigma_g = smallest_singular_value(Jb);
    r.ok = r.value_gap <= r.eta && r.derivative_gap <= r.eta;
    out.records.push_back(r);
  }
  return out;
}

inline UpgradeResult upgrade_smoothness(const SmoothMap& phi, const SmoothMap& oracle, const EpsField& eps,
                                        const std::vector<SparseVec>& corpus) {
  UpgradeResult out = certify_upgrade(phi, oracle, eps, corpus);
  std::size_t bad = 0;
  for (const auto& r : out.records) bad += !r.ok;
  if (bad > 0)
    throw OracleError("upgrade:oracle-contract", std::to_string(bad) + " corpus points outside the eta band");
  return out;
}

}  // namespace nocrit
