#pragma once

#include <utility>
#include <vector>

#include "nocrit/smoothing/corpus.hpp"
#include "nocrit/smoothing/pipeline.hpp"

namespace nocrit {

struct LineScan {
  std::vector<double> t, theta, slope, sigma;
  double theta_left = 0.0, theta_mid = 0.0, theta_right = 0.0;  // at t = -1, 0, 1
  // brackets [a, b] where the slope turns from negative to positive (zero
  // slopes in between are skipped); each holds a stationary point
  std::vector<std::pair<double, double>> sign_changes;
  bool certificates_pass = true;   // every sigma_min >= tau_rank
};

// Approximates x -> (|x_i|) on the given coordinates within eps everywhere
// on a corpus along t e_1 and scans theta(t) = g_1(t e_1) on [-1, 1]. Since
// theta(+-1) >= 1 - eps and theta(0) <= eps, theta has an interior minimum
// whenever eps < 1/2: the derivative of g is onto but cannot be injective.
inline LineScan negative_demo(const BlockDecomposition& decomp, double eps = 1.0 / 3.0, double step = 1e-3,
                              double corpus_step = 1e-2, double tau_rank = 1e-6) {
  const auto& data = decomp.block("data").indices;
  const std::vector<Index> outputs(data.begin(), data.begin() + 2);
  const Index axis = outputs[0];
  std::vector<SparseVec> corpus;
  const int nc = static_cast<int>(std::lround(1.2 / corpus_step));
  for (int k = -nc; k <= nc; ++k) corpus.push_back(SparseVec::unit(axis, k * corpus_step, decomp.dim()));
  PipelineConfig cfg;
  cfg.tau_rank = tau_rank;
  Pipeline P(abs_map(outputs), [eps](const SparseVec&) { return eps; }, corpus, decomp, cfg);

  LineScan s;
  const int n = static_cast<int>(std::lround(1.0 / step));
  for (int k = -n; k <= n; ++k) {
    const double t = k * step;
    const SparseVec x = SparseVec::unit(axis, t, decomp.dim());
    s.t.push_back(t);
    s.theta.push_back(P.g(x)(0));
    s.slope.push_back(P.jacobian(x, {axis})(0, 0));
    const double sig = smallest_singular_value(P.jacobian(x, P.columns(x)));
    s.sigma.push_back(sig);
    s.certificates_pass = s.certificates_pass && sig >= tau_rank;
  }
  s.theta_left = s.theta.front();
  s.theta_mid = s.theta[static_cast<std::size_t>(n)];
  s.theta_right = s.theta.back();
  std::size_t last = s.t.size();
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    if (s.slope[i] == 0.0) continue;
    if (last < s.t.size() && s.slope[last] < 0.0 && s.slope[i] > 0.0) s.sign_changes.push_back({s.t[last], s.t[i]});
    last = i;
  }
  return s;
}

}  // namespace nocrit
