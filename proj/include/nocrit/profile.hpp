#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace nocrit {

// Normalized cumulative bump P(s) = int_0^s b / int_0^1 b with
// b(s) = exp(-a / (s (1 - s))), a = 1/8. Exactly 0 for s <= 0 and 1 for s >= 1.
// Values come from a cubic Hermite table whose node slopes are the exact bump,
// so P' is evaluated in closed form rather than through the table.
class BumpProfile {
 public:
  static constexpr double kSharpness = 0.125;
  static constexpr int kCells = 4096;

  static const BumpProfile& instance() {
    static const BumpProfile p;
    return p;
  }

  double value(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    // upper half by symmetry keeps values near 1 monotone to the last ulp
    if (s > 0.5) return 1.0 - lower(1.0 - s);
    return lower(s);
  }

  double derivative(double s) const {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return raw(s) / total_;
  }

  // max of P', attained at s = 1/2
  double max_slope() const { return raw(0.5) / total_; }

  static double raw(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return std::exp(-kSharpness / (s * (1.0 - s)));
  }

 private:
  double lower(double s) const {
    const double x = s * kCells;
    int i = static_cast<int>(x);
    if (i >= kCells) i = kCells - 1;
    if (i == 0) return 0.0;  // below 1e-200
    const double h = 1.0 / kCells;
    const double u = x - i;
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    double v;
    if (s < 0.25) {
      // log P varies slowly where P itself grows like exp(-a/s)
      v = std::exp(h00 * lcdf_[i] + h10 * h * lslope_[i] + h01 * lcdf_[i + 1] + h11 * h * lslope_[i + 1]);
    } else {
      v = h00 * cdf_[i] + h10 * h * slope_[i] + h01 * cdf_[i + 1] + h11 * h * slope_[i + 1];
    }
    return std::clamp(v, cdf_[i], cdf_[i + 1]);
  }

  BumpProfile() : cdf_(kCells + 1), slope_(kCells + 1), lcdf_(kCells + 1), lslope_(kCells + 1) {
    // 8-point Gauss-Legendre per cell
    static constexpr std::array<double, 4> xg{0.1834346424956498, 0.5255324099163290,
                                              0.7966664774136267, 0.9602898564975363};
    static constexpr std::array<double, 4> wg{0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};
    const double h = 1.0 / kCells;
    std::vector<double> acc(kCells + 1, 0.0);
    double sum = 0.0;
    for (int i = 0; i < kCells; ++i) {
      const double mid = (i + 0.5) * h;
      double cell = 0.0;
      for (int g = 0; g < 4; ++g) {
        cell += wg[g] * (raw(mid - 0.5 * h * xg[g]) + raw(mid + 0.5 * h * xg[g]));
      }
      sum += 0.5 * h * cell;
      acc[i + 1] = sum;
    }
    total_ = sum;
    for (int i = 0; i <= kCells; ++i) {
      cdf_[i] = acc[i] / total_;
      slope_[i] = raw(i * h) / total_;
    }
    cdf_[0] = 0.0;
    cdf_[kCells / 2] = 0.5;
    cdf_[kCells] = 1.0;
    for (int i = 1; i <= kCells / 4 + 1; ++i) {
      lcdf_[i] = std::log(cdf_[i]);
      lslope_[i] = slope_[i] / cdf_[i];
    }
  }

  std::vector<double> cdf_;
  std::vector<double> slope_;
  std::vector<double> lcdf_;
  std::vector<double> lslope_;
  double total_ = 1.0;
};

}  // namespace nocrit
