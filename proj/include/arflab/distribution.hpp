#pragma once

// Evaluable distribution functions for the quantile transform: either the
// exact standard normal (identity transform) or a clamped empirical CDF
// built from calibration replicates.  The clamp keeps F strictly inside
// (0,1) so the normal quantile of F(x) is always finite.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "arflab/normal.hpp"

namespace arflab {

class DistributionFn {
 public:
  static DistributionFn standard_normal() {
    DistributionFn f;
    f.exact_normal_ = true;
    return f;
  }

  /// F(x) = rank(x)/(R+1) with rank = #{values <= x}, clamped to
  /// [1/(R+1), R/(R+1)].  Needs at least 2 finite values.
  static DistributionFn empirical(std::vector<double> values) {
    if (values.size() < 2)
      throw std::invalid_argument("empirical cdf: need at least 2 values");
    for (double v : values)
      if (!std::isfinite(v)) throw std::invalid_argument("empirical cdf: non-finite value");
    DistributionFn f;
    f.sorted_ = std::move(values);
    std::sort(f.sorted_.begin(), f.sorted_.end());
    return f;
  }

  bool exact_normal() const { return exact_normal_; }
  std::size_t sample_count() const { return sorted_.size(); }

  double operator()(double x) const {
    if (exact_normal_) return normal_cdf(x);
    const double r1 = static_cast<double>(sorted_.size()) + 1.0;
    const auto rank = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
    const double clamped = std::clamp(static_cast<double>(rank), 1.0,
                                      static_cast<double>(sorted_.size()));
    return clamped / r1;
  }

 private:
  bool exact_normal_ = false;
  std::vector<double> sorted_;
};

struct QuantileTransform {
  double eta;           // Phi^{-1}(F(xi))
  double e_scale_free;  // xi - eta
};

/// eta = Phi^{-1}(F(xi)).  The exact-normal branch is the identity by
/// construction (Phi^{-1} of Phi), bit-exact, so Gaussian pipelines have
/// e == 0 identically rather than round-trip noise.
inline QuantileTransform quantile_transform(double xi, const DistributionFn& f) {
  if (!std::isfinite(xi)) throw std::invalid_argument("quantile_transform: non-finite xi");
  if (f.exact_normal()) return {xi, 0.0};
  const double p = f(xi);
  const double eta = normal_quantile(p);
  return {eta, xi - eta};
}

}  // namespace arflab
