#pragma once

// Seeded generators for associated random fields with known covariance.
//
// Two kinds: iid standardized innovations, and causal moving averages
// X_j = sum_i a_i Z_{j-i} with a finite nonnegative kernel (nondecreasing
// functions of independent variables are associated).  Moving averages
// draw innovations on a halo-extended box so every cell of the requested
// window has the exact stationary law; there is no edge bias anywhere.
//
// Same (model, extent, seed, replicate) regenerates bit-identical cells.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "arflab/covariance.hpp"
#include "arflab/lattice.hpp"
#include "arflab/prefix_grid.hpp"
#include "arflab/rng.hpp"

namespace arflab {

/// Finite nonnegative moving-average kernel on offsets [0, extent_s) per
/// axis, row-major.
struct Kernel {
  MultiIndex extent;
  std::vector<double> weights;

  static Kernel identity(int d) {
    return {MultiIndex(static_cast<std::size_t>(d), 1), {1.0}};
  }

  void check() const {
    Index total = 1;
    for (std::size_t s = 0; s < extent.dim(); ++s) {
      if (extent[s] < 1) throw std::invalid_argument("Kernel: extent must be >= 1");
      total = checked_mul(total, extent[s]);
    }
    if (static_cast<std::size_t>(total) != weights.size())
      throw std::invalid_argument("Kernel: weight count does not match extent");
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("Kernel: weights must be nonnegative");
      sum += w;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("Kernel: all-zero kernel");
  }
};

/// Exact autocovariance of the kernel: rho(i) = sum_m a_m a_{m+i}, so
/// sigma^2 = (sum_m a_m)^2.
inline CovarianceModel kernel_autocovariance(const Kernel& kernel) {
  kernel.check();
  const std::size_t d = kernel.extent.dim();
  const GridLayout lay(kernel.extent);
  MultiIndex half(d);
  for (std::size_t s = 0; s < d; ++s) half[s] = kernel.extent[s] - 1;
  MultiIndex table_ext(d);
  Index cells = 1;
  for (std::size_t s = 0; s < d; ++s) {
    table_ext[s] = 2 * half[s] + 1;
    cells = checked_mul(cells, table_ext[s]);
  }
  const GridLayout tlay(table_ext);
  std::vector<double> table(static_cast<std::size_t>(cells), 0.0);
  for_each_point(Rect(MultiIndex(d, 0), table_ext), [&](const MultiIndex& q) {
    MultiIndex offset(d);
    for (std::size_t s = 0; s < d; ++s) offset[s] = q[s] - 1 - half[s];
    double acc = 0.0;
    for_each_point(Rect(MultiIndex(d, 0), kernel.extent), [&](const MultiIndex& m) {
      MultiIndex shifted(d);
      bool inside = true;
      for (std::size_t s = 0; s < d; ++s) {
        shifted[s] = m[s] + offset[s];
        inside = inside && shifted[s] >= 1 && shifted[s] <= kernel.extent[s];
      }
      if (inside)
        acc += kernel.weights[static_cast<std::size_t>(lay.flat(m))] *
               kernel.weights[static_cast<std::size_t>(lay.flat(shifted))];
    });
    table[static_cast<std::size_t>(tlay.flat(q))] = acc;
  });
  return CovarianceModel::from_autocovariance(static_cast<int>(d), half, std::move(table));
}

class FieldModel {
 public:
  static FieldModel iid(int d, Innovation law) {
    FieldModel m;
    m.d_ = d;
    m.law_ = law;
    m.kernel_ = Kernel::identity(d);
    m.ma_ = false;
    return m;
  }

  static FieldModel moving_average(Kernel kernel, Innovation law) {
    kernel.check();
    FieldModel m;
    m.d_ = static_cast<int>(kernel.extent.dim());
    m.law_ = law;
    m.kernel_ = std::move(kernel);
    m.ma_ = true;
    return m;
  }

  int dim() const { return d_; }
  Innovation law() const { return law_; }
  const Kernel& kernel() const { return kernel_; }
  bool is_moving_average() const { return ma_; }
  bool gaussian() const { return law_ == Innovation::Gaussian; }

  /// The matching covariance model (innovations are standardized, so the
  /// iid case is rho(0) = 1).
  CovarianceModel covariance() const {
    if (!ma_) return CovarianceModel::iid(d_, 1.0);
    return kernel_autocovariance(kernel_);
  }

 private:
  int d_ = 1;
  Innovation law_ = Innovation::Gaussian;
  Kernel kernel_;
  bool ma_ = false;
};

/// One realization on (0, extent] with its prefix grid.
struct FieldSample {
  MultiIndex extent;
  std::vector<double> cells;  // row-major
  PrefixGrid grid;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;

  double prefix(const MultiIndex& n) const { return grid.prefix(n); }
  double rect_sum(const Rect& v) const { return grid.rect_sum(v); }
};

/// Raw cell buffer for one window.  Each window owns a derived stream
/// keyed by (purpose, replicate, window id) and counts draws by its
/// linear index, so draws never collide and any window can be generated
/// independently of all others (block ensembles use this to avoid
/// whole-grid samples).
inline std::vector<double> field_cells(const FieldModel& model, const MultiIndex& extent,
                                       std::uint64_t seed, std::uint64_t replicate,
                                       RngPurpose purpose = RngPurpose::FieldCells,
                                       std::uint64_t window_id = 0) {
  const std::size_t d = extent.dim();
  for (std::size_t s = 0; s < d; ++s)
    if (extent[s] < 1) throw std::invalid_argument("simulate_field: extent must be positive");
  const CounterRng rng(seed, derive_stream(purpose, replicate, window_id));
  const GridLayout lay(extent);
  std::vector<double> cells(static_cast<std::size_t>(lay.cells()));

  if (!model.is_moving_average()) {
    const std::size_t n = cells.size();
    for (std::size_t i = 0; i < n; ++i) cells[i] = rng.innovation(model.law(), i);
    return cells;
  }

  // Moving average: innovations cover the window plus a kernel-sized halo
  // below, so every requested cell has the full stationary law.
  const Kernel& ker = model.kernel();
  const GridLayout klay(ker.extent);
  MultiIndex ext_extent(d);
  for (std::size_t s = 0; s < d; ++s)
    ext_extent[s] = checked_add(extent[s], ker.extent[s] - 1);
  const GridLayout elay(ext_extent);
  std::vector<double> z(static_cast<std::size_t>(elay.cells()));
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = rng.innovation(model.law(), i);

  // X_j = sum_m a_m Z_{j - (m - 1)}.  Relative to window cell j placed at
  // halo coordinates j + extent - 1, every kernel tap sits at a fixed
  // flat offset, so the convolution is a strided dot product.
  std::vector<std::pair<std::size_t, double>> taps;
  for_each_point(Rect(MultiIndex(d, 0), ker.extent), [&](const MultiIndex& m) {
    const double w = ker.weights[static_cast<std::size_t>(klay.flat(m))];
    if (w == 0.0) return;
    Index off = 0;
    for (std::size_t s = 0; s < d; ++s) off += (ker.extent[s] - m[s]) * elay.stride[s];
    taps.emplace_back(static_cast<std::size_t>(off), w);
  });
  MultiIndex j(d, 1);
  std::size_t out_pos = 0;
  while (true) {
    Index base = 0;
    for (std::size_t s = 0; s < d; ++s) base += (j[s] - 1) * elay.stride[s];
    // The last axis is contiguous in both layouts; sweep it inline.
    const std::size_t run = static_cast<std::size_t>(extent[d - 1]);
    for (std::size_t x = 0; x < run; ++x) {
      double acc = 0.0;
      for (const auto& [off, w] : taps) acc += w * z[static_cast<std::size_t>(base) + x + off];
      cells[out_pos++] = acc;
    }
    std::size_t s = d - 1;
    while (true) {
      if (s == 0) return cells;
      --s;
      if (++j[s] <= extent[s]) break;
      j[s] = 1;
    }
  }
}

inline FieldSample simulate_field(const FieldModel& model, const MultiIndex& extent,
                                  std::uint64_t seed, std::uint64_t replicate) {
  FieldSample sample;
  sample.extent = extent;
  sample.seed = seed;
  sample.replicate = replicate;
  sample.cells = field_cells(model, extent, seed, replicate);
  sample.grid = PrefixGrid::from_cells(extent, sample.cells);
  return sample;
}

}  // namespace arflab
