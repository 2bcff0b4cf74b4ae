#pragma once

// d-dimensional summed-area table over a lattice box (0, extent].
//
// cumulative(N) = S_N = sum_{j <= N} cell(j), so the sum over any
// half-open rectangle (a, b] costs 2^d corner lookups by
// inclusion-exclusion.  Cells are stored row-major with the last axis
// contiguous; the table is built by d sequential axis-wise scans, which
// is numerically the same recurrence as the classic integral image.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "arflab/lattice.hpp"

namespace arflab {

/// Row-major layout over a box of given extent (last axis contiguous).
struct GridLayout {
  MultiIndex extent;
  std::vector<Index> stride;

  explicit GridLayout(const MultiIndex& e) : extent(e), stride(e.dim(), 1) {
    for (std::size_t s = e.dim(); s-- > 1;) stride[s - 1] = stride[s] * e[s];
  }

  Index cells() const {
    Index total = 1;
    for (std::size_t s = 0; s < extent.dim(); ++s) total = checked_mul(total, extent[s]);
    return total;
  }

  /// Flat offset of a 1-based lattice point (1 <= j_s <= extent_s).
  Index flat(const MultiIndex& j) const {
    Index off = 0;
    for (std::size_t s = 0; s < extent.dim(); ++s) off += (j[s] - 1) * stride[s];
    return off;
  }
};

class PrefixGrid {
 public:
  PrefixGrid() = default;

  /// Builds the cumulative grid from raw cell values (row-major, last
  /// axis fastest).  Throws on non-finite cells or extent overflow.
  static PrefixGrid from_cells(const MultiIndex& extent, std::vector<double> cells) {
    PrefixGrid g;
    g.extent_ = extent;
    Index total = 1;
    for (std::size_t s = 0; s < extent.dim(); ++s) {
      if (extent[s] <= 0)
        throw std::invalid_argument("PrefixGrid: extent must be positive in every axis");
      total = checked_mul(total, extent[s]);
    }
    if (static_cast<std::size_t>(total) != cells.size())
      throw std::invalid_argument("PrefixGrid: cell count does not match extent");
    for (double v : cells)
      if (!std::isfinite(v)) throw std::invalid_argument("PrefixGrid: non-finite cell value");

    g.stride_.assign(extent.dim(), 1);
    for (std::size_t s = extent.dim(); s-- > 1;)
      g.stride_[s - 1] = g.stride_[s] * extent[s];
    g.cum_ = std::move(cells);

    // One running-sum pass per axis turns cells into cumulative sums.
    const std::size_t d = extent.dim();
    for (std::size_t s = 0; s < d; ++s) {
      const Index stride = g.stride_[s];
      const Index len = extent[s];
      const Index lines = total / len;
      for (Index line = 0; line < lines; ++line) {
        // Decompose the line id into the base offset of its first element.
        Index rem = line, base = 0;
        for (std::size_t t = 0; t < d; ++t) {
          if (t == s) continue;
          Index e = extent[t];
          base += (rem % e) * g.stride_[t];
          rem /= e;
        }
        double acc = 0.0;
        for (Index x = 0; x < len; ++x) {
          acc += g.cum_[base + x * stride];
          g.cum_[base + x * stride] = acc;
        }
      }
    }
    return g;
  }

  const MultiIndex& extent() const { return extent_; }
  std::size_t dim() const { return extent_.dim(); }
  Index cell_count() const { return static_cast<Index>(cum_.size()); }

  /// S_N for N <= extent; any coordinate equal to 0 gives 0.
  double prefix(const MultiIndex& n) const {
    Index off = 0;
    for (std::size_t s = 0; s < dim(); ++s) {
      if (n[s] == 0) return 0.0;
      if (n[s] < 0 || n[s] > extent_[s])
        throw std::out_of_range("PrefixGrid::prefix: index outside grid");
      off += (n[s] - 1) * stride_[s];
    }
    return cum_[off];
  }

  /// S(V) over the half-open rectangle V = (lo, hi], hi <= extent, by
  /// 2^d-term inclusion-exclusion on the cumulative corners.
  double rect_sum(const Rect& v) const {
    if (v.dim() != dim())
      throw std::invalid_argument("rect_sum: dimension mismatch");
    for (std::size_t s = 0; s < dim(); ++s) {
      if (v.lo[s] < 0 || v.hi[s] > extent_[s])
        throw std::out_of_range("rect_sum: rectangle exceeds grid extent");
    }
    if (v.empty()) return 0.0;
    const std::size_t d = dim();
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      Index off = 0;
      bool zero = false;
      int bits = 0;
      for (std::size_t s = 0; s < d; ++s) {
        const bool low = mask & (1u << s);
        const Index c = low ? v.lo[s] : v.hi[s];
        if (low) ++bits;
        if (c == 0) { zero = true; break; }
        off += (c - 1) * stride_[s];
      }
      if (zero) continue;
      total += (bits & 1) ? -cum_[off] : cum_[off];
    }
    return total;
  }

 private:
  MultiIndex extent_;
  std::vector<Index> stride_;
  std::vector<double> cum_;
};

/// Direct nested-loop sum over a rectangle of raw cells (row-major).
/// This is the independent oracle for rect_sum; O(|V|) on purpose.
inline double direct_rect_sum(const MultiIndex& extent, const std::vector<double>& cells,
                              const Rect& v) {
  const std::size_t d = extent.dim();
  std::vector<Index> stride(d, 1);
  for (std::size_t s = d; s-- > 1;) stride[s - 1] = stride[s] * extent[s];
  if (v.empty()) return 0.0;
  std::vector<Index> j(d);
  for (std::size_t s = 0; s < d; ++s) j[s] = v.lo[s] + 1;
  double acc = 0.0;
  while (true) {
    Index off = 0;
    for (std::size_t s = 0; s < d; ++s) off += (j[s] - 1) * stride[s];
    acc += cells[off];
    std::size_t s = d - 1;
    while (true) {
      if (++j[s] <= v.hi[s]) break;
      j[s] = v.lo[s] + 1;
      if (s == 0) return acc;
      --s;
    }
  }
}


}  // namespace arflab
