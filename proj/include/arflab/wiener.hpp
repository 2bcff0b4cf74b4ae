#pragma once

// Discrete Wiener sheet: independent N(0, sigma^2) increments per unit
// cell, W over any rectangle via the prefix grid.  conditional_fill pins
// prescribed sums on disjoint rectangles while keeping the exact
// conditional Gaussian law inside them and untouched increments outside.

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "arflab/field.hpp"
#include "arflab/lattice.hpp"
#include "arflab/prefix_grid.hpp"
#include "arflab/rng.hpp"

namespace arflab {

struct WienerSheet {
  double sigma2 = 1.0;
  MultiIndex extent;
  std::vector<double> cells;
  PrefixGrid grid;

  double prefix(const MultiIndex& n) const { return grid.prefix(n); }
  double rect_sum(const Rect& v) const { return grid.rect_sum(v); }
};

namespace detail {

inline std::vector<double> wiener_cells(double sigma2, const MultiIndex& extent,
                                        std::uint64_t seed, std::uint64_t replicate) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("wiener sheet: sigma2 > 0 required");
  const GridLayout lay(extent);
  const CounterRng rng(seed, derive_stream(RngPurpose::WienerCells, replicate));
  const double sd = std::sqrt(sigma2);
  std::vector<double> cells(static_cast<std::size_t>(lay.cells()));
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = sd * rng.gaussian(i);
  return cells;
}

}  // namespace detail

inline WienerSheet simulate_wiener_sheet(double sigma2, const MultiIndex& extent,
                                         std::uint64_t seed, std::uint64_t replicate) {
  WienerSheet w;
  w.sigma2 = sigma2;
  w.extent = extent;
  w.cells = detail::wiener_cells(sigma2, extent, seed, replicate);
  w.grid = PrefixGrid::from_cells(extent, w.cells);
  return w;
}

/// Draws the same increments as simulate_wiener_sheet (same stream
/// discipline), then inside each assigned rectangle B with prescribed sum
/// s shifts every cell by (s - sum_B G)/|B|.  The resulting sheet has
/// exactly the prescribed rectangle sums and, given them, the correct
/// conditional Gaussian law; cells outside assignments are untouched.
inline WienerSheet conditional_fill(std::span<const std::pair<Rect, double>> assignments,
                                    double sigma2, const MultiIndex& extent,
                                    std::uint64_t seed, std::uint64_t replicate) {
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const Rect& a = assignments[i].first;
    if (!Rect(MultiIndex(extent.dim(), 0), extent).contains_rect(a))
      throw std::invalid_argument("conditional_fill: assigned rectangle outside extent");
    if (a.empty())
      throw std::invalid_argument("conditional_fill: degenerate assigned rectangle");
    for (std::size_t j = i + 1; j < assignments.size(); ++j)
      if (!a.disjoint_from(assignments[j].first))
        throw std::invalid_argument("conditional_fill: overlapping assignments");
  }
  WienerSheet w;
  w.sigma2 = sigma2;
  w.extent = extent;
  w.cells = detail::wiener_cells(sigma2, extent, seed, replicate);
  const GridLayout lay(extent);
  for (const auto& [rect, target] : assignments) {
    // Neumaier-compensated block sum keeps the pinned value tight.
    double sum = 0.0, comp = 0.0;
    for_each_point(rect, [&](const MultiIndex& j) {
      const double v = w.cells[static_cast<std::size_t>(lay.flat(j))];
      const double t = sum + v;
      comp += (std::abs(sum) >= std::abs(v)) ? (sum - t) + v : (v - t) + sum;
      sum = t;
    });
    sum += comp;
    const double shift = (target - sum) / static_cast<double>(rect.volume());
    for_each_point(rect, [&](const MultiIndex& j) {
      w.cells[static_cast<std::size_t>(lay.flat(j))] += shift;
    });
  }
  w.grid = PrefixGrid::from_cells(extent, w.cells);
  return w;
}

/// Identity coupling for iid Gaussian fields: the sheet's increments are
/// the field's own cells, so S_N and W_N agree bit for bit.
inline WienerSheet identity_sheet(const FieldSample& sample, double sigma2) {
  WienerSheet w;
  w.sigma2 = sigma2;
  w.extent = sample.extent;
  w.cells = sample.cells;
  w.grid = PrefixGrid::from_cells(w.extent, w.cells);
  return w;
}

}  // namespace arflab
