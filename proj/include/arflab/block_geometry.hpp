#pragma once

// Deterministic blocking combinatorics.
//
// Boundary sequence n_l = sum_{i<=l} (i^alpha + i^beta); blocks
// B_k = (N_{k-1}, N_k] split into a big block H_k (side k_s^alpha) and
// small-block pieces I_k(s); the good set L of blocks inside G_rho; core
// rectangles R_k = (M_k, N_k]; remainder strips and inter-boundary
// corner regions; exact distances between big blocks; and the counting
// bijection psi over L, enumerated region by region.
//
// Everything here is exact 64-bit integer arithmetic with checked
// products (hypothesis-scale exponents overflow long before any grid
// fits in memory, and that must surface as an error, not a wrap).

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "arflab/lattice.hpp"
#include "arflab/params.hpp"

namespace arflab {

/// (n_0, ..., n_lmax) with n_l = sum_{i<=l} (i^alpha + i^beta), exact.
/// On 64-bit overflow reports the integer width the sequence would need.
inline std::vector<Index> boundary_sequence(Index alpha, Index beta, Index l_max) {
  if (!(alpha > beta && beta > 1))
    throw std::invalid_argument("boundary_sequence: integers alpha > beta > 1 required");
  if (l_max < 0) throw std::invalid_argument("boundary_sequence: l_max >= 0 required");
  std::vector<Index> n;
  n.reserve(static_cast<std::size_t>(l_max) + 1);
  n.push_back(0);
  for (Index l = 1; l <= l_max; ++l) {
    try {
      Index step = checked_add(checked_ipow(l, alpha), checked_ipow(l, beta));
      n.push_back(checked_add(n.back(), step));
    } catch (const overflow_error&) {
      long double approx = static_cast<long double>(n.back()) +
                           std::pow(static_cast<long double>(l), static_cast<long double>(alpha)) +
                           std::pow(static_cast<long double>(l), static_cast<long double>(beta));
      int bits = static_cast<int>(std::floor(std::log2(approx))) + 2;
      throw overflow_error("boundary_sequence: n_" + std::to_string(l) +
                           " exceeds 64 bits (needs about " + std::to_string(bits) +
                           "-bit integers)");
    }
  }
  return n;
}

struct BlockDecomposition {
  MultiIndex k;
  Rect block;                     // B_k
  Rect big;                       // H_k
  std::vector<Rect> small_pieces; // I_k(1), ..., I_k(d), disjoint, tiling B_k \ H_k
};

struct BlockDistance {
  Index dist;  // max over axes of the exact coordinate gap between H_i and H_j
  Index m_ij;  // max_{s: i_s != j_s} (max(i_s, j_s) - 1)
};

struct CoreRectangle {
  MultiIndex k;
  MultiIndex j_star;    // per axis, the smallest good block index holding the others at k
  MultiIndex m_corner;  // M_k (block-grid corner, n_{j_star - 1})
  Rect core;            // R_k = (M_k, N_k]
  std::vector<MultiIndex> l_k;        // { i : B_i subset of R_k }, lex order
  std::vector<std::string> violations;  // reported failures of L_k in L / R_k in H
};

struct RemainderRegions {
  std::vector<Rect> strips;  // strip s = (0, N_k^{(s)}]
  struct Corner {
    unsigned axes_mask;  // bit s set <=> s in J
    Rect region;         // I_k^{(J)} at the next boundary N = N_{k+1}
  };
  std::vector<Corner> corners;  // all 2^d - 1 nonempty J, ascending mask
};

struct PsiEnumeration {
  std::vector<MultiIndex> order;         // psi(1), psi(2), ... (members of L)
  std::vector<std::size_t> phi_position; // 1-based position in the unfiltered phi order
};

class BlockGeometry {
 public:
  /// Builds the boundary sequence up to l_cap; all queries must stay
  /// within it.  Immutable afterwards and safe for concurrent reads.
  BlockGeometry(Parameters params, Index l_cap) : p_(params) {
    p_.check();
    n_ = boundary_sequence(p_.alpha, p_.beta, l_cap);
  }

  const Parameters& params() const { return p_; }
  Index l_cap() const { return static_cast<Index>(n_.size()) - 1; }

  Index n(Index l) const {
    if (l < 0 || l > l_cap())
      throw std::out_of_range("BlockGeometry: boundary index " + std::to_string(l) +
                              " beyond cap " + std::to_string(l_cap()));
    return n_[static_cast<std::size_t>(l)];
  }

  const std::vector<Index>& boundary() const { return n_; }

  /// N_k = (n_{k_1}, ..., n_{k_d}).
  MultiIndex corner(const MultiIndex& k) const {
    MultiIndex out(k.dim());
    for (std::size_t s = 0; s < k.dim(); ++s) out[s] = n(k[s]);
    return out;
  }

  /// B_k, H_k and the canonical disjoint tiling of I_k = B_k \ H_k:
  /// piece s spans the small strip in axis s, the H-range in axes < s
  /// and the full block range in axes > s.
  BlockDecomposition decompose_block(const MultiIndex& k) const {
    require_block(k);
    const std::size_t d = k.dim();
    MultiIndex blo(d), bhi(d), hhi(d);
    for (std::size_t s = 0; s < d; ++s) {
      blo[s] = n(k[s] - 1);
      bhi[s] = n(k[s]);
      hhi[s] = checked_add(blo[s], checked_ipow(k[s], p_.alpha));
    }
    BlockDecomposition out;
    out.k = k;
    out.block = Rect(blo, bhi);
    out.big = Rect(blo, hhi);
    for (std::size_t s = 0; s < d; ++s) {
      MultiIndex lo(d), hi(d);
      for (std::size_t t = 0; t < d; ++t) {
        if (t < s) { lo[t] = blo[t]; hi[t] = hhi[t]; }
        else if (t == s) { lo[t] = hhi[t]; hi[t] = bhi[t]; }
        else { lo[t] = blo[t]; hi[t] = bhi[t]; }
      }
      out.small_pieces.emplace_back(lo, hi);
    }
    return out;
  }

  /// Block index of a lattice point (per-axis binary search).
  MultiIndex block_of_point(const MultiIndex& j) const {
    MultiIndex k(j.dim());
    for (std::size_t s = 0; s < j.dim(); ++s) {
      auto it = std::lower_bound(n_.begin(), n_.end(), j[s]);
      if (it == n_.end() || j[s] <= 0)
        throw std::out_of_range("block_of_point: point outside covered range");
      k[s] = static_cast<Index>(it - n_.begin());
    }
    return k;
  }

  /// Extreme-vertex membership test for B_k inside G_rho: for each axis s
  /// the worst point of the block has coordinate n_{k_s - 1} + 1 in axis s
  /// and n_{k_{s'}} elsewhere; the constraint is monotone in the other
  /// coordinates, so this single vertex decides the whole block.
  bool is_good(const MultiIndex& k) const {
    require_block(k);
    const double rho = p_.rho();
    for (std::size_t s = 0; s < k.dim(); ++s) {
      double rhs = 1.0;
      for (std::size_t t = 0; t < k.dim(); ++t)
        if (t != s) rhs *= std::pow(static_cast<double>(n(k[t])), rho);
      if (static_cast<double>(n(k[s] - 1) + 1) < rhs) return false;
    }
    return true;
  }

  /// All good block indices i <= kmax, lexicographic.
  std::vector<MultiIndex> good_block_set(const MultiIndex& kmax) const {
    std::vector<MultiIndex> out;
    for_each_point(Rect(MultiIndex(kmax.dim(), 0), kmax), [&](const MultiIndex& k) {
      if (is_good(k)) out.push_back(k);
    });
    return out;
  }

  /// Largest l in [m, cap] such that the block with index l on one axis
  /// and m on all others is good.  Returns m if even the center fails.
  /// .second is false when the search saturated at cap (true k* larger).
  std::pair<Index, bool> k_star(Index m, Index cap) const {
    if (m < 1) throw std::invalid_argument("k_star: m >= 1 required");
    cap = std::min(cap, l_cap());
    if (cap < m) throw std::out_of_range("k_star: boundary cap below m");
    auto good_arm = [&](Index l) {
      MultiIndex k(static_cast<std::size_t>(p_.d), m);
      k[0] = l;
      return is_good(k);
    };
    if (!good_arm(m)) return {m, true};
    if (good_arm(cap)) return {cap, false};
    Index lo = m, hi = cap;  // good_arm(lo), !good_arm(hi)
    while (hi - lo > 1) {
      Index mid = lo + (hi - lo) / 2;
      (good_arm(mid) ? lo : hi) = mid;
    }
    return {lo, true};
  }

  /// The region-by-region enumeration realizing the counting bijection
  /// psi: for m = 2, 3, ... emit the center (m,...,m) first, then the
  /// arms L_s(m) in lexicographic order, keeping only members of L.
  /// phi_position records each survivor's place in the unfiltered order.
  PsiEnumeration enumerate_psi(Index m_max, std::size_t max_emit,
                               std::optional<MultiIndex> within = std::nullopt) const {
    if (m_max < 2) throw std::invalid_argument("enumerate_psi: m_max >= 2 required");
    const std::size_t d = static_cast<std::size_t>(p_.d);
    PsiEnumeration out;
    std::size_t phi = 0;
    auto fits = [&](const MultiIndex& k) { return !within || leq(k, *within); };
    auto emit = [&](const MultiIndex& k) {
      ++phi;
      if (fits(k) && is_good(k)) {
        out.order.push_back(k);
        out.phi_position.push_back(phi);
      }
      return out.order.size() < max_emit;
    };

    if (d == 1) {
      // One dimension has no wedge constraint: every block is good and
      // the counting order is the natural one.
      for (Index m = 1; m <= m_max; ++m)
        if (!emit(MultiIndex{m})) return out;
      return out;
    }

    for (Index m = 2; m <= m_max; ++m) {
      const MultiIndex center(d, m);
      if (!emit(center)) return out;
      // Iteration cap: nothing beyond max(within) or the emission budget
      // can ever be emitted, so arms are clipped there; k* itself may
      // saturate against the boundary cap for huge regions.
      Index hard_cap = l_cap();
      if (within) {
        Index w = 1;
        for (std::size_t s = 0; s < d; ++s) w = std::max(w, (*within)[s]);
        hard_cap = std::min(hard_cap, w);
      }
      if (max_emit < static_cast<std::size_t>(l_cap()))
        hard_cap = std::min(hard_cap, m + static_cast<Index>(max_emit) + 1);
      const Index arm_hi = k_star(m, hard_cap).first;
      if (arm_hi <= m && !is_good(center)) continue;

      for (std::size_t s = 0; s < d && out.order.size() < max_emit; ++s) {
        // Arm L_s(m): coordinate s pinned at m; axes before s strictly
        // above m (they were covered by earlier arms), axes after s may
        // tie at m.  This covers tied minima in d >= 3 exactly once.
        std::vector<Index> free_lo, free_hi;
        for (std::size_t t = 0; t < d; ++t) {
          if (t == s) continue;
          free_lo.push_back(t < s ? m + 1 : m);
          free_hi.push_back(arm_hi);
        }
        bool any = true;
        for (std::size_t t = 0; t < free_lo.size(); ++t)
          if (free_lo[t] > free_hi[t]) any = false;
        if (!any) continue;

        std::vector<Index> c = free_lo;
        while (true) {
          MultiIndex k(d, m);
          std::size_t f = 0;
          for (std::size_t t = 0; t < d; ++t)
            if (t != s) k[t] = c[f++];
          if (!(k == center) && !emit(k)) return out;
          std::size_t t = c.size();
          bool done = false;
          while (true) {
            if (t == 0) { done = true; break; }
            --t;
            if (++c[t] <= free_hi[t]) break;
            c[t] = free_lo[t];
          }
          if (done) break;
        }
      }
      if (out.order.size() >= max_emit) return out;
    }
    return out;
  }

  /// Good blocks inside (0, kmax] in psi order (the fill order of the
  /// coupled sheet).
  std::vector<MultiIndex> psi_order_within(const MultiIndex& kmax) const {
    Index m_max = 2;
    for (std::size_t s = 0; s < kmax.dim(); ++s) m_max = std::max(m_max, kmax[s]);
    auto full = enumerate_psi(m_max, static_cast<std::size_t>(-1), kmax);
    return full.order;
  }

  /// R_k = (M_k, N_k] where M_k is assembled from the per-axis minimal
  /// good block index (computed on the block grid: H is a union of whole
  /// blocks, so the hyperplane intersections land on block boundaries).
  /// Asserts L_k subset of L and R_k subset of H, reporting violations.
  CoreRectangle core_rectangle(const MultiIndex& k) const {
    if (!is_good(k))
      throw std::invalid_argument("core_rectangle: B_k must be a good block");
    const std::size_t d = k.dim();
    CoreRectangle out;
    out.k = k;
    out.j_star = MultiIndex(d);
    out.m_corner = MultiIndex(d);
    for (std::size_t s = 0; s < d; ++s) {
      // Goodness along this line is an interval (the constraint set is
      // the intersection of one up-set and d-1 down-sets in j).
      Index j = k[s];
      MultiIndex probe = k;
      while (j > 1) {
        probe[s] = j - 1;
        if (!is_good(probe)) break;
        --j;
      }
      out.j_star[s] = j;
      out.m_corner[s] = n(j - 1);
    }
    out.core = Rect(out.m_corner, corner(k));

    MultiIndex lo(d), hi(d);
    for (std::size_t s = 0; s < d; ++s) { lo[s] = out.j_star[s] - 1; hi[s] = k[s]; }
    for_each_point(Rect(lo, hi), [&](const MultiIndex& i) {
      out.l_k.push_back(i);
      if (!is_good(i)) {
        std::string msg = "block in L_k not good: ";
        for (std::size_t s = 0; s < d; ++s) msg += (s ? "," : "") + std::to_string(i[s]);
        out.violations.push_back(msg);
      }
    });
    return out;
  }

  /// The d covering strips (0, N_k^{(s)}] of (0, N_k] \ R_k and the
  /// 2^d - 1 inter-boundary corner regions I_k^{(J)} taken at N = N_{k+1}.
  RemainderRegions remainder_regions(const MultiIndex& k) const {
    const CoreRectangle core = core_rectangle(k);
    const std::size_t d = k.dim();
    const MultiIndex nk = corner(k);
    RemainderRegions out;
    for (std::size_t s = 0; s < d; ++s) {
      MultiIndex hi = nk;
      hi[s] = core.m_corner[s];
      out.strips.emplace_back(Rect(MultiIndex(d, 0), hi));
    }
    for (unsigned mask = 1; mask < (1u << d); ++mask) {
      MultiIndex lo(d), hi(d);
      for (std::size_t s = 0; s < d; ++s) {
        if (mask & (1u << s)) { lo[s] = nk[s]; hi[s] = n(k[s] + 1); }
        else { lo[s] = 0; hi[s] = nk[s]; }
      }
      out.corners.push_back({mask, Rect(lo, hi)});
    }
    return out;
  }

  /// Exact distance between the big blocks H_i and H_j (max over axes of
  /// the coordinate gap, 0 on overlap) together with M_{i,j}; satisfies
  /// dist >= M_{i,j}^beta for i != j.
  BlockDistance block_distance(const MultiIndex& i, const MultiIndex& j) const {
    if (i == j) throw std::invalid_argument("block_distance: requires i != j");
    BlockDistance out{0, 0};
    for (std::size_t s = 0; s < i.dim(); ++s) {
      const Index a1 = n(i[s] - 1) + 1, b1 = checked_add(n(i[s] - 1), checked_ipow(i[s], p_.alpha));
      const Index a2 = n(j[s] - 1) + 1, b2 = checked_add(n(j[s] - 1), checked_ipow(j[s], p_.alpha));
      Index gap = 0;
      if (a2 > b1) gap = a2 - b1;
      else if (a1 > b2) gap = a1 - b2;
      out.dist = std::max(out.dist, gap);
      if (i[s] != j[s]) out.m_ij = std::max(out.m_ij, std::max(i[s], j[s]) - 1);
    }
    return out;
  }

 private:
  void require_block(const MultiIndex& k) const {
    if (static_cast<int>(k.dim()) != p_.d)
      throw std::invalid_argument("block index dimension mismatch");
    for (std::size_t s = 0; s < k.dim(); ++s)
      if (k[s] < 1) throw std::invalid_argument("block index must be >= (1,...,1)");
  }

  Parameters p_;
  std::vector<Index> n_;
};

}  // namespace arflab
