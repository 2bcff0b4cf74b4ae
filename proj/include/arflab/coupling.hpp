#pragma once

// The coupling pipeline, made constructive.
//
// Per good block: u_i = S(H_i), v_i = S(I_i), exact moments lambda_i^2,
// tau_i^2, an independent smoothing draw w_i ~ N(0, tau_i^2),
// xi_i = (u_i + w_i)/sqrt(lambda_i^2 + tau_i^2), the quantile transform
// eta_i = Phi^{-1}(F_i(xi_i)) and its residual e_i.  The core-rectangle
// sum then decomposes exactly as
//   S(R_k) = T1 + T2 + T3 - T4 + T5,
// and the surrogate coupling realizes a Wiener sheet with
// W(B_i) = sigma sqrt(|B_i|) eta_i pinned for every good block in psi
// order, conditional-Gaussian elsewhere, which makes T3 = W(R_k)
// identically.  Error profiles compare S_N with W_N over wedge probes
// and scan the remainder strips and inter-boundary corner regions.

#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "arflab/block_geometry.hpp"
#include "arflab/covariance.hpp"
#include "arflab/distribution.hpp"
#include "arflab/field.hpp"
#include "arflab/parallel.hpp"
#include "arflab/wiener.hpp"

namespace arflab {

struct BlockStat {
  MultiIndex index;
  double u = 0.0;             // S(H_i)
  double v = 0.0;             // S(I_i)
  std::vector<double> v_pieces;
  double lambda2 = 0.0;       // sigma^2(H_i), exact
  double tau2 = 0.0;          // sigma^2(I_i) including cross-piece terms
  double w = 0.0;             // smoothing draw, independent of the field
  double xi = 0.0;
  double eta = 0.0;
  double e = 0.0;             // sqrt(lambda2 + tau2) (xi - eta)
};

/// Per-block distribution functions F_i for the quantile transform:
/// exact Phi for Gaussian pipelines, otherwise clamped empirical CDFs
/// from an ensemble of independent block realizations.
class CdfBank {
 public:
  static CdfBank exact_normal() {
    CdfBank b;
    b.exact_ = true;
    return b;
  }

  static CdfBank empirical(std::map<std::vector<Index>, DistributionFn> by_block) {
    CdfBank b;
    b.by_block_ = std::move(by_block);
    return b;
  }

  const DistributionFn& for_block(const MultiIndex& i) const {
    if (exact_) return normal_;
    auto it = by_block_.find(i.coords());
    if (it == by_block_.end())
      throw std::invalid_argument("CdfBank: no distribution for requested block");
    return it->second;
  }

  bool exact_normal_bank() const { return exact_; }

 private:
  bool exact_ = false;
  DistributionFn normal_ = DistributionFn::standard_normal();
  std::map<std::vector<Index>, DistributionFn> by_block_;
};

/// Simulates R independent realizations of xi_i per block (each block is
/// generated on its own halo window, which is exact for the marginal law
/// and far cheaper than whole-grid fields) and freezes their empirical
/// CDFs.  Gaussian innovations short-circuit to the exact-normal bank.
inline CdfBank build_cdf_bank(const FieldModel& model, const BlockGeometry& geometry,
                              const CovarianceModel& cov, std::span<const MultiIndex> blocks,
                              std::size_t ensemble, std::uint64_t seed, unsigned threads = 0) {
  if (model.gaussian()) return CdfBank::exact_normal();
  if (ensemble < 2) throw std::invalid_argument("build_cdf_bank: ensemble size >= 2 required");

  std::map<std::vector<Index>, DistributionFn> bank;
  std::vector<std::vector<double>> draws(blocks.size(),
                                         std::vector<double>(ensemble, 0.0));
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto dec = geometry.decompose_block(blocks[b]);
    const double lambda2 = cov.exact_sigma2(dec.big);
    const double tau2 = cov.exact_sigma2(std::span<const Rect>(dec.small_pieces));
    const double norm = std::sqrt(lambda2 + tau2);
    MultiIndex window(dec.big.dim());
    for (std::size_t s = 0; s < window.dim(); ++s) window[s] = dec.big.side(s);
    auto& out = draws[b];
    parallel_for(
        ensemble,
        [&](std::size_t r) {
          auto cells = field_cells(model, window, seed, r, RngPurpose::CdfEnsembleCells,
                                   static_cast<std::uint64_t>(b));
          double u = 0.0, comp = 0.0;
          for (double c : cells) {
            const double t = u + c;
            comp += (std::abs(u) >= std::abs(c)) ? (u - t) + c : (c - t) + u;
            u = t;
          }
          u += comp;
          const CounterRng smooth(seed,
                                  derive_stream(RngPurpose::CdfEnsembleSmoothing, r,
                                                static_cast<std::uint64_t>(b)));
          const double w = std::sqrt(tau2) * smooth.gaussian(0);
          out[r] = (u + w) / norm;
        },
        threads);
    bank.emplace(blocks[b].coords(), DistributionFn::empirical(std::move(out)));
  }
  return CdfBank::empirical(std::move(bank));
}

/// Computes every block statistic for the given good blocks (canonical
/// lex order expected; the smoothing counter is the list position, so
/// results merge deterministically by block index).
inline std::vector<BlockStat> compute_block_stats(const FieldSample& sample,
                                                  const BlockGeometry& geometry,
                                                  const CovarianceModel& cov,
                                                  const CdfBank& bank,
                                                  std::span<const MultiIndex> blocks,
                                                  std::uint64_t seed, std::uint64_t replicate) {
  if (cov.dim() != static_cast<int>(sample.extent.dim()))
    throw std::invalid_argument("compute_block_stats: covariance model dimension mismatch");
  const CounterRng smooth(seed, derive_stream(RngPurpose::Smoothing, replicate));
  std::vector<BlockStat> stats(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto dec = geometry.decompose_block(blocks[b]);
    BlockStat st;
    st.index = blocks[b];
    st.u = sample.rect_sum(dec.big);
    for (const auto& piece : dec.small_pieces) {
      st.v_pieces.push_back(sample.rect_sum(piece));
      st.v += st.v_pieces.back();
    }
    st.lambda2 = cov.exact_sigma2(dec.big);
    st.tau2 = cov.exact_sigma2(std::span<const Rect>(dec.small_pieces));
    st.w = std::sqrt(st.tau2) * smooth.gaussian(static_cast<std::uint64_t>(b));
    const double norm = std::sqrt(st.lambda2 + st.tau2);
    st.xi = (st.u + st.w) / norm;
    const auto qt = quantile_transform(st.xi, bank.for_block(blocks[b]));
    st.eta = qt.eta;
    st.e = norm * qt.e_scale_free;
    stats[b] = std::move(st);
  }
  return stats;
}

struct DecompositionTerms {
  MultiIndex k;
  double t1 = 0.0;  // sum e_i
  double t2 = 0.0;  // sum sqrt|B_i| (sqrt((lambda^2+tau^2)/|B_i|) - sigma) eta_i
  double t3 = 0.0;  // sum sigma sqrt|B_i| eta_i
  double t4 = 0.0;  // sum w_i
  double t5 = 0.0;  // sum v_i
  double s_rk = 0.0;  // S(R_k) from the field
  double max_term_magnitude = 0.0;

  double identity_residual() const { return (t1 + t2 + t3 - t4 + t5) - s_rk; }
  double identity_scale() const {
    double m = std::max(1.0, std::abs(s_rk));
    return std::max({m, std::abs(t1), std::abs(t2), std::abs(t3), std::abs(t4),
                     std::abs(t5)});
  }
};

namespace detail {

inline const BlockStat& stat_for(const std::vector<BlockStat>& stats,
                                 std::span<const MultiIndex> order, const MultiIndex& i) {
  for (std::size_t b = 0; b < order.size(); ++b)
    if (order[b] == i) return stats[b];
  throw std::invalid_argument("block stats missing requested index");
}

}  // namespace detail

/// The five sums of the core decomposition over L_k; the algebraic
/// identity T1 + T2 + T3 - T4 + T5 = S(R_k) holds to floating point.
inline DecompositionTerms decompose_core(const std::vector<BlockStat>& stats,
                                         std::span<const MultiIndex> order,
                                         const CoreRectangle& core,
                                         const BlockGeometry& geometry, double sigma,
                                         const FieldSample& sample) {
  if (core.l_k.empty()) throw std::invalid_argument("decompose_core: empty L_k");
  DecompositionTerms t;
  t.k = core.k;
  for (const auto& i : core.l_k) {
    const BlockStat& st = detail::stat_for(stats, order, i);
    const double bi = static_cast<double>(geometry.decompose_block(i).block.volume());
    const double root_bi = std::sqrt(bi);
    t.t1 += st.e;
    t.t2 += root_bi * (std::sqrt((st.lambda2 + st.tau2) / bi) - sigma) * st.eta;
    t.t3 += sigma * root_bi * st.eta;
    t.t4 += st.w;
    t.t5 += st.v;
    t.max_term_magnitude =
        std::max({t.max_term_magnitude, std::abs(st.e), std::abs(st.w), std::abs(st.v),
                  sigma * root_bi * std::abs(st.eta)});
  }
  t.s_rk = sample.rect_sum(core.core);
  return t;
}

/// Surrogate coupling: pins W(B_i) = sigma sqrt(|B_i|) eta_i for every
/// supplied block (psi order), conditional Gaussian fill elsewhere.
inline WienerSheet build_coupled_sheet(const std::vector<BlockStat>& stats,
                                       std::span<const MultiIndex> order,
                                       std::span<const MultiIndex> psi_order,
                                       const BlockGeometry& geometry, double sigma,
                                       const MultiIndex& extent, std::uint64_t seed,
                                       std::uint64_t replicate) {
  std::vector<std::pair<Rect, double>> assignments;
  assignments.reserve(psi_order.size());
  for (const auto& i : psi_order) {
    const BlockStat& st = detail::stat_for(stats, order, i);
    if (!std::isfinite(st.eta))
      throw std::invalid_argument("build_coupled_sheet: non-finite eta");
    const Rect block = geometry.decompose_block(i).block;
    const double target =
        sigma * std::sqrt(static_cast<double>(block.volume())) * st.eta;
    assignments.emplace_back(block, target);
  }
  return conditional_fill(assignments, sigma * sigma, extent, seed, replicate);
}

struct ProfilePoint {
  MultiIndex n;
  Index vol = 0;      // [N]
  double s = 0.0;     // S_N
  double w = 0.0;     // W_N
  double gap = 0.0;   // |S_N - W_N|
  double ratio = 0.0; // gap / [N]^{1/2 - eps}
};

struct RemainderMaxima {
  MultiIndex k;
  Index n_vol = 0;                 // [N_k]
  std::vector<double> d_s;         // D_s(N_k) = max_{n <= N^{(s)}} |S_n|
  std::vector<double> d_hat_s;     // same on the sheet
  std::vector<double> m_corner;    // M_k^{(J)} over nonempty J (ascending mask)
  std::vector<double> m_hat_corner;
};

struct CouplingProfile {
  double tau = 0.0;
  double epsilon = 0.0;
  std::vector<ProfilePoint> points;
  std::vector<RemainderMaxima> remainders;
};

/// Deterministic probe set: block corners N_k inside G_tau within the
/// extent, plus a geometric ladder of interior diagonal and 3:1 aspect
/// points of G_tau.
inline std::vector<MultiIndex> probe_points(const BlockGeometry& geometry,
                                            const MultiIndex& extent, double tau) {
  const std::size_t d = extent.dim();
  std::vector<MultiIndex> probes;
  // Block corners.
  MultiIndex kmax(d);
  for (std::size_t s = 0; s < d; ++s) {
    Index k = 0;
    while (k + 1 <= geometry.l_cap() && geometry.n(k + 1) <= extent[s]) ++k;
    kmax[s] = k;
  }
  bool all_positive = true;
  for (std::size_t s = 0; s < d; ++s) all_positive = all_positive && kmax[s] >= 1;
  if (all_positive) {
    for_each_point(Rect(MultiIndex(d, 0), kmax), [&](const MultiIndex& k) {
      MultiIndex nk = geometry.corner(k);
      if (g_tau_contains(nk, tau)) probes.push_back(nk);
    });
  }
  // Interior ladder: diagonal plus one flattened aspect per axis.
  Index max_side = 1;
  for (std::size_t s = 0; s < d; ++s) max_side = std::max(max_side, extent[s]);
  for (double f = 4.0; f <= static_cast<double>(max_side); f *= 1.5) {
    for (std::size_t aspect = 0; aspect <= d; ++aspect) {
      MultiIndex n(d);
      bool ok = true;
      for (std::size_t s = 0; s < d; ++s) {
        double val = f;
        if (aspect < d && s == aspect) val = std::max(1.0, f / 3.0);
        n[s] = static_cast<Index>(std::llround(val));
        ok = ok && n[s] >= 1 && n[s] <= extent[s];
      }
      if (ok && g_tau_contains(n, tau)) probes.push_back(n);
    }
  }
  std::sort(probes.begin(), probes.end(),
            [](const MultiIndex& a, const MultiIndex& b) { return lex_less(a, b); });
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
  return probes;
}

/// Gaps and normalized ratios at the probe points plus the remainder
/// maxima (strip scans D_s, D^ and inter-boundary corner scans M^{(J)},
/// M^^{(J)}) at each requested scale.
inline CouplingProfile coupling_error_profile(const FieldSample& sample,
                                              const WienerSheet& sheet,
                                              const BlockGeometry& geometry,
                                              std::span<const MultiIndex> scales,
                                              double tau, double epsilon,
                                              std::span<const MultiIndex> probes) {
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::invalid_argument("coupling_error_profile: epsilon in (0, 1/2) required");
  if (probes.empty()) throw std::invalid_argument("coupling_error_profile: empty probe set");
  CouplingProfile profile;
  profile.tau = tau;
  profile.epsilon = epsilon;

  for (const auto& n : probes) {
    if (!g_tau_contains(n, tau))
      throw std::invalid_argument("coupling_error_profile: probe outside G_tau");
    ProfilePoint pt;
    pt.n = n;
    pt.vol = volume(n);
    pt.s = sample.prefix(n);
    pt.w = sheet.prefix(n);
    pt.gap = std::abs(pt.s - pt.w);
    pt.ratio = pt.gap / std::pow(static_cast<double>(pt.vol), 0.5 - epsilon);
    profile.points.push_back(pt);
  }

  for (const auto& k : scales) {
    const auto core = geometry.core_rectangle(k);
    const std::size_t d = k.dim();
    RemainderMaxima rem;
    rem.k = k;
    rem.n_vol = volume(geometry.corner(k));
    for (std::size_t s = 0; s < d; ++s) {
      MultiIndex cap = geometry.corner(k);
      cap[s] = core.m_corner[s];
      double dmax = 0.0, dhat = 0.0;
      for_each_point(Rect(MultiIndex(d, 0), cap), [&](const MultiIndex& n) {
        dmax = std::max(dmax, std::abs(sample.prefix(n)));
        dhat = std::max(dhat, std::abs(sheet.prefix(n)));
      });
      rem.d_s.push_back(dmax);
      rem.d_hat_s.push_back(dhat);
    }
    const auto regions = geometry.remainder_regions(k);
    for (const auto& corner : regions.corners) {
      // Scan the J-coordinates over (n_{k_s}, n_{k_s + 1}]; the others
      // stay pinned at (0, n_{k_s}].
      MultiIndex scan_lo(d), scan_hi(d);
      for (std::size_t s = 0; s < d; ++s) {
        if (corner.axes_mask & (1u << s)) {
          scan_lo[s] = corner.region.lo[s];
          scan_hi[s] = corner.region.hi[s];
        } else {
          scan_lo[s] = 0;
          scan_hi[s] = 1;  // single dummy step
        }
      }
      double mmax = 0.0, mhat = 0.0;
      for_each_point(Rect(scan_lo, scan_hi), [&](const MultiIndex& choice) {
        Rect r = corner.region;
        for (std::size_t s = 0; s < d; ++s)
          if (corner.axes_mask & (1u << s)) r.hi[s] = choice[s];
        if (r.empty()) return;
        mmax = std::max(mmax, std::abs(sample.rect_sum(r)));
        mhat = std::max(mhat, std::abs(sheet.rect_sum(r)));
      });
      rem.m_corner.push_back(mmax);
      rem.m_hat_corner.push_back(mhat);
    }
    profile.remainders.push_back(std::move(rem));
  }
  return profile;
}

}  // namespace arflab
