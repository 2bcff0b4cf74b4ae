#pragma once

// Exact second-moment calculus for stationary nonnegative covariance
// models.
//
// Everything reduces to cross-rectangle sums sum_{j in A, k in B}
// rho(j - k), organized by the difference vector: the number of pairs at
// a given difference factors across axes into 1-d interval overlap
// counts.  Product-form models collapse to one short sum per axis;
// finite-support models iterate their support; the power model walks the
// difference box directly.  sigma^2(V) is the self-cross case, which
// reproduces the triangular-weight expansion
// sigma^2((m,n]) = sum_{|i_s| < n_s - m_s} prod_s (n_s - m_s - |i_s|) rho(i).

#include <cmath>
#include <cstdlib>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "arflab/block_geometry.hpp"
#include "arflab/lattice.hpp"

namespace arflab {

namespace detail {

/// Hurwitz zeta(s, a) = sum_{k>=0} (a+k)^{-s} for s > 1, a > 0, by
/// Euler-Maclaurin with a certified first-omitted-term bound well below
/// 1e-13 relative for the arguments used here.
inline double hurwitz_zeta(double s, double a) {
  if (!(s > 1.0) || !(a > 0.0))
    throw std::invalid_argument("hurwitz_zeta: needs s > 1, a > 0");
  constexpr int kDirect = 24;
  double sum = 0.0;
  for (int k = 0; k < kDirect; ++k) sum += std::pow(a + k, -s);
  const double x = a + kDirect;
  sum += std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
  // B_2r / (2r)! for 2r = 2, 4, ..., 12.
  static const double kBernFact[] = {1.0 / 12, -1.0 / 720, 1.0 / 30240, -1.0 / 1209600,
                                     1.0 / 47900160, -691.0 / 1307674368000.0};
  double rising = s;  // s (s+1) ... (s + 2r - 2)
  double xpow = std::pow(x, -s - 1.0);
  for (int r = 0; r < 6; ++r) {
    sum += kBernFact[r] * rising * xpow;
    rising *= (s + 2 * r + 1) * (s + 2 * r + 2);
    xpow /= x * x;
  }
  return sum;
}

}  // namespace detail

enum class CovKind { Iid, ProductGeometric, Power, KernelInduced };

class CovarianceModel {
 public:
  static CovarianceModel iid(int d, double sigma0sq) {
    require(d >= 1 && sigma0sq > 0.0, "iid model: d >= 1, sigma0sq > 0");
    CovarianceModel m;
    m.kind_ = CovKind::Iid;
    m.d_ = d;
    m.sigma0sq_ = sigma0sq;
    return m;
  }

  /// rho(i) = sigma0sq * prod_s a^{|i_s|}; satisfies (C2) with lambda = -ln a.
  static CovarianceModel product_geometric(int d, double sigma0sq, double a) {
    require(d >= 1 && sigma0sq > 0.0 && a >= 0.0 && a < 1.0,
            "product_geometric model: d >= 1, sigma0sq > 0, 0 <= a < 1");
    CovarianceModel m;
    m.kind_ = CovKind::ProductGeometric;
    m.d_ = d;
    m.sigma0sq_ = sigma0sq;
    m.a_ = a;
    return m;
  }

  /// rho(i) = c (1 + ||i||)^{-p}; satisfies (C2') with nu = p - d.  The
  /// susceptibility diverges for p <= d, so those models are rejected.
  static CovarianceModel power(int d, double c, double p) {
    require(d >= 1 && c > 0.0, "power model: d >= 1, c > 0");
    if (!(p > d))
      throw std::invalid_argument("power model: divergent susceptibility (requires p > d)");
    CovarianceModel m;
    m.kind_ = CovKind::Power;
    m.d_ = d;
    m.c_ = c;
    m.p_ = p;
    return m;
  }

  /// Tabulated rho on the offset box prod_s [-(e_s - 1), e_s - 1]
  /// (row-major over the full box).  Used for kernel-induced covariances.
  static CovarianceModel from_autocovariance(int d, const MultiIndex& half_extent,
                                             std::vector<double> table) {
    require(d >= 1 && static_cast<int>(half_extent.dim()) == d,
            "autocovariance table: dimension mismatch");
    CovarianceModel m;
    m.kind_ = CovKind::KernelInduced;
    m.d_ = d;
    m.half_ = half_extent;
    Index total = 1;
    for (std::size_t s = 0; s < half_extent.dim(); ++s) {
      require(half_extent[s] >= 0, "autocovariance table: negative extent");
      total = checked_mul(total, 2 * half_extent[s] + 1);
    }
    require(static_cast<std::size_t>(total) == table.size(),
            "autocovariance table: size mismatch");
    double sum = 0.0;
    for (double v : table) {
      require(v >= 0.0, "autocovariance table: association needs rho >= 0");
      sum += v;
    }
    m.table_ = std::move(table);
    m.table_sum_ = sum;
    m.sigma0sq_ = m.rho_table(MultiIndex(static_cast<std::size_t>(d), 0));
    require(m.sigma0sq_ > 0.0, "autocovariance table: rho(0) must be positive");
    // Symmetry rho(i) = rho(-i).
    for_each_point(Rect(MultiIndex(d, 0), MultiIndex([&] {
                     std::vector<Index> e;
                     for (std::size_t s = 0; s < half_extent.dim(); ++s)
                       e.push_back(2 * half_extent[s] + 1);
                     return e;
                   }())),
                   [&](const MultiIndex& q) {
                     MultiIndex i(q.dim()), neg(q.dim());
                     for (std::size_t s = 0; s < q.dim(); ++s) {
                       i[s] = q[s] - 1 - half_extent[s];
                       neg[s] = -i[s];
                     }
                     require(std::abs(m.rho_table(i) - m.rho_table(neg)) <=
                                 1e-12 * (1.0 + m.rho_table(i)),
                             "autocovariance table: rho(i) != rho(-i)");
                   });
    return m;
  }

  CovKind kind() const { return kind_; }
  int dim() const { return d_; }
  double rho0() const {
    switch (kind_) {
      case CovKind::Power: return c_;
      default: return sigma0sq_;
    }
  }

  /// Exponential decay rate of u(n) where one exists: -ln a for the
  /// geometric product, +infinity for finitely supported models, NaN for
  /// the power model (which only satisfies (C2')).
  double decay_rate() const {
    switch (kind_) {
      case CovKind::Iid:
      case CovKind::KernelInduced:
        return std::numeric_limits<double>::infinity();
      case CovKind::ProductGeometric:
        return a_ == 0.0 ? std::numeric_limits<double>::infinity() : -std::log(a_);
      case CovKind::Power:
        return std::numeric_limits<double>::quiet_NaN();
    }
    return 0.0;
  }

  /// Power decay rate nu of (C2'), where meaningful.
  double power_rate() const {
    return kind_ == CovKind::Power ? p_ - d_ : std::numeric_limits<double>::quiet_NaN();
  }

  double rho(const MultiIndex& offset) const {
    switch (kind_) {
      case CovKind::Iid:
        return sup_norm(offset) == 0 ? sigma0sq_ : 0.0;
      case CovKind::ProductGeometric: {
        double v = sigma0sq_;
        for (std::size_t s = 0; s < offset.dim(); ++s)
          v *= std::pow(a_, static_cast<double>(std::abs(offset[s])));
        return v;
      }
      case CovKind::Power:
        return c_ * std::pow(1.0 + static_cast<double>(sup_norm(offset)), -p_);
      case CovKind::KernelInduced:
        return rho_table(offset);
    }
    return 0.0;
  }

  /// sigma^2 = sum_{i in Z^d} rho(i).  Closed form except for the power
  /// model, whose shell sum is truncated with a certified tail <= 1e-12.
  double sigma2() const {
    switch (kind_) {
      case CovKind::Iid: return sigma0sq_;
      case CovKind::ProductGeometric:
        return sigma0sq_ * std::pow((1.0 + a_) / (1.0 - a_), d_);
      case CovKind::KernelInduced: return table_sum_;
      case CovKind::Power: return u(0);
    }
    return 0.0;
  }

  /// u(n) = sum_{||i|| >= n} rho(i), non-increasing in n.
  double u(Index n) const {
    if (n < 0) throw std::invalid_argument("u(n): n >= 0 required");
    switch (kind_) {
      case CovKind::Iid:
        return n == 0 ? sigma0sq_ : 0.0;
      case CovKind::ProductGeometric: {
        if (n == 0) return sigma2();
        // sum_{||i|| <= n-1} rho(i) = sigma0sq * g(n-1)^d with
        // g(m) = sum_{|t| <= m} a^|t|.
        double g = 1.0 + 2.0 * (a_ - std::pow(a_, static_cast<double>(n))) / (1.0 - a_);
        if (a_ == 0.0) g = 1.0;
        return std::max(0.0, sigma2() - sigma0sq_ * std::pow(g, d_));
      }
      case CovKind::KernelInduced: {
        double total = 0.0;
        for_each_offset([&](const MultiIndex& i, double v) {
          if (sup_norm(i) >= n) total += v;
        });
        return total;
      }
      case CovKind::Power: {
        // Shell m >= 1 holds (2m+1)^d - (2m-1)^d sites at sup-norm
        // distance m.  With q = 1 + m the shell count expands as a
        // polynomial sum_j w_j q^j, so the whole tail is a finite
        // combination of Hurwitz zetas -- exact, no truncation.
        double total = (n == 0) ? c_ : 0.0;  // the m = 0 center
        const Index m0 = std::max<Index>(n, 1);
        const double q0 = static_cast<double>(m0) + 1.0;
        double binom = 1.0;  // C(d, j)
        for (int j = 0; j <= d_; ++j) {
          const double w =
              binom * std::pow(2.0, j) *
              (std::pow(-1.0, d_ - j) - std::pow(-3.0, d_ - j));
          if (w != 0.0) total += c_ * w * detail::hurwitz_zeta(p_ - j, q0);
          binom = binom * (d_ - j) / (j + 1.0);
        }
        return total;
      }
    }
    return 0.0;
  }

  /// Exact cross covariance sum_{j in A, k in B} rho(j - k).
  double cross_covariance(const Rect& A, const Rect& B) const {
    require_dim(A);
    require_dim(B);
    if (A.empty() || B.empty()) return 0.0;
    switch (kind_) {
      case CovKind::Iid: {
        double v = sigma0sq_;
        for (std::size_t s = 0; s < A.dim(); ++s)
          v *= static_cast<double>(overlap_count(A, B, s, 0));
        return v;
      }
      case CovKind::ProductGeometric: {
        double v = sigma0sq_;
        for (std::size_t s = 0; s < A.dim(); ++s) {
          double factor = 0.0;
          const Index t_lo = A.lo[s] + 1 - B.hi[s], t_hi = A.hi[s] - B.lo[s] - 1;
          for (Index t = t_lo; t <= t_hi; ++t)
            factor += static_cast<double>(overlap_count(A, B, s, t)) *
                      std::pow(a_, static_cast<double>(std::abs(t)));
          v *= factor;
        }
        return v;
      }
      case CovKind::KernelInduced: {
        double total = 0.0;
        for_each_offset([&](const MultiIndex& i, double v) {
          if (v == 0.0) return;
          double pairs = 1.0;
          for (std::size_t s = 0; s < A.dim(); ++s)
            pairs *= static_cast<double>(overlap_count(A, B, s, i[s]));
          total += v * pairs;
        });
        return total;
      }
      case CovKind::Power: {
        // Walk the achievable difference box.
        const std::size_t d = A.dim();
        MultiIndex lo(d), hi(d);
        for (std::size_t s = 0; s < d; ++s) {
          lo[s] = A.lo[s] + 1 - B.hi[s];
          hi[s] = A.hi[s] - B.lo[s] - 1;
          if (lo[s] > hi[s]) return 0.0;
        }
        double total = 0.0;
        MultiIndex i = lo;
        while (true) {
          double pairs = 1.0;
          for (std::size_t s = 0; s < d; ++s)
            pairs *= static_cast<double>(overlap_count(A, B, s, i[s]));
          total += rho(i) * pairs;
          std::size_t s = d - 1;
          while (true) {
            if (++i[s] <= hi[s]) break;
            i[s] = lo[s];
            if (s == 0) return total;
            --s;
          }
        }
      }
    }
    return 0.0;
  }

  /// sigma^2(V) = Var S(V) for a rectangle.
  double exact_sigma2(const Rect& V) const { return cross_covariance(V, V); }

  /// sigma^2 of a finite union of pairwise disjoint rectangles,
  /// including all cross-rectangle terms.
  double exact_sigma2(std::span<const Rect> parts) const {
    if (parts.empty()) throw std::invalid_argument("exact_sigma2: empty union");
    for (std::size_t i = 0; i < parts.size(); ++i)
      for (std::size_t j = i + 1; j < parts.size(); ++j)
        if (!parts[i].disjoint_from(parts[j]))
          throw std::invalid_argument("exact_sigma2: rectangles must be disjoint");
    double total = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i)
      for (std::size_t j = 0; j < parts.size(); ++j)
        total += cross_covariance(parts[i], parts[j]);
    return total;
  }

 private:
  static void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  }
  void require_dim(const Rect& r) const {
    if (static_cast<int>(r.dim()) != d_)
      throw std::invalid_argument("covariance model: rectangle dimension mismatch");
  }

  /// #{(x, y) : x in (A.lo, A.hi], y in (B.lo, B.hi], x - y = t} on axis s.
  static Index overlap_count(const Rect& A, const Rect& B, std::size_t s, Index t) {
    const Index lo = std::max(A.lo[s] + 1, B.lo[s] + 1 + t);
    const Index hi = std::min(A.hi[s], B.hi[s] + t);
    return std::max<Index>(0, hi - lo + 1);
  }

  double rho_table(const MultiIndex& offset) const {
    Index flat = 0;
    for (std::size_t s = 0; s < offset.dim(); ++s) {
      if (std::abs(offset[s]) > half_[s]) return 0.0;
      flat = flat * (2 * half_[s] + 1) + (offset[s] + half_[s]);
    }
    return table_[static_cast<std::size_t>(flat)];
  }

  template <typename Fn>
  void for_each_offset(Fn&& fn) const {
    MultiIndex ext(half_.dim());
    for (std::size_t s = 0; s < half_.dim(); ++s) ext[s] = 2 * half_[s] + 1;
    for_each_point(Rect(MultiIndex(half_.dim(), 0), ext), [&](const MultiIndex& q) {
      MultiIndex i(q.dim());
      for (std::size_t s = 0; s < q.dim(); ++s) i[s] = q[s] - 1 - half_[s];
      fn(i, rho_table(i));
    });
  }

  CovKind kind_ = CovKind::Iid;
  int d_ = 1;
  double sigma0sq_ = 1.0;
  double a_ = 0.0;           // product_geometric
  double c_ = 1.0, p_ = 0.0; // power
  MultiIndex half_;          // kernel-induced table half extents
  std::vector<double> table_;
  double table_sum_ = 0.0;
};

/// Brute-force oracle: nested double sum over all ordered point pairs.
inline double sigma2_pair_sum_oracle(const CovarianceModel& model,
                                     std::span<const Rect> parts) {
  double total = 0.0;
  MultiIndex diff;
  for (const Rect& A : parts)
    for (const Rect& B : parts)
      for_each_point(A, [&](const MultiIndex& j) {
        for_each_point(B, [&](const MultiIndex& k) {
          MultiIndex i(j.dim());
          for (std::size_t s = 0; s < j.dim(); ++s) i[s] = j[s] - k[s];
          total += model.rho(i);
        });
      });
  return total;
}

struct VarianceBoundsReport {
  double ratio;   // sigma^2(V) / |V|
  double rho0;
  double sigma2;
  bool pass;      // rho0 <= ratio <= sigma2 (with a hair of float slack)
};

/// The variance-density sandwich rho(0) <= sigma^2(V)/|V| <= sigma^2.
inline VarianceBoundsReport check_variance_bounds(const CovarianceModel& model,
                                                  std::span<const Rect> parts) {
  Index vol = 0;
  for (const Rect& r : parts) vol = checked_add(vol, r.volume());
  if (vol <= 0) throw std::invalid_argument("check_variance_bounds: empty region");
  VarianceBoundsReport rep;
  rep.ratio = model.exact_sigma2(parts) / static_cast<double>(vol);
  rep.rho0 = model.rho0();
  rep.sigma2 = model.sigma2();
  const double slack = 1e-9 * rep.sigma2;
  rep.pass = rep.ratio >= rep.rho0 - slack && rep.ratio <= rep.sigma2 + slack;
  return rep;
}

struct GapRateFit {
  std::vector<Index> sides;
  std::vector<double> volumes;
  std::vector<double> gaps;    // sigma^2 - sigma^2(V_l)/|V_l|, >= 0 under association
  double fitted_slope;         // log-log slope of gap against |V|
  double target;               // -delta0 where the model defines one, else NaN
};

/// Fits the susceptibility-gap decay over increasing squares (0, l]^d.
inline GapRateFit susceptibility_gap_fit(const CovarianceModel& model,
                                         std::span<const Index> sides) {
  if (sides.size() < 3)
    throw std::invalid_argument("susceptibility_gap_fit: need at least 3 volumes");
  GapRateFit fit;
  const double s2 = model.sigma2();
  const int d = model.dim();
  for (Index l : sides) {
    Rect v(MultiIndex(static_cast<std::size_t>(d), 0), MultiIndex(static_cast<std::size_t>(d), l));
    const double vol = static_cast<double>(v.volume());
    fit.sides.push_back(l);
    fit.volumes.push_back(vol);
    fit.gaps.push_back(s2 - model.exact_sigma2(v) / vol);
  }
  // Least squares on (log |V|, log gap); nonpositive gaps mean the decay
  // beat double precision, reported as slope -infinity.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < fit.gaps.size(); ++i) {
    if (fit.gaps[i] <= 0.0) continue;
    const double x = std::log(fit.volumes[i]), y = std::log(fit.gaps[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  fit.fitted_slope = (n >= 2) ? (n * sxy - sx * sy) / (n * sxx - sx * sx)
                              : -std::numeric_limits<double>::infinity();
  const double nu = model.power_rate();
  fit.target = std::isnan(nu) ? std::numeric_limits<double>::quiet_NaN() : -(nu / d - 1.0);
  return fit;
}

struct BlockSumCovariance {
  double exact;           // sum over H_i x H_j of rho
  double bound_exponent;  // lambda * M_{i,j}^beta (NaN without exponential decay)
};

/// Exact covariance of two big-block sums with the distance-driven
/// exponent of the inter-block bound.
inline BlockSumCovariance block_sum_covariance(const CovarianceModel& model,
                                               const BlockGeometry& geometry,
                                               const MultiIndex& i, const MultiIndex& j) {
  if (i == j) throw std::invalid_argument("block_sum_covariance: requires i != j");
  BlockSumCovariance out;
  out.exact = model.cross_covariance(geometry.decompose_block(i).big,
                                     geometry.decompose_block(j).big);
  const auto dist = geometry.block_distance(i, j);
  const double lambda = model.decay_rate();
  out.bound_exponent =
      lambda * std::pow(static_cast<double>(dist.m_ij),
                        static_cast<double>(geometry.params().beta));
  return out;
}

}  // namespace arflab
