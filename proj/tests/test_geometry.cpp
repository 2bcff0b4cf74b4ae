#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "arflab/block_geometry.hpp"
#include "arflab/prefix_grid.hpp"
#include "arflab/validate.hpp"

using namespace arflab;

namespace {

Parameters desk_params(int d, double tau = 0.8) {
  Parameters p;
  p.d = d;
  p.alpha = 3;
  p.beta = 2;
  p.tau = tau;
  return p;
}

// Independent per-point membership scan: every lattice point of B_k must
// lie in G_rho.  O(|B| d) on purpose; only used at small scale.
bool good_block_brute(const BlockGeometry& g, const MultiIndex& k) {
  bool good = true;
  for_each_point(g.decompose_block(k).block, [&](const MultiIndex& j) {
    if (!g_tau_contains(j, g.params().rho())) good = false;
  });
  return good;
}

// Brute-force distance between the big blocks: min over point pairs of
// the sup-norm distance.
Index block_distance_brute(const BlockGeometry& g, const MultiIndex& i, const MultiIndex& j) {
  Rect hi = g.decompose_block(i).big, hj = g.decompose_block(j).big;
  Index best = std::numeric_limits<Index>::max();
  for_each_point(hi, [&](const MultiIndex& a) {
    for_each_point(hj, [&](const MultiIndex& b) {
      Index dist = 0;
      for (std::size_t s = 0; s < a.dim(); ++s) dist = std::max(dist, std::abs(a[s] - b[s]));
      best = std::min(best, dist);
    });
  });
  return best;
}

}  // namespace

TEST(Boundary, KnownSequence) {
  auto n = boundary_sequence(3, 2, 6);
  std::vector<Index> want{0, 2, 14, 50, 130, 280, 532};
  EXPECT_EQ(n, want);
  for (Index a = 3; a <= 6; ++a)
    for (Index b = 2; b < a; ++b) EXPECT_EQ(boundary_sequence(a, b, 1)[1], 2);
}

TEST(Boundary, AsymptoticRate) {
  auto n = boundary_sequence(3, 2, 50);
  double ratio = static_cast<double>(n[50]) / std::pow(50.0, 4.0);
  EXPECT_NEAR(ratio, 0.25, 0.025);
}

TEST(Boundary, OverflowReportsBitWidth) {
  try {
    boundary_sequence(175, 132, 3);
    FAIL() << "expected overflow";
  } catch (const overflow_error& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("bit"), std::string::npos);
  }
}

TEST(Blocks, KnownDecomposition) {
  BlockGeometry g(desk_params(2), 10);
  auto dec = g.decompose_block(MultiIndex{2, 3});
  EXPECT_EQ(dec.block, Rect({2, 14}, {14, 50}));
  EXPECT_EQ(dec.big, Rect({2, 14}, {10, 41}));
  EXPECT_EQ(dec.big.volume(), 216);
  EXPECT_EQ(dec.block.volume(), 432);
  Index small = 0;
  for (const auto& piece : dec.small_pieces) small += piece.volume();
  EXPECT_EQ(small, 216);
}

TEST(Blocks, UnitBlock) {
  for (int d = 1; d <= 3; ++d) {
    BlockGeometry g(desk_params(d), 4);
    auto dec = g.decompose_block(MultiIndex(static_cast<std::size_t>(d), 1));
    EXPECT_EQ(dec.block, Rect(MultiIndex(d, 0), MultiIndex(d, 2)));
    EXPECT_EQ(dec.big, Rect(MultiIndex(d, 0), MultiIndex(d, 1)));
    EXPECT_EQ(dec.big.volume(), 1);
  }
}

TEST(Blocks, ExactVolumesAndPieceBounds) {
  for (int d = 1; d <= 3; ++d) {
    BlockGeometry g(desk_params(d), 11);
    MultiIndex kmax(static_cast<std::size_t>(d), d == 3 ? 6 : 10);
    for_each_point(Rect(MultiIndex(d, 0), kmax), [&](const MultiIndex& k) {
      auto dec = g.decompose_block(k);
      Index hk = 1, bk = 1;
      for (std::size_t s = 0; s < k.dim(); ++s) {
        hk = checked_mul(hk, checked_ipow(k[s], 3));
        bk = checked_mul(bk, checked_ipow(k[s], 3) + checked_ipow(k[s], 2));
      }
      EXPECT_EQ(dec.big.volume(), hk);
      EXPECT_EQ(dec.block.volume(), bk);
      // (2^d - 1) [k]^beta <= |I_k| <= (2^d - 1) [k]^alpha
      Index ik = bk - hk;
      Index kb = checked_ipow(volume(k), 2), ka = checked_ipow(volume(k), 3);
      Index m = (Index{1} << d) - 1;
      EXPECT_GE(ik, m * kb);
      EXPECT_LE(ik, m * ka);
      // Piece bound |I_k(s)| <= 2^{d-1} k_s^beta prod_{s'!=s} k_{s'}^alpha
      for (std::size_t s = 0; s < k.dim(); ++s) {
        Index cap = Index{1} << (d - 1);
        for (std::size_t t = 0; t < k.dim(); ++t)
          cap = checked_mul(cap, checked_ipow(k[t], t == s ? 2 : 3));
        EXPECT_LE(dec.small_pieces[s].volume(), cap);
      }
      // Pieces are disjoint and tile B \ H.
      for (std::size_t s = 0; s < dec.small_pieces.size(); ++s) {
        EXPECT_TRUE(dec.small_pieces[s].disjoint_from(dec.big));
        for (std::size_t t = s + 1; t < dec.small_pieces.size(); ++t)
          EXPECT_TRUE(dec.small_pieces[s].disjoint_from(dec.small_pieces[t]));
      }
    });
  }
}

TEST(Blocks, TileWithoutOverlap) {
  for (int d = 1; d <= 3; ++d) {
    BlockGeometry g(desk_params(d), 7);
    MultiIndex kmax(static_cast<std::size_t>(d), 6);
    Index total = 0;
    for_each_point(Rect(MultiIndex(d, 0), kmax), [&](const MultiIndex& k) {
      total = checked_add(total, g.decompose_block(k).block.volume());
    });
    EXPECT_EQ(total, checked_ipow(g.n(6), d));
    // Spot points map back to a unique containing block.
    for_each_point(Rect(MultiIndex(d, 0), MultiIndex(d, 20)), [&](const MultiIndex& j) {
      auto k = g.block_of_point(j);
      EXPECT_TRUE(g.decompose_block(k).block.contains(j));
    });
  }
}

TEST(GoodBlocks, VertexTestMatchesBruteForce) {
  for (int d : {1, 2, 3}) {
    BlockGeometry g(desk_params(d), 5);
    MultiIndex kmax(static_cast<std::size_t>(d), d == 3 ? 3 : 4);
    for_each_point(Rect(MultiIndex(d, 0), kmax), [&](const MultiIndex& k) {
      EXPECT_EQ(g.is_good(k), good_block_brute(g, k)) << "k dim " << d;
    });
  }
}

TEST(GoodBlocks, KnownSetAtSmallScale) {
  BlockGeometry g(desk_params(2), 4);
  auto good = g.good_block_set(MultiIndex{3, 3});
  std::vector<MultiIndex> want{{2, 2}, {2, 3}, {3, 2}, {3, 3}};
  EXPECT_EQ(good, want);
  EXPECT_FALSE(g.is_good(MultiIndex{1, 1}));
  EXPECT_FALSE(g_tau_contains(MultiIndex{1, 2}, g.params().rho()));
}

TEST(GoodBlocks, TinyRhoKeepsEverythingFromTwoUp) {
  Parameters p = desk_params(2);
  p.tau = 8e-6;  // rho = 1e-6
  BlockGeometry g(p, 7);
  for_each_point(Rect(MultiIndex{1, 1}, MultiIndex{6, 6}), [&](const MultiIndex& k) {
    EXPECT_TRUE(g.is_good(k));
  });
}

TEST(GoodBlocks, DimensionOneIsAllGood) {
  BlockGeometry g(desk_params(1), 30);
  for (Index k = 1; k <= 30; ++k) EXPECT_TRUE(g.is_good(MultiIndex{k}));
}

TEST(CoreRectangle, KnownExample) {
  BlockGeometry g(desk_params(2), 5);
  auto core = g.core_rectangle(MultiIndex{3, 3});
  EXPECT_EQ(core.m_corner, (MultiIndex{2, 2}));
  EXPECT_EQ(core.core, Rect({2, 2}, {50, 50}));
  std::vector<MultiIndex> want{{2, 2}, {2, 3}, {3, 2}, {3, 3}};
  EXPECT_EQ(core.l_k, want);
  EXPECT_TRUE(core.violations.empty());
}

TEST(CoreRectangle, DimensionOne) {
  BlockGeometry g(desk_params(1), 8);
  auto core = g.core_rectangle(MultiIndex{5});
  EXPECT_EQ(core.core, Rect({0}, {280}));
  EXPECT_EQ(core.l_k.size(), 5u);
}

TEST(CoreRectangle, TilingIdentity) {
  for (int d : {1, 2, 3}) {
    BlockGeometry g(desk_params(d), 7);
    for (Index m = 2; m <= (d == 3 ? 4 : 6); ++m) {
      MultiIndex k(static_cast<std::size_t>(d), m);
      if (!g.is_good(k)) continue;
      auto core = g.core_rectangle(k);
      EXPECT_TRUE(core.violations.empty());
      Index sum = 0;
      for (const auto& i : core.l_k) sum = checked_add(sum, g.decompose_block(i).block.volume());
      EXPECT_EQ(sum, core.core.volume());
    }
  }
  // Off-diagonal good blocks too: every good k <= (5,5) at d = 2.
  BlockGeometry g(desk_params(2), 7);
  for (const auto& k : g.good_block_set(MultiIndex{5, 5})) {
    auto core = g.core_rectangle(k);
    EXPECT_TRUE(core.violations.empty()) << k;
    Index sum = 0;
    for (const auto& i : core.l_k) sum = checked_add(sum, g.decompose_block(i).block.volume());
    EXPECT_EQ(sum, core.core.volume()) << k;
    // The union of strips and the core covers (0, N_k] exactly.
    auto rem = g.remainder_regions(k);
    Index inside = 0;
    for_each_point(Rect(MultiIndex{0, 0}, g.corner(k)), [&](const MultiIndex& j) {
      bool covered = core.core.contains(j);
      for (const auto& s : rem.strips) covered = covered || s.contains(j);
      if (covered) ++inside;
    });
    EXPECT_EQ(inside, volume(g.corner(k))) << k;
  }
}

TEST(Remainder, StripsCoverComplementOfCore) {
  BlockGeometry g(desk_params(2), 5);
  auto rem = g.remainder_regions(MultiIndex{3, 3});
  ASSERT_EQ(rem.strips.size(), 2u);
  EXPECT_EQ(rem.strips[0], Rect({0, 0}, {2, 50}));
  EXPECT_EQ(rem.strips[1], Rect({0, 0}, {50, 2}));
  // Exhaustive union check: (0, N_k] = R_k plus the strips (as point sets).
  auto core = g.core_rectangle(MultiIndex{3, 3});
  for_each_point(Rect({0, 0}, {50, 50}), [&](const MultiIndex& j) {
    bool in_union = core.core.contains(j);
    for (const auto& s : rem.strips) in_union = in_union || s.contains(j);
    EXPECT_TRUE(in_union);
  });
}

TEST(Remainder, CornersMatchDefinition) {
  BlockGeometry g(desk_params(2), 5);
  auto rem = g.remainder_regions(MultiIndex{3, 3});
  ASSERT_EQ(rem.corners.size(), 3u);
  // J = {1}: (n_3, n_4] x (0, n_3]
  EXPECT_EQ(rem.corners[0].region, Rect({50, 0}, {130, 50}));
  // J = {2}
  EXPECT_EQ(rem.corners[1].region, Rect({0, 50}, {50, 130}));
  // J = {1,2}
  EXPECT_EQ(rem.corners[2].region, Rect({50, 50}, {130, 130}));
}

TEST(Remainder, DimensionOneStripIsEmpty) {
  BlockGeometry g(desk_params(1), 6);
  auto rem = g.remainder_regions(MultiIndex{4});
  ASSERT_EQ(rem.strips.size(), 1u);
  EXPECT_TRUE(rem.strips[0].empty());
}

TEST(Psi, KStarKnownValue) {
  BlockGeometry g(desk_params(2), 600);
  auto [k21, exact] = g.k_star(2, 500);
  EXPECT_EQ(k21, 21);
  EXPECT_TRUE(exact);
  EXPECT_EQ(g.n(21), 56672);
  EXPECT_EQ(g.n(22), 67804);
}

TEST(Psi, EnumerationOrderStartsAsExpected) {
  BlockGeometry g(desk_params(2), 600);
  auto psi = g.enumerate_psi(3, 60);
  ASSERT_GE(psi.order.size(), 42u);
  EXPECT_EQ(psi.order[0], (MultiIndex{2, 2}));
  EXPECT_EQ(psi.order[1], (MultiIndex{2, 3}));
  EXPECT_EQ(psi.order[19], (MultiIndex{2, 21}));
  EXPECT_EQ(psi.order[20], (MultiIndex{3, 2}));
  EXPECT_EQ(psi.order[38], (MultiIndex{21, 2}));
  EXPECT_EQ(psi.order[39], (MultiIndex{3, 3}));
  EXPECT_EQ(psi.order[40], (MultiIndex{3, 4}));
}

TEST(Psi, PropertyEightOverFirstFiveHundred) {
  BlockGeometry g(desk_params(2), 600);
  auto psi = g.enumerate_psi(3, 500);
  ASSERT_EQ(psi.order.size(), 500u);
  for (std::size_t l = 0; l < psi.order.size(); ++l) {
    for (std::size_t m = l + 1; m < psi.order.size(); ++m) {
      bool has_axis = false;
      for (std::size_t s = 0; s < 2 && !has_axis; ++s)
        has_axis = psi.order[l][s] <= psi.order[m][s];
      ASSERT_TRUE(has_axis) << "pair " << l << "," << m;
    }
  }
}

TEST(Psi, PropertyNineEnvelopeBounded) {
  BlockGeometry g(desk_params(2), 600);
  auto psi = g.enumerate_psi(3, 500);
  const double gamma0 = 1.01 * (1.0 + 1.0 / g.params().rho()) * (1.0 - 1.0 / 2.0);
  double early_max = 0.0, late_max = 0.0;
  for (std::size_t m = 0; m < psi.order.size(); ++m) {
    double stat = static_cast<double>(m + 1) /
                  std::pow(static_cast<double>(volume(psi.order[m])), gamma0);
    if (m < 100) early_max = std::max(early_max, stat);
    else late_max = std::max(late_max, stat);
  }
  EXPECT_LE(late_max, early_max);
}

TEST(Psi, BijectionOntoGoodSet) {
  for (int d : {2, 3}) {
    BlockGeometry g(desk_params(d), 40);
    MultiIndex kmax(static_cast<std::size_t>(d), 5);
    auto order = g.psi_order_within(kmax);
    auto good = g.good_block_set(kmax);
    std::set<std::vector<Index>> seen;
    for (const auto& k : order) {
      EXPECT_TRUE(seen.insert(k.coords()).second) << "duplicate in psi order";
      EXPECT_TRUE(g.is_good(k));
    }
    EXPECT_EQ(order.size(), good.size());
    // psi positions respect the filtered phi order (increasing).
    auto full = g.enumerate_psi(5, static_cast<std::size_t>(-1), kmax);
    for (std::size_t i = 1; i < full.phi_position.size(); ++i)
      EXPECT_LT(full.phi_position[i - 1], full.phi_position[i]);
  }
}

TEST(BlockDistance, KnownExamplesAndBruteForce) {
  BlockGeometry g(desk_params(2), 5);
  auto d1 = g.block_distance(MultiIndex{1, 1}, MultiIndex{2, 3});
  EXPECT_EQ(d1.dist, 14);
  EXPECT_EQ(d1.m_ij, 2);
  EXPECT_GE(d1.dist, checked_ipow(d1.m_ij, 2));
  EXPECT_EQ(block_distance_brute(g, MultiIndex{1, 1}, MultiIndex{2, 3}), 14);

  auto d2 = g.block_distance(MultiIndex{1, 1}, MultiIndex{2, 1});
  EXPECT_EQ(d2.dist, 2);
  EXPECT_EQ(d2.m_ij, 1);
  EXPECT_EQ(block_distance_brute(g, MultiIndex{1, 1}, MultiIndex{2, 1}), 2);

  EXPECT_THROW(g.block_distance(MultiIndex{2, 2}, MultiIndex{2, 2}), std::invalid_argument);
}

TEST(BlockDistance, SymmetryAndLowerBound) {
  BlockGeometry g(desk_params(2), 6);
  auto good = g.good_block_set(MultiIndex{4, 4});
  for (const auto& i : good) {
    for (const auto& j : good) {
      if (i == j) continue;
      auto dij = g.block_distance(i, j);
      auto dji = g.block_distance(j, i);
      EXPECT_EQ(dij.dist, dji.dist);
      EXPECT_EQ(dij.m_ij, dji.m_ij);
      EXPECT_GE(dij.dist, checked_ipow(dij.m_ij, g.params().beta));
    }
  }
}

TEST(Validator, CompliantTuplePasses) {
  Parameters p;
  p.d = 2;
  p.r = 1.0;
  p.delta = 1.0;
  p.tau = 0.8;
  p.nu = 3.9;
  p.alpha = 175;
  p.beta = 132;
  p.lambda = 0.5;
  auto rep = validate_parameters(p);
  for (const auto& c : rep.checks)
    EXPECT_TRUE(c.pass || c.informational) << c.name << ": " << c.lhs << " " << c.relation
                                           << " " << c.rhs;
  EXPECT_TRUE(rep.all_pass());
  // Spot the computed right-hand sides against hand arithmetic.
  for (const auto& c : rep.checks) {
    if (c.name == "beta_smoothing") { EXPECT_DOUBLE_EQ(c.rhs, 21.0); }
    if (c.name == "alpha_minus_beta") { EXPECT_DOUBLE_EQ(c.lhs, 43.0); EXPECT_DOUBLE_EQ(c.rhs, 42.0); }
    if (c.name == "ratio_lower") { EXPECT_NEAR(c.rhs, 2.0 / 3.0, 1e-12); }
    if (c.name == "ratio_upper") { EXPECT_NEAR(c.rhs, 4.0 / 3.0, 1e-12); }
    if (c.name == "alpha_counting") { EXPECT_NEAR(c.rhs, 16.5, 1e-12); }
    if (c.name == "beta_counting") { EXPECT_NEAR(c.rhs, 110.0, 1e-9); }
    if (c.name == "alpha_strips") { EXPECT_NEAR(c.rhs, 16.0 / 2.4 - 1.0, 1e-12); }
    if (c.name == "beta_gap_rate") { EXPECT_NEAR(c.rhs, 3.0 / 0.95, 1e-12); }
  }
}

TEST(Validator, DeskScaleTupleReportsViolations) {
  Parameters p = Parameters{};  // d=2, alpha=3, beta=2, tau=0.8, r=delta=1, nu=3.9
  auto rep = validate_parameters(p);
  bool smoothing_failed = false, gap_failed = false;
  for (const auto& c : rep.checks) {
    if (c.name == "beta_smoothing") { smoothing_failed = !c.pass; EXPECT_DOUBLE_EQ(c.rhs, 21.0); }
    if (c.name == "alpha_minus_beta") { gap_failed = !c.pass; EXPECT_DOUBLE_EQ(c.rhs, 42.0); }
  }
  EXPECT_TRUE(smoothing_failed);
  EXPECT_TRUE(gap_failed);
  EXPECT_FALSE(rep.all_pass());
  EXPECT_NEAR(rep.derived.at("eps0"), 4.0 / 21.0, 1e-12);
  EXPECT_NEAR(rep.derived.at("alpha0"), 0.125, 1e-12);
}
