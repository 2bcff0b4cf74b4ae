#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "arflab/field.hpp"
#include "arflab/parallel.hpp"
#include "arflab/wiener.hpp"

using namespace arflab;

namespace {

Kernel box_kernel_2x2() {
  return Kernel{MultiIndex{2, 2}, {0.5, 0.5, 0.5, 0.5}};
}

}  // namespace

TEST(Kernel, AutocovarianceKnownValues) {
  auto id = kernel_autocovariance(Kernel::identity(2));
  EXPECT_DOUBLE_EQ(id.rho(MultiIndex{0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(id.rho(MultiIndex{1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(id.sigma2(), 1.0);

  auto pair = kernel_autocovariance(Kernel{MultiIndex{2}, {1.0, 1.0}});
  EXPECT_DOUBLE_EQ(pair.rho(MultiIndex{0}), 2.0);
  EXPECT_DOUBLE_EQ(pair.rho(MultiIndex{1}), 1.0);
  EXPECT_DOUBLE_EQ(pair.rho(MultiIndex{-1}), 1.0);
  EXPECT_DOUBLE_EQ(pair.sigma2(), 4.0);
}

TEST(Kernel, Sigma2IsSquaredMass) {
  // sum_i rho(i) = (sum_m a_m)^2 for arbitrary nonnegative kernels.
  std::vector<Kernel> kernels = {
      {MultiIndex{3}, {0.2, 1.0, 0.4}},
      {MultiIndex{2, 3}, {0.1, 0.7, 0.3, 0.9, 0.0, 0.5}},
      {MultiIndex{2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8}},
  };
  for (const auto& k : kernels) {
    double mass = std::accumulate(k.weights.begin(), k.weights.end(), 0.0);
    EXPECT_NEAR(kernel_autocovariance(k).sigma2(), mass * mass, 1e-10 * mass * mass);
  }
  EXPECT_THROW(kernel_autocovariance(Kernel{MultiIndex{2}, {1.0, -0.1}}),
               std::invalid_argument);
}

TEST(Field, IdentityKernelReproducesIidExactly) {
  auto iid = FieldModel::iid(2, Innovation::CenteredExponential);
  auto ma = FieldModel::moving_average(Kernel::identity(2), Innovation::CenteredExponential);
  auto a = simulate_field(iid, MultiIndex{17, 23}, 99, 4);
  auto b = simulate_field(ma, MultiIndex{17, 23}, 99, 4);
  EXPECT_EQ(a.cells, b.cells);
}

TEST(Field, SeedDisciplineIsBitExact) {
  auto model = FieldModel::moving_average(box_kernel_2x2(), Innovation::Gaussian);
  auto a = simulate_field(model, MultiIndex{31, 12}, 5, 0);
  auto b = simulate_field(model, MultiIndex{31, 12}, 5, 0);
  auto c = simulate_field(model, MultiIndex{31, 12}, 5, 1);
  auto d = simulate_field(model, MultiIndex{31, 12}, 6, 0);
  EXPECT_EQ(a.cells, b.cells);
  EXPECT_NE(a.cells, c.cells);
  EXPECT_NE(a.cells, d.cells);
}

TEST(Field, MillionCellMeanBand) {
  auto model = FieldModel::iid(2, Innovation::Gaussian);
  auto sample = simulate_field(model, MultiIndex{1000, 1000}, 20260809, 0);
  double mean = sample.prefix(MultiIndex{1000, 1000}) / 1e6;
  EXPECT_NEAR(mean, 0.0, 0.005);
}

TEST(Field, LagCovarianceMatchesExactAutocovariance) {
  auto kernel = box_kernel_2x2();
  auto model = FieldModel::moving_average(kernel, Innovation::CenteredExponential);
  auto cov = kernel_autocovariance(kernel);
  const Index n = 512;
  auto sample = simulate_field(model, MultiIndex{n, n}, 31337, 0);
  const GridLayout lay(sample.extent);

  for (Index di = -3; di <= 3; ++di) {
    for (Index dj = 0; dj <= 3; ++dj) {
      if (dj == 0 && di < 0) continue;
      // Estimate cov(X_j, X_{j+h}) over all in-range pairs, with a
      // tile-split standard error (8x8 disjoint tiles).
      const int tiles = 8;
      std::vector<double> tile_est;
      for (int ti = 0; ti < tiles; ++ti) {
        for (int tj = 0; tj < tiles; ++tj) {
          double acc = 0.0;
          Index count = 0;
          const Index ilo = 1 + ti * (n / tiles), ihi = (ti + 1) * (n / tiles);
          const Index jlo = 1 + tj * (n / tiles), jhi = (tj + 1) * (n / tiles);
          for (Index i = ilo; i <= ihi; ++i) {
            for (Index j = jlo; j <= jhi; ++j) {
              Index i2 = i + di, j2 = j + dj;
              if (i2 < ilo || i2 > ihi || j2 < jlo || j2 > jhi) continue;
              acc += sample.cells[static_cast<std::size_t>(lay.flat(MultiIndex{i, j}))] *
                     sample.cells[static_cast<std::size_t>(lay.flat(MultiIndex{i2, j2}))];
              ++count;
            }
          }
          tile_est.push_back(acc / static_cast<double>(count));
        }
      }
      double mean = 0.0;
      for (double e : tile_est) mean += e;
      mean /= static_cast<double>(tile_est.size());
      double var = 0.0;
      for (double e : tile_est) var += (e - mean) * (e - mean);
      var /= static_cast<double>(tile_est.size() - 1);
      double se = std::sqrt(var / static_cast<double>(tile_est.size()));
      double want = cov.rho(MultiIndex{di, dj});
      EXPECT_NEAR(mean, want, 5.0 * se + 1e-12) << "lag (" << di << "," << dj << ")";
    }
  }
}

TEST(Field, AssociationSanityOneSided) {
  // cov(f(X), g(X)) >= 0 for nondecreasing f, g; checked one-sided at
  // -3 standard errors for indicator and identity pairs at nearby sites.
  auto model = FieldModel::moving_average(box_kernel_2x2(), Innovation::CenteredExponential);
  const int reps = 4000;
  const MultiIndex a{2, 2}, b{3, 3};
  std::vector<double> fa(reps), ga(reps), ia(reps), ib(reps);
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    auto sample = simulate_field(model, MultiIndex{4, 4}, 777, r);
    const GridLayout lay(sample.extent);
    double xa = sample.cells[static_cast<std::size_t>(lay.flat(a))];
    double xb = sample.cells[static_cast<std::size_t>(lay.flat(b))];
    fa[r] = xa;
    ga[r] = xb;
    ia[r] = xa > 0.5 ? 1.0 : 0.0;
    ib[r] = xb > 0.5 ? 1.0 : 0.0;
  });
  auto cov_with_se = [&](const std::vector<double>& u, const std::vector<double>& v) {
    double mu = 0, mv = 0;
    for (int i = 0; i < reps; ++i) { mu += u[i]; mv += v[i]; }
    mu /= reps; mv /= reps;
    double c = 0, c2 = 0;
    for (int i = 0; i < reps; ++i) {
      double t = (u[i] - mu) * (v[i] - mv);
      c += t;
      c2 += t * t;
    }
    c /= reps;
    double se = std::sqrt((c2 / reps - c * c) / reps);
    return std::pair<double, double>(c, se);
  };
  for (auto& [c, se] : {cov_with_se(fa, ga), cov_with_se(ia, ib), cov_with_se(fa, ib)})
    EXPECT_GE(c, -3.0 * se);
}

TEST(Wiener, RectangleVarianceConcentration) {
  const double sigma2 = 1.9;
  const int reps = 10000;
  std::vector<double> w(reps);
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    auto sheet = simulate_wiener_sheet(sigma2, MultiIndex{6, 6}, 11, r);
    w[r] = sheet.rect_sum(Rect({0, 0}, {4, 4}));
  });
  double mean = 0, var = 0;
  for (double x : w) mean += x;
  mean /= reps;
  for (double x : w) var += (x - mean) * (x - mean);
  var /= reps - 1;
  EXPECT_NEAR(var, 16.0 * sigma2, 0.05 * 16.0 * sigma2);
}

TEST(Wiener, DisjointRectanglesUncorrelated) {
  const int reps = 10000;
  std::vector<double> u(reps), v(reps);
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    auto sheet = simulate_wiener_sheet(1.0, MultiIndex{8, 8}, 12, r);
    u[r] = sheet.rect_sum(Rect({0, 0}, {4, 8}));
    v[r] = sheet.rect_sum(Rect({4, 0}, {8, 8}));
  });
  double mu = 0, mv = 0;
  for (int i = 0; i < reps; ++i) { mu += u[i]; mv += v[i]; }
  mu /= reps; mv /= reps;
  double c = 0, vu = 0, vv = 0;
  for (int i = 0; i < reps; ++i) {
    c += (u[i] - mu) * (v[i] - mv);
    vu += (u[i] - mu) * (u[i] - mu);
    vv += (v[i] - mv) * (v[i] - mv);
  }
  c /= reps; vu /= reps; vv /= reps;
  double se = std::sqrt(vu * vv / reps);
  EXPECT_NEAR(c, 0.0, 3.0 * se);
  // Zero-volume rectangle.
  auto sheet = simulate_wiener_sheet(1.0, MultiIndex{8, 8}, 12, 0);
  EXPECT_DOUBLE_EQ(sheet.rect_sum(Rect({2, 3}, {2, 7})), 0.0);
}

TEST(ConditionalFill, PinsPrescribedSums) {
  std::vector<std::pair<Rect, double>> assign{
      {Rect({0, 0}, {3, 3}), 4.25},
      {Rect({5, 5}, {9, 9}), -2.5},
  };
  auto sheet = conditional_fill(assign, 1.7, MultiIndex{10, 10}, 2024, 3);
  EXPECT_NEAR(sheet.rect_sum(assign[0].first), 4.25, 1e-12);
  EXPECT_NEAR(sheet.rect_sum(assign[1].first), -2.5, 1e-12);
  // Overlap is rejected.
  std::vector<std::pair<Rect, double>> bad{
      {Rect({0, 0}, {3, 3}), 1.0}, {Rect({2, 2}, {5, 5}), 1.0}};
  EXPECT_THROW(conditional_fill(bad, 1.0, MultiIndex{10, 10}, 1, 0), std::invalid_argument);
}

TEST(ConditionalFill, UntouchedOutsideAssignments) {
  std::vector<std::pair<Rect, double>> assign{{Rect({0, 0}, {2, 2}), 1.0}};
  auto filled = conditional_fill(assign, 1.0, MultiIndex{6, 6}, 55, 8);
  auto plain = simulate_wiener_sheet(1.0, MultiIndex{6, 6}, 55, 8);
  const GridLayout lay(MultiIndex{6, 6});
  for_each_point(Rect({0, 0}, {6, 6}), [&](const MultiIndex& j) {
    if (assign[0].first.contains(j)) return;
    EXPECT_EQ(filled.cells[static_cast<std::size_t>(lay.flat(j))],
              plain.cells[static_cast<std::size_t>(lay.flat(j))]);
  });
}

TEST(ConditionalFill, MarginalVarianceWithRandomTargets) {
  // |B| = 4, sigma^2 = 1, s ~ N(0, 4): conditioning removes 1/|B| of the
  // cell variance and the target term adds it back, total variance 1.
  const int reps = 10000;
  const Rect b({0, 0}, {2, 2});
  std::vector<double> cell(reps);
  CounterRng targets(909, derive_stream(RngPurpose::Generic, 7));
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    double s = 2.0 * targets.gaussian(r);
    std::vector<std::pair<Rect, double>> assign{{b, s}};
    auto sheet = conditional_fill(assign, 1.0, MultiIndex{2, 2}, 13, r);
    cell[r] = sheet.cells[0];
  });
  double mean = 0, var = 0;
  for (double x : cell) mean += x;
  mean /= reps;
  for (double x : cell) var += (x - mean) * (x - mean);
  var /= reps - 1;
  EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(ConditionalFill, GaussianBridgeLawAtFixedTarget) {
  // Given the sum s, cells are N(s/|B|, sigma^2 (1 - 1/|B|)) with pairwise
  // covariance -sigma^2/|B|.
  const int reps = 20000;
  const double s = 3.7;
  const Rect b({0, 0}, {2, 2});
  std::vector<double> c0(reps), c1(reps);
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    std::vector<std::pair<Rect, double>> assign{{b, s}};
    auto sheet = conditional_fill(assign, 1.0, MultiIndex{2, 2}, 14, r);
    c0[r] = sheet.cells[0];
    c1[r] = sheet.cells[3];
  });
  double m0 = 0, m1 = 0;
  for (int i = 0; i < reps; ++i) { m0 += c0[i]; m1 += c1[i]; }
  m0 /= reps; m1 /= reps;
  double v0 = 0, cov = 0;
  for (int i = 0; i < reps; ++i) {
    v0 += (c0[i] - m0) * (c0[i] - m0);
    cov += (c0[i] - m0) * (c1[i] - m1);
  }
  v0 /= reps - 1;
  cov /= reps - 1;
  EXPECT_NEAR(m0, s / 4.0, 0.02);
  EXPECT_NEAR(v0, 0.75, 0.03);
  EXPECT_NEAR(cov, -0.25, 0.03);
}

TEST(IdentitySheet, SharesFieldCellsBitExactly) {
  auto model = FieldModel::iid(2, Innovation::Gaussian);
  auto sample = simulate_field(model, MultiIndex{20, 20}, 3, 0);
  auto sheet = identity_sheet(sample, 1.0);
  for (Index m = 1; m <= 20; m += 3)
    EXPECT_EQ(sheet.prefix(MultiIndex{m, m}), sample.prefix(MultiIndex{m, m}));
}
