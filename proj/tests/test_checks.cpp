#include <gtest/gtest.h>

#include <cmath>

#include "arflab/checks.hpp"

using namespace arflab;

namespace {

std::vector<Index> sweep_sizes() { return {4, 16, 64}; }

FieldModel ma_exponential() {
  return FieldModel::moving_average(Kernel{MultiIndex{2, 2}, {0.5, 0.5, 0.5, 0.5}},
                                    Innovation::CenteredExponential);
}

}  // namespace

TEST(KsDistance, ConstructedQuantileSample) {
  // Samples at the reference quantiles (i - 1/2)/R leave at most 1/(2R).
  const int n = 200;
  std::vector<double> samples(n);
  for (int i = 0; i < n; ++i)
    samples[i] = normal_quantile((i + 0.5) / n);
  EXPECT_LE(ks_distance(samples, normal_cdf), 0.5 / n + 1e-9);
}

TEST(KsDistance, DegenerateSample) {
  for (double c : {-1.3, 0.0, 2.2}) {
    std::vector<double> samples(50, c);
    double want = std::max(normal_cdf(c), 1.0 - normal_cdf(c));
    EXPECT_NEAR(ks_distance(samples, normal_cdf), want, 1e-12);
  }
  EXPECT_THROW(ks_distance({1, 2, 3}, normal_cdf), std::invalid_argument);
}

TEST(KsDistance, SelfDistanceIsInterpolationSlack) {
  CounterRng rng(8, derive_stream(RngPurpose::Generic, 4));
  std::vector<double> samples(500);
  for (int i = 0; i < 500; ++i) samples[i] = rng.gaussian(static_cast<std::uint64_t>(i));
  auto self = DistributionFn::empirical(samples);
  // KS of a sample against its own empirical CDF: only the clamp and the
  // R+1 normalization separate them.
  EXPECT_LE(ks_distance(samples, [&](double x) { return self(x); }), 1.0 / 250.0);
}

TEST(CltRate, IidGaussianControlPasses) {
  auto model = FieldModel::iid(2, Innovation::Gaussian);
  auto cov = model.covariance();
  auto sizes = sweep_sizes();
  auto res = clt_rate_check(model, cov, sizes, 2000, 20260809);
  EXPECT_EQ(res.verdict, Verdict::Pass);
  const double band = kolmogorov_band(2000);
  for (const auto& [size, ks] : res.sweep) EXPECT_LE(ks, band);
}

TEST(CltRate, MaExponentialConverges) {
  auto model = ma_exponential();
  auto cov = model.covariance();
  auto sizes = sweep_sizes();
  auto res = clt_rate_check(model, cov, sizes, 2000, 20260809);
  EXPECT_EQ(res.verdict, Verdict::Pass);
  EXPECT_LE(res.details.at("final_ks"), 0.05);
  // The size-4 square of a skewed field is visibly non-normal.
  EXPECT_GT(res.sweep.front().second, res.details.at("final_ks"));
}

TEST(CltRate, RejectsUnsortedSizes) {
  auto model = FieldModel::iid(2, Innovation::Gaussian);
  auto cov = model.covariance();
  EXPECT_THROW(clt_rate_check(model, cov, std::vector<Index>{16, 4}, 100, 1),
               std::invalid_argument);
}

TEST(MomentBound, GaussianAnchor) {
  auto model = FieldModel::iid(2, Innovation::Gaussian);
  auto sizes = sweep_sizes();
  auto res = moment_bound_check(model, 1.0, sizes, 5000, 20260809);
  EXPECT_EQ(res.verdict, Verdict::Pass);
  // Pooled ratio within 5% of E|Z|^3 = 2 sqrt(2/pi).
  const double analytic = res.details.at("gaussian_analytic");
  EXPECT_NEAR(analytic, 1.5957691216057308, 1e-12);
  EXPECT_NEAR(res.details.at("pooled_ratio"), analytic, 0.05 * analytic);
}

TEST(MomentBound, SingleCellIsExactForRademacher) {
  auto model = FieldModel::iid(2, Innovation::Rademacher);
  std::vector<Index> sizes{1, 4, 16};
  auto res = moment_bound_check(model, 1.0, sizes, 500, 3);
  // |S| = 1 identically at a single cell, so the first ratio is exact.
  EXPECT_DOUBLE_EQ(res.sweep.front().second, 1.0);
}

TEST(MomentBound, BoundedRatiosForDependentField) {
  auto model = ma_exponential();
  auto sizes = sweep_sizes();
  auto res = moment_bound_check(model, 1.0, sizes, 2000, 20260809);
  EXPECT_EQ(res.verdict, Verdict::Pass);
  EXPECT_LE(res.details.at("ratio_max") / res.details.at("ratio_min"), 3.0);
}

TEST(MaximalInequality, IidGaussianTail) {
  auto model = FieldModel::iid(2, Innovation::Gaussian);
  const std::vector<double> grid{2.0, 3.0, 4.0};
  auto res = maximal_inequality_check(model, 4, 64, grid, 1.0, 10000, 20260809);
  EXPECT_EQ(res.verdict, Verdict::Pass);
  EXPECT_LE(res.details.at("fitted_c"), 10.0);
  EXPECT_EQ(res.details.at("anchored_exceedances"), 0.0);
  // Tail decreases along the grid.
  for (std::size_t i = 1; i < res.sweep.size(); ++i)
    EXPECT_LE(res.sweep[i].second, res.sweep[i - 1].second + 1e-12);
}

TEST(MaximalInequality, SingleCellIsTheInnovationTail) {
  // |V| = 1: the only sub-rectangle is the cell itself, so M(V) = |X|
  // and the empirical tail is the innovation's own.
  auto model = FieldModel::iid(1, Innovation::Gaussian);
  const std::vector<double> grid{1.0, 2.0};
  auto res = maximal_inequality_check(model, 1, 16, grid, 1.0, 20000, 11);
  EXPECT_NEAR(res.sweep[0].second, 2.0 * normal_cdf(-1.0), 0.02);
  EXPECT_NEAR(res.sweep[1].second, 2.0 * normal_cdf(-2.0), 0.01);
}

TEST(Checks, BitForBitReproducible) {
  auto model = FieldModel::iid(2, Innovation::Rademacher);
  auto cov = model.covariance();
  std::vector<Index> sizes{4, 16};
  auto a = clt_rate_check(model, cov, sizes, 400, 77);
  auto b = clt_rate_check(model, cov, sizes, 400, 77);
  ASSERT_EQ(a.sweep.size(), b.sweep.size());
  for (std::size_t i = 0; i < a.sweep.size(); ++i)
    EXPECT_EQ(a.sweep[i].second, b.sweep[i].second);
  auto m1 = moment_bound_check(model, 1.0, sizes, 300, 78);
  auto m2 = moment_bound_check(model, 1.0, sizes, 300, 78);
  EXPECT_EQ(m1.details.at("pooled_ratio"), m2.details.at("pooled_ratio"));
}

TEST(MaximalInequality, RejectsOversizedBruteWindow) {
  auto model = FieldModel::iid(2, Innovation::Gaussian);
  const std::vector<double> grid{2.0};
  EXPECT_THROW(maximal_inequality_check(model, 9, 16, grid, 1.0, 10, 1),
               std::invalid_argument);
}

TEST(LilTracker, GaussianMedianBand) {
  auto model = FieldModel::iid(2, Innovation::Gaussian);
  auto cov = model.covariance();
  Parameters p;
  BlockGeometry geom(p, 30);
  auto res = lil_tracker(model, cov, geom, 0.8, MultiIndex{256, 256}, 30, 20260809);
  EXPECT_EQ(res.verdict, Verdict::Informational);
  const double med = res.details.at("median_terminal_ratio");
  EXPECT_GE(med, 0.3);
  EXPECT_LE(med, 1.2);
}

TEST(TermBoundSuite, VerdictIsPureFunctionOfData) {
  // Synthetic three-scale data with known medians: decreasing statistics
  // pass, an increasing one fails, and re-running is idempotent.
  auto make = [](MultiIndex k, Index nvol, double val) {
    ScaleStatistics s;
    s.k = std::move(k);
    s.n_vol = nvol;
    const double root = std::sqrt(static_cast<double>(nvol));
    s.sum_abs_e = val * root;       // ratio == val
    s.t2_magnitude = val * root;
    s.sum_abs_w = val * root;
    s.sum_abs_v = (4.0 - val) * root;  // increasing across scales
    s.max_d = val * root;
    s.max_d_hat = val * root;
    s.max_m = val * root;
    s.max_m_hat = val * root;
    s.e_center_sq_norm = val;
    return s;
  };
  std::vector<std::vector<ScaleStatistics>> data;
  for (int rep = 0; rep < 7; ++rep) {
    std::vector<ScaleStatistics> row;
    row.push_back(make(MultiIndex{3, 3}, 2500, 3.0 + 0.01 * rep));
    row.push_back(make(MultiIndex{4, 4}, 16900, 2.0 + 0.01 * rep));
    row.push_back(make(MultiIndex{5, 5}, 78400, 1.0 + 0.01 * rep));
    data.push_back(std::move(row));
  }
  auto first = term_bound_suite(data);
  auto second = term_bound_suite(data);
  ASSERT_EQ(first.size(), 9u);
  for (std::size_t i = 0; i < first.size(); ++i) {
    EXPECT_EQ(first[i].verdict, second[i].verdict);
    if (first[i].name == "sum_abs_v") EXPECT_EQ(first[i].verdict, Verdict::Fail);
    else EXPECT_EQ(first[i].verdict, Verdict::Pass) << first[i].name;
  }
  EXPECT_THROW(term_bound_suite({{make(MultiIndex{3, 3}, 2500, 1.0)}}),
               std::invalid_argument);
}
