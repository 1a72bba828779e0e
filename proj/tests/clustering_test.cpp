/*
 * Copyright 2026 The masala Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "core/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "core/error.hpp"
#include "support/test_support.hpp"

namespace masala {
namespace {

using testing::Micro10NormalizedValues;
using testing::Micro10Predictions;

struct Fixture {
  std::vector<double> x, f;
  std::vector<NeighborhoodProfile> profiles;
  DissimilarityMatrix delta;
  Fixture(std::vector<double> xv, std::vector<double> fv, double tau = 0.1)
      : x(std::move(xv)), f(std::move(fv)) {
    profiles = BuildProfiles(x, f, tau);
    delta = PairwiseDissimilarity(profiles, x);
  }
  FeatureData data() const { return {x, f, delta}; }
};

Fixture Micro(double tau = 0.1) { return Fixture(Micro10NormalizedValues(), Micro10Predictions(), tau); }

std::vector<std::size_t> Range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v(b - a);
  std::iota(v.begin(), v.end(), a);
  return v;
}

// Independent OLS + population RMSE over one index set.
double RefRmse(const std::vector<double>& x, const std::vector<double>& f,
               const std::vector<std::size_t>& idx) {
  std::vector<double> xs, ys;
  for (auto i : idx) xs.push_back(x[i]), ys.push_back(f[i]);
  const auto [a, b] = testing::SimpleWls(xs, ys, {});
  long double ss = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) ss += std::pow(a * xs[k] + b - ys[k], 2);
  return static_cast<double>(std::sqrt(ss / xs.size()));
}

void ExpectPartition(const std::vector<Cluster>& clusters, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& c : clusters) {
    ASSERT_FALSE(c.members.empty());
    EXPECT_TRUE(std::is_sorted(c.members.begin(), c.members.end()));
    EXPECT_TRUE(std::binary_search(c.members.begin(), c.members.end(), c.medoid));
    for (auto i : c.members) ++seen[i];
  }
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(seen[i], 1) << "row " << i;
}

void ExpectIntervalsMatch(const std::vector<Cluster>& clusters, const std::vector<double>& x) {
  for (const auto& c : clusters) {
    double lo = INFINITY, hi = -INFINITY;
    for (auto i : c.members) lo = std::min(lo, x[i]), hi = std::max(hi, x[i]);
    EXPECT_EQ(c.lo, lo);
    EXPECT_EQ(c.hi, hi);
  }
}

// Residuals of each cluster line are orthogonal to 1 and x.
void ExpectOlsResiduals(const std::vector<Cluster>& clusters, const std::vector<double>& x,
                        const std::vector<double>& f) {
  for (const auto& c : clusters) {
    long double r1 = 0, rx = 0;
    for (auto i : c.members) {
      const long double r = f[i] - c.line(x[i]);
      r1 += r;
      rx += r * x[i];
    }
    EXPECT_NEAR(static_cast<double>(r1), 0.0, 1e-9);
    EXPECT_NEAR(static_cast<double>(rx), 0.0, 1e-9);
  }
}

TEST(InitMedoids, FormulaPositions) {
  const auto x = Micro10NormalizedValues();
  EXPECT_EQ(InitMedoids(x, 2), (std::vector<std::size_t>{2, 7}));
  EXPECT_EQ(InitMedoids(x, 5), (std::vector<std::size_t>{1, 3, 5, 7, 9}));
  EXPECT_EQ(InitMedoids(x, 10), Range(0, 10));
}

TEST(InitMedoids, SortsByValueThenRow) {
  const std::vector<double> x = {0.9, 0.1, 0.5, 0.1, 0.0, 1.0};
  // sorted rows: 4, 1, 3, 2, 0, 5
  EXPECT_EQ(InitMedoids(x, 2), (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(InitMedoids(x, 3), (std::vector<std::size_t>{1, 2, 5}));
}

TEST(InitMedoids, Errors) {
  const auto x = Micro10NormalizedValues();
  EXPECT_THROW(InitMedoids(x, 1), Error);
  EXPECT_THROW(InitMedoids(x, 11), Error);
}

TEST(Assign, EquidistantPointJoinsLowerValueMedoid) {
  // Row 1 is equally dissimilar to medoids 0 and 2; row 2 has the smaller value.
  const std::vector<double> x = {0.8, 0.5, 0.2};
  const std::vector<double> f = {1.0, 2.0, 3.0};
  const DissimilarityMatrix d(3, {0, 1, 2, 1, 0, 1, 2, 1, 0}, {});
  const FeatureData data{x, f, d};
  const std::vector<std::size_t> medoids = {0, 2};
  const auto clusters = Assign(data, medoids);
  EXPECT_EQ(clusters[0].members, (std::vector<std::size_t>{0}));
  EXPECT_EQ(clusters[1].members, (std::vector<std::size_t>{1, 2}));
}

TEST(Assign, EqualValuesTieToLowerRow) {
  const std::vector<double> x = {0.5, 0.5, 0.1};
  const std::vector<double> f = {1.0, 2.0, 3.0};
  const DissimilarityMatrix d(3, {0, 0, 1, 0, 0, 1, 1, 1, 0}, {});
  const FeatureData data{x, f, d};
  const std::vector<std::size_t> medoids = {1, 0};
  const auto clusters = Assign(data, medoids);
  EXPECT_EQ(clusters[0].members, (std::vector<std::size_t>{1}));
  EXPECT_EQ(clusters[1].members, (std::vector<std::size_t>{0, 2}));
}

TEST(Assign, Micro10SegmentsMatchBruteForceArgmin) {
  const auto fx = Micro();
  const std::vector<std::size_t> medoids = {2, 7};
  const auto clusters = Assign(fx.data(), medoids);
  EXPECT_EQ(clusters[0].members, Range(0, 5));
  EXPECT_EQ(clusters[1].members, Range(5, 10));
  for (std::size_t i = 0; i < 10; ++i) {
    const bool left = fx.delta(i, 2) <= fx.delta(i, 7);
    EXPECT_EQ(left, i < 5) << i;
  }
}

TEST(Assign, SingleMedoidTakesAll) {
  const auto fx = Micro();
  const std::vector<std::size_t> medoids = {4};
  const auto clusters = Assign(fx.data(), medoids);
  ASSERT_EQ(clusters.size(), 1u);
  EXPECT_EQ(clusters[0].members, Range(0, 10));
}

TEST(Assign, DuplicateMedoids) {
  const auto fx = Micro();
  const std::vector<std::size_t> medoids = {3, 3};
  EXPECT_THROW(Assign(fx.data(), medoids), Error);
}

TEST(ClusteringCost, Micro10Segments) {
  const auto fx = Micro();
  const std::vector<std::size_t> medoids = {2, 7};
  EXPECT_NEAR(ClusteringCost(Assign(fx.data(), medoids), fx.x, fx.f), 0.0, 1e-12);
}

TEST(ClusteringCost, SingleClusterMatchesOlsOracle) {
  const auto fx = Micro();
  const std::vector<std::size_t> medoids = {4};
  const double j = ClusteringCost(Assign(fx.data(), medoids), fx.x, fx.f);
  const double ref = RefRmse(fx.x, fx.f, Range(0, 10));
  EXPECT_GT(j, 0.0);
  EXPECT_NEAR(j, ref, 1e-12);
  EXPECT_NEAR(ref, 1.4354811251305470, 1e-12);  // frozen from the reference
}

TEST(ClusteringCost, ConstantPredictions) {
  Fixture fx(Micro10NormalizedValues(), std::vector<double>(10, 2.5));
  for (std::size_t k : {2u, 3u, 5u}) {
    EXPECT_NEAR(ClusteringCost(Assign(fx.data(), InitMedoids(fx.x, k)), fx.x, fx.f), 0.0, 1e-12);
  }
}

TEST(ClusteringCost, UnfittedClusterIsError) {
  Cluster c;
  c.members = {0, 1};
  const std::vector<Cluster> cs = {c};
  const auto x = Micro10NormalizedValues();
  EXPECT_THROW(ClusteringCost(cs, x, x), Error);
}

TEST(OptimizeMedoids, LocalOptimumUnchanged) {
  const auto fx = Micro();
  const std::vector<std::size_t> medoids = {2, 7};
  const auto start = Assign(fx.data(), medoids);
  const auto out = OptimizeMedoids(fx.data(), start);
  ASSERT_EQ(out.clusters.size(), 2u);
  EXPECT_EQ(out.cost_history.size(), 1u);
  EXPECT_EQ(out.clusters[0].members, start[0].members);
  EXPECT_EQ(out.clusters[1].members, start[1].members);
  EXPECT_EQ(out.clusters[0].medoid, 2u);
  EXPECT_EQ(out.clusters[1].medoid, 7u);
}

TEST(OptimizeMedoids, BadStartReachesEnumeratedOptimum) {
  const auto fx = Micro();
  const std::vector<std::size_t> medoids = {0, 1};
  const auto out = OptimizeMedoids(fx.data(), Assign(fx.data(), medoids));
  double best = INFINITY;
  for (std::size_t a = 0; a < 10; ++a)
    for (std::size_t b = a + 1; b < 10; ++b) {
      const std::vector<std::size_t> m = {a, b};
      best = std::min(best, ClusteringCost(Assign(fx.data(), m), fx.x, fx.f));
    }
  EXPECT_NEAR(best, 0.0, 1e-12);
  EXPECT_NEAR(out.cost, best, 1e-12);
}

TEST(OptimizeMedoids, CostHistoryStrictlyDecreasing) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(30), f(30);
    for (auto& v : x) v = u(rng);
    for (std::size_t i = 0; i < 30; ++i) f[i] = std::sin(6 * x[i]) + 0.1 * u(rng);
    Fixture fx(x, f);
    const auto start = Assign(fx.data(), InitMedoids(fx.x, 4));
    const double j0 = ClusteringCost(start, fx.x, fx.f);
    const auto out = OptimizeMedoids(fx.data(), start);
    EXPECT_EQ(out.cost_history.front(), j0);
    EXPECT_EQ(out.cost_history.back(), out.cost);
    for (std::size_t k = 1; k < out.cost_history.size(); ++k)
      EXPECT_LT(out.cost_history[k], out.cost_history[k - 1]);
    EXPECT_LE(out.cost, j0);
    ExpectPartition(out.clusters, 30);
    EXPECT_NEAR(out.cost, ClusteringCost(out.clusters, fx.x, fx.f), 0.0);
  }
}

TEST(SparsityThreshold, EvenlySpaced) {
  EXPECT_NEAR(SparsityThreshold(Micro10NormalizedValues()), 330.0 / 900.0, 1e-12);
}

TEST(SparsityThreshold, SmallCases) {
  EXPECT_EQ(SparsityThreshold(std::vector<double>(5, 0.3)), 0.0);
  EXPECT_DOUBLE_EQ(SparsityThreshold(std::vector<double>{0.0, 1.0}), 0.5);
  EXPECT_THROW(SparsityThreshold(std::vector<double>{0.2}), Error);
}

TEST(SparsityThreshold, MatchesDoubleLoop) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(2 + rng() % 60);
    for (auto& v : x) v = u(rng);
    long double s = 0;
    for (double a : x)
      for (double b : x) s += std::fabs(a - b);
    EXPECT_NEAR(SparsityThreshold(x), static_cast<double>(s / (x.size() * x.size())), 1e-12);
  }
}

Cluster Make(const FeatureData& data, std::vector<std::size_t> members) {
  Cluster c;
  c.members = std::move(members);
  Refit(c, data);
  c.medoid = RecomputeMedoid(c, data.delta);
  return c;
}

TEST(EnforceConstraints, SatisfiedInputUnchanged) {
  const auto fx = Micro();
  FeatureClustering fc;
  fc.clusters = {Make(fx.data(), Range(0, 5)), Make(fx.data(), Range(5, 10))};
  const auto out = EnforceConstraints(fx.data(), fc, SparsityThreshold(fx.x));
  EXPECT_TRUE(out.constraint_satisfied);
  ASSERT_EQ(out.clusters.size(), 2u);
  EXPECT_EQ(out.clusters[0].members, Range(0, 5));
  EXPECT_EQ(out.clusters[1].members, Range(5, 10));
  EXPECT_NEAR(out.cost, 0.0, 1e-12);
}

TEST(EnforceConstraints, ContainmentAbsorbs) {
  // A spans [0, 0.9], B lies inside it on [0.3, 0.5].
  std::vector<double> x = testing::Iota(11, 0.1);
  const std::vector<double> f(11, 1.0);
  Fixture fx(x, f);
  FeatureClustering fc;
  fc.clusters = {Make(fx.data(), {0, 1, 2, 6, 7, 8, 9}), Make(fx.data(), {3, 4, 5}),
                 Make(fx.data(), {10})};
  const auto out = EnforceConstraints(fx.data(), fc, 0.0);
  ASSERT_EQ(out.clusters.size(), 2u);
  EXPECT_EQ(out.clusters[0].members, Range(0, 10));
  EXPECT_EQ(out.clusters[1].members, (std::vector<std::size_t>{10}));
}

TEST(EnforceConstraints, OverlapSplitsAtMidpoint) {
  const std::vector<double> x = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  const std::vector<double> f = {0, 1, 2, 3, 4, 5, 6, 7};
  Fixture fx(x, f);
  FeatureClustering fc;
  // Left [0, 0.5], right [0.2, 0.7]; shared interval [0.2, 0.5], midpoint 0.35.
  fc.clusters = {Make(fx.data(), {0, 1, 3, 5}), Make(fx.data(), {2, 4, 6, 7})};
  const auto out = EnforceConstraints(fx.data(), fc, 0.0);
  ASSERT_EQ(out.clusters.size(), 2u);
  EXPECT_EQ(out.clusters[0].members, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(out.clusters[1].members, (std::vector<std::size_t>{4, 5, 6, 7}));
}

TEST(EnforceConstraints, MidpointValueGoesRight) {
  const std::vector<double> x = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  const std::vector<double> f = {0, 1, 2, 3, 4, 5};
  Fixture fx(x, f);
  FeatureClustering fc;
  // Left [0, 0.6], right [0.2, 1.0]; midpoint 0.4 is row 2's value.
  fc.clusters = {Make(fx.data(), {0, 2, 3}), Make(fx.data(), {1, 4, 5})};
  const auto out = EnforceConstraints(fx.data(), fc, 0.0);
  ASSERT_EQ(out.clusters.size(), 2u);
  EXPECT_EQ(out.clusters[0].members, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(out.clusters[1].members, (std::vector<std::size_t>{2, 3, 4, 5}));
}

TEST(EnforceConstraints, SparseClusterMergesWithCheaperNeighbour) {
  // Row 5 alone is sparse. Joining the left segment breaks its line, joining
  // the right one keeps the fit exact.
  const std::vector<double> x = testing::Iota(12, 1.0 / 11);
  std::vector<double> f(12);
  for (std::size_t i = 0; i < 12; ++i) f[i] = i < 5 ? 0.0 : double(i);
  Fixture fx(x, f);
  FeatureClustering fc;
  fc.clusters = {Make(fx.data(), Range(0, 5)), Make(fx.data(), {5}), Make(fx.data(), Range(6, 12))};
  const auto out = EnforceConstraints(fx.data(), fc, 0.3);
  ASSERT_EQ(out.clusters.size(), 2u);
  EXPECT_EQ(out.clusters[0].members, Range(0, 5));
  EXPECT_EQ(out.clusters[1].members, Range(5, 12));
  EXPECT_TRUE(out.constraint_satisfied);
}

TEST(EnforceConstraints, Micro10FromFiveClusters) {
  const auto fx = Micro();
  FeatureClustering fc;
  fc.clusters = Assign(fx.data(), InitMedoids(fx.x, 5));
  const auto out = EnforceConstraints(fx.data(), OptimizeMedoids(fx.data(), fc.clusters),
                                      SparsityThreshold(fx.x));
  EXPECT_TRUE(out.constraint_satisfied);
  EXPECT_LE(out.k(), 2u);
  // Enumerated two-segment partitions of the sorted rows: the best J is 0
  // (the knee row lies on both lines, so cuts 4 and 5 are both exact).
  double best = INFINITY;
  for (std::size_t cut = 1; cut < 10; ++cut) {
    best = std::min(best, RefRmse(fx.x, fx.f, Range(0, cut)) + RefRmse(fx.x, fx.f, Range(cut, 10)));
  }
  EXPECT_NEAR(best, 0.0, 1e-12);
  ASSERT_EQ(out.k(), 2u);
  EXPECT_NEAR(out.cost, best, 1e-9);
}

TEST(Coverage, Definition) {
  Cluster c;
  c.lo = 0.2;
  c.hi = 0.5;
  EXPECT_DOUBLE_EQ(Coverage(c, 1.0), 0.3);
  EXPECT_DOUBLE_EQ(Coverage(c, 0.0), 1.0);
  c.members = {1};
  EXPECT_TRUE(IsSparse(c, 4, 0.3));
  EXPECT_FALSE(IsSparse(c, 3, 0.3));
}

TEST(AutoCluster, Micro10RecoversTwoSegments) {
  for (double tau : {0.1, 0.2}) {
    const auto fx = Micro(tau);
    for (std::size_t k0 : {2u, 5u, 10u}) {
      const auto out = AutoCluster(fx.data(), k0);
      ASSERT_EQ(out.k(), 2u) << "K0=" << k0 << " tau=" << tau;
      EXPECT_LE(out.cost, 1e-9);
      EXPECT_EQ(out.clusters[0].members, Range(0, 5));
      EXPECT_EQ(out.clusters[1].members, Range(5, 10));
      EXPECT_EQ(out.k_sequence.front(), k0);
      EXPECT_EQ(out.k_sequence.back(), 2u);
      EXPECT_TRUE(out.constraint_satisfied);
      EXPECT_NEAR(out.clusters[0].line.slope, 9.0, 1e-9);
      EXPECT_NEAR(out.clusters[1].line.slope, -9.0, 1e-9);
    }
  }
}

TEST(AutoCluster, ExactLineCollapses) {
  std::vector<double> x = Micro10NormalizedValues(), f(10);
  for (std::size_t i = 0; i < 10; ++i) f[i] = 3 * x[i] + 1;
  Fixture fx(x, f);
  // Any split of an exact line costs 0. Small clusters from K0 = 5 or 10 are
  // merged down to one; K0 = 2 yields two equal halves that pass every check.
  const std::pair<std::size_t, std::size_t> expected[] = {{2, 2}, {5, 1}, {10, 1}};
  for (const auto& [k0, k] : expected) {
    const auto out = AutoCluster(fx.data(), k0);
    EXPECT_NEAR(out.cost, 0.0, 1e-9);
    EXPECT_EQ(out.k(), k) << k0;
    EXPECT_TRUE(out.constraint_satisfied);
  }
}

TEST(AutoCluster, InitialKAboveN) {
  const auto fx = Micro();
  EXPECT_EQ(AutoCluster(fx.data(), 50).k(), 2u);
  EXPECT_THROW(AutoCluster(fx.data(), 1), Error);
}

RunConfig Defaults() { return RunConfig{}; }

Dataset TwoFeatureData(bool duplicate) {
  Eigen::MatrixXd x(10, 2);
  std::vector<double> f(10);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = i;
    x(i, 1) = duplicate ? i : (i * 7) % 10;  // a permutation: f is not linear in it
    f[i] = testing::Micro10(i);
  }
  return Normalize(MakeDataset(x, {"a", "b"}, f));
}

TEST(ClusterAll, SingleFeature) {
  const auto model = ClusterAll(testing::Micro10(), Defaults());
  ASSERT_EQ(model.per_feature.size(), 1u);
  EXPECT_EQ(model.per_feature[0].k(), 2u);
  EXPECT_EQ(model.fingerprint, testing::Micro10().fingerprint);
  EXPECT_EQ(model.feature_names, (std::vector<std::string>{"x"}));
}

TEST(ClusterAll, DuplicateColumnsClusterIdentically) {
  const auto model = ClusterAll(TwoFeatureData(true), Defaults());
  ASSERT_EQ(model.per_feature.size(), 2u);
  const auto& a = model.per_feature[0];
  const auto& b = model.per_feature[1];
  ASSERT_EQ(a.k(), b.k());
  EXPECT_EQ(a.cost, b.cost);
  for (std::size_t k = 0; k < a.k(); ++k) {
    EXPECT_EQ(a.clusters[k].members, b.clusters[k].members);
    EXPECT_EQ(a.clusters[k].line.slope, b.clusters[k].line.slope);
  }
}

TEST(ClusterAll, PiecewiseAndLinearFeatures) {
  Eigen::MatrixXd x(10, 2);
  std::vector<double> f(10);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = i;
    x(i, 1) = i;
    f[i] = testing::Micro10(i);
  }
  // Feature b sees an exactly linear target when clustered on its own.
  const auto model = ClusterAll(Normalize(MakeDataset(x, {"a", "b"}, f)), Defaults());
  EXPECT_EQ(model.per_feature[0].k(), 2u);
  std::vector<double> lin(10);
  for (int i = 0; i < 10; ++i) lin[i] = 3.0 * i / 9.0 + 1.0;
  const auto single = ClusterFeature(Micro10NormalizedValues(), lin, Defaults(), 1);
  EXPECT_EQ(single.k(), 1u);
  EXPECT_EQ(single.feature_index, 1u);
}

TEST(ClusterAll, ErrorsNameTheFeature) {
  Eigen::MatrixXd x(2, 1);
  x << 0, 1;
  const Dataset d = Normalize(MakeDataset(x, {"tiny"}, std::vector<double>{0, 1}));
  try {
    ClusterAll(d, Defaults());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'tiny'"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ClusterAll(testing::Micro10Raw(), Defaults()), Error);
}

TEST(ClusterAll, Deterministic) {
  std::mt19937_64 rng(51);
  const Eigen::MatrixXd x = testing::UniformFeatures(120, 3, rng);
  std::vector<double> f(120);
  for (Eigen::Index i = 0; i < 120; ++i) {
    std::vector<double> row = {x(i, 0), x(i, 1), x(i, 2)};
    f[static_cast<std::size_t>(i)] = testing::KneeSurface(row);
  }
  const Dataset d = Normalize(MakeDataset(x, testing::FeatureNames(3), f));
  const auto a = ClusterAll(d, Defaults());
  const auto b = ClusterAll(d, Defaults());
  for (std::size_t m = 0; m < 3; ++m) {
    ASSERT_EQ(a.per_feature[m].k(), b.per_feature[m].k());
    EXPECT_EQ(a.per_feature[m].cost, b.per_feature[m].cost);
    for (std::size_t k = 0; k < a.per_feature[m].k(); ++k) {
      EXPECT_EQ(a.per_feature[m].clusters[k].members, b.per_feature[m].clusters[k].members);
      EXPECT_EQ(a.per_feature[m].clusters[k].medoid, b.per_feature[m].clusters[k].medoid);
    }
  }
}

TEST(ClusteringProperty, PartitionGeometryAndOls) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 15 + rng() % 60;
    std::vector<double> x(n), f(n);
    for (auto& v : x) v = u(rng);
    const double lo = *std::min_element(x.begin(), x.end());
    const double hi = *std::max_element(x.begin(), x.end());
    for (auto& v : x) v = (v - lo) / (hi - lo);
    const double k1 = 0.2 + 0.6 * u(rng);
    for (std::size_t i = 0; i < n; ++i) f[i] = (x[i] < k1 ? 4 * x[i] : 4 * k1 - 3 * (x[i] - k1)) + 0.05 * g(rng);
    Fixture fx(x, f);
    const auto out = AutoCluster(fx.data(), 2 + rng() % 9);
    ExpectPartition(out.clusters, n);
    ExpectIntervalsMatch(out.clusters, x);
    ExpectOlsResiduals(out.clusters, x, f);
    EXPECT_TRUE(IntervalsDisjoint(out.clusters));
    EXPECT_TRUE(out.constraint_satisfied);
    EXPECT_TRUE(ConstraintsHold(out.clusters, x, SparsityThreshold(x)));
    EXPECT_NEAR(out.cost, ClusteringCost(out.clusters, x, f), 0.0);
  }
}

}  // namespace
}  // namespace masala
