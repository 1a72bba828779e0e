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

#include "core/dissimilarity.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "core/error.hpp"
#include "support/test_support.hpp"

namespace masala {
namespace {

using testing::Micro10NormalizedValues;
using testing::Micro10Predictions;

// Brute-force reference: ball by full scan, 3-nearest expansion by full
// sort, tricube weights, closed-form weighted regression.
struct RefProfile {
  std::vector<std::size_t> members;
  double slope, intercept;
};

RefProfile ReferenceProfile(const std::vector<double>& x, const std::vector<double>& y,
                            std::size_t i, double tau) {
  RefProfile p;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (std::fabs(x[j] - x[i]) <= tau) p.members.push_back(j);
  const bool expanded = p.members.size() < 3;
  if (expanded) {
    std::vector<std::size_t> all(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) all[j] = j;
    std::sort(all.begin(), all.end(), [&](std::size_t a, std::size_t b) {
      const double da = std::fabs(x[a] - x[i]), db = std::fabs(x[b] - x[i]);
      return da != db ? da < db : a < b;
    });
    p.members.assign(all.begin(), all.begin() + 3);
    std::sort(p.members.begin(), p.members.end());
  }
  double radius = tau;
  if (expanded) {
    for (auto j : p.members) radius = std::max(radius, 2.0 * std::fabs(x[j] - x[i]));
  }
  std::vector<double> xs, ys, ws;
  for (auto j : p.members) {
    xs.push_back(x[j]);
    ys.push_back(y[j]);
    ws.push_back(testing::TricubeWeight(std::fabs(x[j] - x[i]), radius));
  }
  // Zero spread among weighted points: slope 0, weighted mean.
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t k = 0; k < xs.size(); ++k)
    if (ws[k] > 0) lo = std::min(lo, xs[k]), hi = std::max(hi, xs[k]);
  if (lo == hi) {
    double sw = 0, sy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) sw += ws[k], sy += ws[k] * ys[k];
    p.slope = 0;
    p.intercept = sy / sw;
  } else {
    std::tie(p.slope, p.intercept) = testing::SimpleWls(xs, ys, ws);
  }
  return p;
}

// Eq-by-eq reference for the dissimilarity matrix.
std::vector<std::vector<double>> ReferenceDelta(const std::vector<RefProfile>& p,
                                                const std::vector<double>& x) {
  const std::size_t n = x.size();
  auto term = [&](std::size_t t, std::size_t i, std::size_t j) {
    if (t == 0) return std::sqrt(std::pow(p[i].slope - p[j].slope, 2) + std::pow(p[i].intercept - p[j].intercept, 2));
    if (t == 1) return std::fabs(x[i] - x[j]);
    return std::fabs(double(p[i].members.size()) - double(p[j].members.size()));
  };
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t t = 0; t < 3; ++t) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) lo = std::min(lo, term(t, i, j)), hi = std::max(hi, term(t, i, j));
    if (hi <= lo) continue;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) d[i][j] += (term(t, i, j) - lo) / (hi - lo);
  }
  return d;
}

TEST(BuildProfiles, Micro10LeftSegmentSlope) {
  const auto x = Micro10NormalizedValues();
  const auto f = Micro10Predictions();
  const auto profiles = BuildProfiles(x, f, 0.2);
  ASSERT_EQ(profiles.size(), 10u);
  const auto& p = profiles[2];
  EXPECT_EQ(p.point_index, 2u);
  EXPECT_EQ(p.neighborhood_indices, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_NEAR(p.w.slope, 9.0, 1e-9);
  EXPECT_NEAR(p.w.intercept, 0.0, 1e-9);
  EXPECT_NEAR(profiles[7].w.slope, -9.0, 1e-9);
}

TEST(BuildProfiles, KneeAgainstWlsOracle) {
  const auto x = Micro10NormalizedValues();
  const auto f = Micro10Predictions();
  const auto p = BuildProfiles(x, f, 0.2)[4];
  EXPECT_EQ(p.neighborhood_indices, (std::vector<std::size_t>{3, 4, 5}));
  EXPECT_EQ(p.radius, 0.2);
  // Independent 3-point weighted system. The two neighbours sit symmetrically
  // at distance 1/9 with equal predictions, so the slope vanishes.
  const double w = testing::TricubeWeight(1.0 / 9.0, 0.2);
  const std::vector<double> xs = {x[3], x[4], x[5]}, ys = {3, 4, 3}, ws = {w, 1.0, w};
  const auto [slope, intercept] = testing::SimpleWls(xs, ys, ws);
  EXPECT_NEAR(slope, 0.0, 1e-12);
  EXPECT_NEAR(intercept, (6.0 * w + 4.0) / (2.0 * w + 1.0), 1e-12);
  EXPECT_NEAR(p.w.slope, slope, 1e-9);
  EXPECT_NEAR(p.w.intercept, intercept, 1e-9);
  EXPECT_NEAR(p.w.intercept, 3.46783234693652, 1e-12);  // frozen
}

TEST(BuildProfiles, FlatPredictions) {
  const auto x = Micro10NormalizedValues();
  const std::vector<double> f(10, 5.0);
  for (const auto& p : BuildProfiles(x, f, 0.1)) {
    EXPECT_NEAR(p.w.slope, 0.0, 1e-12);
    EXPECT_NEAR(p.w.intercept, 5.0, 1e-12);
  }
}

TEST(BuildProfiles, ExpandsToThreeNearestWithLowerIndexTies) {
  // Points 0 and 2 are equally far from 1; with tau tiny only 1 is in the
  // ball, the expansion takes {0, 1, 2}. For point 0, ties between 2 and 3
  // would go to the lower index.
  const std::vector<double> x = {0.0, 0.5, 1.0, 1.0};
  const std::vector<double> f = {0.0, 1.0, 2.0, 2.0};
  const auto profiles = BuildProfiles(x, f, 0.01);
  EXPECT_EQ(profiles[1].neighborhood_indices, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(profiles[0].neighborhood_indices, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(profiles[2].neighborhood_indices, (std::vector<std::size_t>{1, 2, 3}));
  for (const auto& p : profiles) {
    EXPECT_GE(p.neighborhood_size, 3u);
    EXPECT_TRUE(std::binary_search(p.neighborhood_indices.begin(), p.neighborhood_indices.end(),
                                   p.point_index));
  }
}

TEST(BuildProfiles, ZeroSpreadIsWeightedMean) {
  const std::vector<double> x = {0.3, 0.3, 0.3, 1.0};
  const std::vector<double> f = {1.0, 2.0, 6.0, 0.0};
  const auto p = BuildProfiles(x, f, 0.1)[0];
  EXPECT_EQ(p.w.slope, 0.0);
  EXPECT_NEAR(p.w.intercept, 3.0, 1e-12);
}

TEST(BuildProfiles, Errors) {
  const std::vector<double> two = {0.0, 1.0};
  EXPECT_THROW(BuildProfiles(two, two, 0.1), Error);
  const auto x = Micro10NormalizedValues();
  EXPECT_THROW(BuildProfiles(x, x, 0.0), Error);
  EXPECT_THROW(BuildProfiles(x, std::vector<double>(9, 0.0), 0.1), Error);
}

TEST(BuildProfiles, MatchesReferenceOnRandomInputs) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng() % 40;
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = std::round(u(rng) * 40) / 40;  // duplicates on purpose
    for (auto& v : y) v = g(rng);
    const double tau = 0.02 + 0.3 * u(rng);
    const auto profiles = BuildProfiles(x, y, tau);
    for (std::size_t i = 0; i < n; ++i) {
      const auto ref = ReferenceProfile(x, y, i, tau);
      EXPECT_EQ(profiles[i].neighborhood_indices, ref.members);
      EXPECT_NEAR(profiles[i].w.slope, ref.slope, 1e-7 * (1 + std::fabs(ref.slope)));
      EXPECT_NEAR(profiles[i].w.intercept, ref.intercept, 1e-7 * (1 + std::fabs(ref.intercept)));
    }
  }
}

TEST(BuildProfiles, RemovingDistantPointLeavesProfileUnchanged) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 12 + rng() % 20;
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng) * 10;
    const double tau = 0.15;
    const auto full = BuildProfiles(x, y, tau);
    const std::size_t i = rng() % n;
    // Drop the farthest point from x_i if it lies beyond the radius.
    std::size_t far = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (std::fabs(x[j] - x[i]) > std::fabs(x[far] - x[i])) far = j;
    if (std::fabs(x[far] - x[i]) <= full[i].radius) continue;
    std::vector<double> x2, y2;
    for (std::size_t j = 0; j < n; ++j)
      if (j != far) x2.push_back(x[j]), y2.push_back(y[j]);
    const std::size_t i2 = i < far ? i : i - 1;
    const auto reduced = BuildProfiles(x2, y2, tau)[i2];
    EXPECT_EQ(reduced.w.slope, full[i].w.slope);
    EXPECT_EQ(reduced.w.intercept, full[i].w.intercept);
    EXPECT_EQ(reduced.neighborhood_size, full[i].neighborhood_size);
  }
}

TEST(PairwiseDissimilarity, Micro10OrderingAndValues) {
  const auto x = Micro10NormalizedValues();
  const auto f = Micro10Predictions();
  const auto profiles = BuildProfiles(x, f, 0.2);
  const auto delta = PairwiseDissimilarity(profiles, x);
  std::vector<RefProfile> ref;
  for (std::size_t i = 0; i < 10; ++i) ref.push_back(ReferenceProfile(x, f, i, 0.2));
  const auto expected = ReferenceDelta(ref, x);
  EXPECT_LT(delta(0, 1), delta(0, 9));
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(delta(i, i), 0.0);
    for (std::size_t j = 0; j < 10; ++j) EXPECT_NEAR(delta(i, j), expected[i][j], 1e-9);
  }
}

TEST(PairwiseDissimilarity, ExactLineReducesToDistanceTerm) {
  const auto x = testing::Iota(11, 0.1);
  std::vector<double> f(11);
  for (std::size_t i = 0; i < 11; ++i) f[i] = 3 * x[i] + 1;
  // tau large enough that every neighbourhood is the whole set.
  const auto delta = PairwiseDissimilarity(BuildProfiles(x, f, 1.0), x);
  EXPECT_EQ(delta.term_ranges()[DissimilarityMatrix::kDensity].min,
            delta.term_ranges()[DissimilarityMatrix::kDensity].max);
  EXPECT_EQ(delta.term_ranges()[DissimilarityMatrix::kLinearity].min,
            delta.term_ranges()[DissimilarityMatrix::kLinearity].max);
  for (std::size_t i = 0; i < 11; ++i)
    for (std::size_t j = 0; j < 11; ++j)
      EXPECT_NEAR(delta(i, j), i == j ? 0.0 : (std::fabs(x[i] - x[j]) - 0.1) / 0.9, 1e-12);
  for (std::size_t j = 1; j < 11; ++j) EXPECT_LE(delta(0, j - 1), delta(0, j));
}

TEST(PairwiseDissimilarity, ConstantTermsContributeZero) {
  const std::vector<double> x = {0.0, 0.5, 1.0};
  const std::vector<double> f = {2.0, 2.0, 2.0};
  const auto delta = PairwiseDissimilarity(BuildProfiles(x, f, 1.0), x);
  EXPECT_DOUBLE_EQ(delta(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(delta(0, 1), 0.0);
}

TEST(PairwiseDissimilarity, PluggableDistance) {
  const auto x = Micro10NormalizedValues();
  const auto f = Micro10Predictions();
  const auto profiles = BuildProfiles(x, f, 0.2);
  const auto squared = [](double a, double b) { return (a - b) * (a - b); };
  const auto delta = PairwiseDissimilarity(profiles, x, squared);
  EXPECT_DOUBLE_EQ(delta.term_ranges()[DissimilarityMatrix::kFeatureDistance].max, 1.0);
  EXPECT_NEAR(delta.term_ranges()[DissimilarityMatrix::kFeatureDistance].min, 1.0 / 81, 1e-15);
}

TEST(PairwiseDissimilarity, LengthMismatch) {
  const auto x = Micro10NormalizedValues();
  const auto profiles = BuildProfiles(x, Micro10Predictions(), 0.2);
  EXPECT_THROW(PairwiseDissimilarity(profiles, std::vector<double>(9, 0.0)), Error);
}

TEST(DissimilarityProperty, ThresholdSensitivityKeepsSegmentsApart) {
  // Same-segment neighbours stay closer than cross-segment pairs for every tau.
  const auto x = Micro10NormalizedValues();
  const auto f = Micro10Predictions();
  for (double tau : {0.05, 0.1, 0.2, 0.3}) {
    const auto delta = PairwiseDissimilarity(BuildProfiles(x, f, tau), x);
    EXPECT_LT(delta(0, 2), delta(0, 8)) << tau;
    EXPECT_LT(delta(9, 7), delta(9, 1)) << tau;
  }
}

}  // namespace
}  // namespace masala
