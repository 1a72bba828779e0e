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
#include <numeric>

#include "core/error.hpp"

namespace masala {

double AbsoluteDistance(double a, double b) { return std::abs(a - b); }

std::vector<NeighborhoodProfile> BuildProfiles(std::span<const double> feature_values,
                                               std::span<const double> predictions,
                                               double threshold) {
  const std::size_t n = feature_values.size();
  if (n < kMinNeighborhood) {
    Fail(ErrorCode::kInvalidArgument, "local profiles need at least 3 points, got " +
                                          std::to_string(n));
  }
  if (predictions.size() != n) Fail(ErrorCode::kInvalidArgument, "prediction length mismatch");
  if (!(threshold > 0.0)) Fail(ErrorCode::kInvalidArgument, "neighbourhood threshold must be > 0");

  // Rows sorted by value let each ball be found by expanding from the centre.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return feature_values[a] < feature_values[b];
  });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  std::vector<NeighborhoodProfile> profiles(n);
  std::vector<double> weights;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = feature_values[i];
    auto& p = profiles[i];
    p.point_index = i;

    std::size_t lo = rank[i], hi = rank[i];
    while (lo > 0 && std::abs(feature_values[order[lo - 1]] - xi) <= threshold) --lo;
    while (hi + 1 < n && std::abs(feature_values[order[hi + 1]] - xi) <= threshold) ++hi;
    for (std::size_t r = lo; r <= hi; ++r) p.neighborhood_indices.push_back(order[r]);

    const bool expanded = p.neighborhood_indices.size() < kMinNeighborhood;
    if (expanded) {
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), 0);
      std::partial_sort(all.begin(), all.begin() + kMinNeighborhood, all.end(),
                        [&](std::size_t a, std::size_t b) {
                          const double da = std::abs(feature_values[a] - xi);
                          const double db = std::abs(feature_values[b] - xi);
                          return da < db || (da == db && a < b);
                        });
      // The ball already holds every point at distance 0, so i is among these.
      p.neighborhood_indices.assign(all.begin(), all.begin() + kMinNeighborhood);
    }
    std::sort(p.neighborhood_indices.begin(), p.neighborhood_indices.end());
    p.neighborhood_size = p.neighborhood_indices.size();

    double farthest = 0.0;
    for (std::size_t j : p.neighborhood_indices) {
      farthest = std::max(farthest, std::abs(feature_values[j] - xi));
    }
    // An expanded neighbourhood would put its farthest point exactly on the
    // tricube boundary (weight 0); doubling keeps all three in the fit.
    p.radius = expanded ? std::max(threshold, kExpandedRadiusFactor * farthest) : threshold;

    weights.clear();
    for (std::size_t j : p.neighborhood_indices) {
      const double u = std::abs(feature_values[j] - xi) / p.radius;
      const double t = 1.0 - u * u * u;
      weights.push_back(t <= 0.0 ? 0.0 : t * t * t);
    }
    p.w = FitWeightedLine(feature_values, predictions, p.neighborhood_indices, weights);
  }
  return profiles;
}

std::array<double, 3> RawTerms(const NeighborhoodProfile& a, const NeighborhoodProfile& b,
                               double xa, double xb, const FeatureDistance& distance) {
  const double ds = a.w.slope - b.w.slope;
  const double di = a.w.intercept - b.w.intercept;
  const double size_a = static_cast<double>(a.neighborhood_size);
  const double size_b = static_cast<double>(b.neighborhood_size);
  return {std::hypot(ds, di), distance(xa, xb), std::abs(size_a - size_b)};
}

DissimilarityMatrix PairwiseDissimilarity(std::span<const NeighborhoodProfile> profiles,
                                          std::span<const double> feature_values,
                                          const FeatureDistance& distance) {
  const std::size_t n = profiles.size();
  if (feature_values.size() != n) {
    Fail(ErrorCode::kInvalidArgument, "profiles and feature values differ in length");
  }
  const std::size_t pairs = n * (n - 1) / 2;
  std::vector<std::array<double, 3>> raw(pairs);
  std::array<DissimilarityMatrix::TermRange, 3> ranges;
  for (auto& r : ranges) r = {INFINITY, -INFINITY};
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      raw[k] = RawTerms(profiles[i], profiles[j], feature_values[i], feature_values[j], distance);
      for (std::size_t t = 0; t < 3; ++t) {
        ranges[t].min = std::min(ranges[t].min, raw[k][t]);
        ranges[t].max = std::max(ranges[t].max, raw[k][t]);
      }
    }
  }
  if (pairs == 0) {
    for (auto& r : ranges) r = {0.0, 0.0};
  }
  // Identical local lines differ only by rounding; scaling that noise up to
  // [0,1] would invent structure, so such a spread counts as constant.
  double w_scale = 0.0;
  for (const auto& p : profiles) w_scale = std::max(w_scale, std::hypot(p.w.slope, p.w.intercept));
  auto& lin = ranges[DissimilarityMatrix::kLinearity];
  if (lin.max - lin.min <= kLinearityNoise * w_scale) lin.max = lin.min;

  std::vector<double> values(n * n, 0.0);
  k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      double sum = 0.0;
      for (std::size_t t = 0; t < 3; ++t) {
        const double span = ranges[t].max - ranges[t].min;
        if (span > 0.0) sum += std::clamp((raw[k][t] - ranges[t].min) / span, 0.0, 1.0);
      }
      values[i * n + j] = sum;
      values[j * n + i] = sum;
    }
  }
  return DissimilarityMatrix(n, std::move(values), ranges);
}

}  // namespace masala
