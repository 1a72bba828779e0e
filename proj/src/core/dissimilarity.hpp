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

#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "core/linalg.hpp"

namespace masala {

inline constexpr std::size_t kMinNeighborhood = 3;
// Tricube radius of an expanded neighbourhood, relative to its farthest point.
inline constexpr double kExpandedRadiusFactor = 2.0;
// Relative spread of the local-line parameters below which the linearity
// term is treated as constant.
inline constexpr double kLinearityNoise = 1e-9;

// Weighted local linear fit around one point of a single feature.
struct NeighborhoodProfile {
  std::size_t point_index = 0;
  Line w;  // slope and intercept in (normalized feature, prediction) space
  std::size_t neighborhood_size = 0;
  std::vector<std::size_t> neighborhood_indices;  // sorted
  double radius = 0.0;  // effective tricube radius
};

// Distance between two feature values for the feature-value term.
using FeatureDistance = std::function<double(double, double)>;

double AbsoluteDistance(double a, double b);

std::vector<NeighborhoodProfile> BuildProfiles(std::span<const double> feature_values,
                                               std::span<const double> predictions,
                                               double threshold);

// Row-major symmetric matrix with zero diagonal. Each entry is the sum of
// three terms, each min-max scaled to [0,1] over all unordered pairs.
class DissimilarityMatrix {
 public:
  struct TermRange {
    double min = 0.0;
    double max = 0.0;
  };
  enum Term : std::size_t { kLinearity = 0, kFeatureDistance = 1, kDensity = 2 };

  DissimilarityMatrix() = default;
  DissimilarityMatrix(std::size_t n, std::vector<double> values,
                      std::array<TermRange, 3> ranges)
      : n_(n), values_(std::move(values)), ranges_(ranges) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  const std::array<TermRange, 3>& term_ranges() const { return ranges_; }
  std::span<const double> values() const { return values_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
  std::array<TermRange, 3> ranges_{};
};

// Raw (unnormalized) term values for one pair, in Term order.
std::array<double, 3> RawTerms(const NeighborhoodProfile& a, const NeighborhoodProfile& b,
                               double xa, double xb, const FeatureDistance& distance);

DissimilarityMatrix PairwiseDissimilarity(std::span<const NeighborhoodProfile> profiles,
                                          std::span<const double> feature_values,
                                          const FeatureDistance& distance = AbsoluteDistance);

}  // namespace masala
