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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/dissimilarity.hpp"
#include "core/linalg.hpp"

namespace masala {

inline constexpr std::size_t kMaxOuterIterations = 50;
// Relative to max |prediction|: smaller cost improvements are ties.
inline constexpr double kCostTieTolerance = 1e-12;

// One linear region of a single feature.
struct Cluster {
  std::vector<std::size_t> members;  // sorted row ids
  std::size_t medoid = 0;
  Line line;
  bool fitted = false;
  double lo = 0.0;  // member feature extrema
  double hi = 0.0;
};

struct FeatureClustering {
  std::size_t feature_index = 0;
  std::vector<Cluster> clusters;
  double cost = 0.0;
  bool constraint_satisfied = false;
  // Costs of the accepted medoid swaps, starting with the initial cost.
  std::vector<double> cost_history;
  // K used by each outer iteration of AutoCluster.
  std::vector<std::size_t> k_sequence;

  std::size_t k() const { return clusters.size(); }
};

struct ClusteringModel {
  std::vector<std::string> feature_names;
  std::vector<FeatureTransform> transforms;
  std::optional<std::string> prediction_column;
  std::vector<FeatureClustering> per_feature;
  Fingerprint fingerprint;
  RunConfig config;
};

// The inputs every clustering step of one feature works against.
struct FeatureData {
  std::span<const double> values;  // normalized to [0,1]
  std::span<const double> predictions;
  const DissimilarityMatrix& delta;
};

std::vector<std::size_t> InitMedoids(std::span<const double> values, std::size_t k);

// Each point joins its least dissimilar medoid; ties go to the medoid with
// the smaller feature value, then the smaller row id. Clusters come back in
// medoid order with lines fitted.
std::vector<Cluster> Assign(const FeatureData& data, std::span<const std::size_t> medoids);

void Refit(Cluster& cluster, const FeatureData& data);
std::size_t RecomputeMedoid(const Cluster& cluster, const DissimilarityMatrix& delta);

double ClusteringCost(std::span<const Cluster> clusters, std::span<const double> values,
                      std::span<const double> predictions);

FeatureClustering OptimizeMedoids(const FeatureData& data, std::vector<Cluster> clusters);

// Mean absolute difference over all ordered pairs, i == j included.
double SparsityThreshold(std::span<const double> values);

bool IsSparse(const Cluster& cluster, std::size_t largest_size, double threshold);
double Coverage(const Cluster& cluster, double feature_range);
bool IntervalsDisjoint(std::span<const Cluster> clusters);
bool ConstraintsHold(std::span<const Cluster> clusters, std::span<const double> values,
                     double threshold);

FeatureClustering EnforceConstraints(const FeatureData& data, FeatureClustering clustering,
                                     double threshold);

FeatureClustering AutoCluster(const FeatureData& data, std::size_t initial_k);

// Runs profiles -> dissimilarity -> AutoCluster for every feature of a
// normalized dataset with predictions.
ClusteringModel ClusterAll(const Dataset& normalized, const RunConfig& config);

FeatureClustering ClusterFeature(std::span<const double> values,
                                 std::span<const double> predictions, const RunConfig& config,
                                 std::size_t feature_index = 0);

}  // namespace masala
