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

#include <Eigen/Dense>

#include "core/clustering.hpp"
#include "core/dataset.hpp"
#include "core/oracle.hpp"

namespace masala {

// Always-on ridge penalty on the surrogate coefficients (normalized units).
inline constexpr double kSurrogateRidge = 1e-6;

struct Locality {
  std::optional<std::size_t> target_row;
  std::vector<double> target_values;  // original units
  std::vector<std::size_t> member_rows;
  std::vector<std::size_t> cluster_ids;  // one per feature
  // Number of feature dimensions the membership test was relaxed by.
  std::size_t fallback_level = 0;
};

struct SurrogateModel {
  Eigen::VectorXd coefficients;  // per normalized feature unit
  double intercept = 0.0;
  Eigen::VectorXd coefficients_original_units;
  double intercept_original_units = 0.0;
  std::size_t training_size = 0;
  double ridge_lambda_used = kSurrogateRidge;

  double PredictNormalized(std::span<const double> x) const;
};

struct Explanation {
  std::string method = "masala";
  std::optional<double> hyperparameter;
  std::vector<double> target_values;  // original units
  SurrogateModel surrogate;
  double base_prediction = 0.0;
  double surrogate_prediction = 0.0;
  double instance_fidelity = 0.0;
  std::optional<Locality> locality;  // absent for perturbation baselines
};

// Cluster id per feature for a normalized M-vector. Values outside every
// interval go to the nearest interval endpoint, ties to the left cluster.
std::vector<std::size_t> Locate(std::span<const double> normalized_x,
                                const ClusteringModel& model);

// Per feature, the cluster id of every row.
std::vector<std::vector<std::size_t>> RowClusterIds(const ClusteringModel& model);

Locality BuildLocality(std::span<const double> original_x, const ClusteringModel& model,
                       const Dataset& normalized, std::optional<std::size_t> target_row = {});

// Converts a fit in normalized units into the full surrogate record.
SurrogateModel MakeSurrogate(const AffineFit& fit, const std::vector<FeatureTransform>& transforms,
                             std::size_t training_size, double lambda);

SurrogateModel FitSurrogate(const Locality& locality, const Dataset& normalized,
                            const PredictionOracle& oracle);

void CheckFingerprint(const ClusteringModel& model, const Dataset& dataset);

Explanation Explain(std::span<const double> original_x, const ClusteringModel& model,
                    const Dataset& normalized, const PredictionOracle& oracle,
                    std::optional<std::size_t> target_row = {});

Explanation ExplainRow(std::size_t row, const ClusteringModel& model, const Dataset& normalized,
                       const PredictionOracle& oracle);

}  // namespace masala
