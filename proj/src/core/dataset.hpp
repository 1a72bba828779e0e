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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace masala {

// Affine map original -> [0,1]: normalized = (x - min) / range.
struct FeatureTransform {
  double min = 0.0;
  double range = 1.0;
  bool constant = false;

  double Apply(double x) const { return constant ? 0.0 : (x - min) / range; }
  double Invert(double normalized) const {
    return constant ? min : min + normalized * range;
  }
};

struct Fingerprint {
  std::uint64_t hash = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::string Hex() const;
  bool operator==(const Fingerprint&) const = default;
};

// N x M feature matrix plus the base-model predictions, if present.
// `features` holds whatever space the dataset currently lives in; for a
// normalized dataset `transforms` maps it back to the original units.
struct Dataset {
  Eigen::MatrixXd features;
  // The values as loaded; untouched by Normalize so oracle lookups stay exact.
  Eigen::MatrixXd original_features;
  std::vector<std::string> feature_names;
  std::optional<std::vector<double>> predictions;
  std::optional<std::string> prediction_column;
  std::vector<FeatureTransform> transforms;
  bool normalized = false;
  std::size_t dropped_rows = 0;
  Fingerprint fingerprint;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }

  std::span<const double> column(std::size_t m) const {
    return {features.col(static_cast<Eigen::Index>(m)).data(), rows()};
  }
  std::vector<double> row(std::size_t i) const;
  std::vector<double> original_row(std::size_t i) const;

  // Maps one M-vector between unit systems using the stored transforms.
  std::vector<double> ToNormalized(std::span<const double> original) const;
  std::vector<double> ToOriginal(std::span<const double> normalized) const;

  const std::vector<double>& RequirePredictions() const;
};

// Parses CSV text (header row required). Rows containing empty cells are
// dropped and counted; any other unparsable or non-finite cell is an error.
Dataset ParseDataset(std::string_view text,
                     const std::optional<std::string>& prediction_column,
                     const std::string& source_name = "<memory>");

Dataset LoadDataset(const std::filesystem::path& path,
                    const std::optional<std::string>& prediction_column);

// Builds a dataset from in-memory values. The fingerprint is computed exactly
// as it would be for the same values loaded from CSV.
Dataset MakeDataset(Eigen::MatrixXd features, std::vector<std::string> names,
                    std::optional<std::vector<double>> predictions,
                    std::optional<std::string> prediction_column = "f");

Dataset Normalize(const Dataset& dataset);
Dataset Denormalize(const Dataset& dataset);

Fingerprint ComputeFingerprint(const Eigen::MatrixXd& features,
                               const std::vector<std::string>& names,
                               const std::optional<std::vector<double>>& predictions);

}  // namespace masala
