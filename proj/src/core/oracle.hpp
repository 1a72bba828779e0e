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

#include <chrono>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "core/dataset.hpp"

namespace masala {

// Answers only for rows of the dataset it was built from.
class PrecomputedColumn {
 public:
  explicit PrecomputedColumn(const Dataset& dataset);

  const std::string& column() const { return column_; }
  std::vector<double> Predict(const Eigen::MatrixXd& rows) const;

 private:
  struct RowHash {
    std::size_t operator()(const std::vector<double>& row) const noexcept;
  };
  std::string column_;
  std::unordered_map<std::vector<double>, double, RowHash> table_;
};

// Spawns `/bin/sh -c command` per query. Rows go to the child's stdin as CSV
// with a header line; the child prints one prediction per line.
class ExternalCommand {
 public:
  ExternalCommand(std::string command, std::vector<std::string> feature_names,
                  std::chrono::milliseconds timeout = std::chrono::seconds(60));

  const std::string& command() const { return command_; }
  std::chrono::milliseconds timeout() const { return timeout_; }
  std::vector<double> Predict(const Eigen::MatrixXd& rows) const;

 private:
  std::string command_;
  std::vector<std::string> feature_names_;
  std::chrono::milliseconds timeout_;
};

// The black-box base model. Query rows are always in original feature units.
class PredictionOracle {
 public:
  explicit PredictionOracle(PrecomputedColumn oracle) : impl_(std::move(oracle)) {}
  explicit PredictionOracle(ExternalCommand oracle) : impl_(std::move(oracle)) {}

  bool is_live() const { return std::holds_alternative<ExternalCommand>(impl_); }
  std::string Describe() const;

  std::vector<double> Predict(const Eigen::MatrixXd& rows) const;
  double PredictOne(std::span<const double> row) const;

 private:
  std::variant<PrecomputedColumn, ExternalCommand> impl_;
};

// Serializes rows for the ExternalCommand wire protocol.
std::string RowsToCsv(const Eigen::MatrixXd& rows, const std::vector<std::string>& names);

// Parses child output: one finite real per non-empty line, exactly `expected`.
std::vector<double> ParsePredictionLines(std::string_view output, std::size_t expected);

}  // namespace masala
