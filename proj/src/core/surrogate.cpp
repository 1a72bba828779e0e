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

#include "core/surrogate.hpp"

#include <cmath>
#include <limits>

#include "core/error.hpp"

namespace masala {

double SurrogateModel::PredictNormalized(std::span<const double> x) const {
  double y = intercept;
  for (std::size_t m = 0; m < x.size(); ++m) y += coefficients(static_cast<Eigen::Index>(m)) * x[m];
  return y;
}

std::vector<std::size_t> Locate(std::span<const double> normalized_x,
                                const ClusteringModel& model) {
  if (normalized_x.size() != model.per_feature.size()) {
    Fail(ErrorCode::kInvalidArgument, "instance has " + std::to_string(normalized_x.size()) +
                                          " values, model has " +
                                          std::to_string(model.per_feature.size()) + " features");
  }
  std::vector<std::size_t> ids(normalized_x.size());
  for (std::size_t m = 0; m < normalized_x.size(); ++m) {
    const auto& clusters = model.per_feature[m].clusters;
    const double v = normalized_x[m];
    std::size_t best = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    double best_lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      const auto& c = clusters[k];
      const double gap = v < c.lo ? c.lo - v : (v > c.hi ? v - c.hi : 0.0);
      if (gap < best_gap || (gap == best_gap && c.lo < best_lo)) {
        best = k;
        best_gap = gap;
        best_lo = c.lo;
      }
    }
    ids[m] = best;
  }
  return ids;
}

std::vector<std::vector<std::size_t>> RowClusterIds(const ClusteringModel& model) {
  std::size_t n = 0;
  if (!model.per_feature.empty()) {
    for (const auto& c : model.per_feature.front().clusters) n += c.members.size();
  }
  std::vector<std::vector<std::size_t>> ids(model.per_feature.size(),
                                            std::vector<std::size_t>(n, 0));
  for (std::size_t m = 0; m < model.per_feature.size(); ++m) {
    const auto& clusters = model.per_feature[m].clusters;
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      for (std::size_t row : clusters[k].members) {
        if (row >= n) Fail(ErrorCode::kInternal, "cluster member out of range");
        ids[m][row] = k;
      }
    }
  }
  return ids;
}

Locality BuildLocality(std::span<const double> original_x, const ClusteringModel& model,
                       const Dataset& normalized, std::optional<std::size_t> target_row) {
  const std::size_t m_count = model.per_feature.size();
  const std::size_t n = normalized.rows();
  const std::size_t needed = m_count + 2;
  if (n < needed) {
    Fail(ErrorCode::kInvalidArgument, "dataset has " + std::to_string(n) +
                                          " rows; a locality needs at least " +
                                          std::to_string(needed));
  }
  Locality loc;
  loc.target_row = target_row;
  loc.target_values.assign(original_x.begin(), original_x.end());
  const auto normalized_x =
      target_row ? normalized.row(*target_row) : normalized.ToNormalized(original_x);
  loc.cluster_ids = Locate(normalized_x, model);

  const auto row_ids = RowClusterIds(model);
  std::vector<std::size_t> matches(n, 0);
  for (std::size_t m = 0; m < m_count; ++m) {
    if (row_ids[m].size() != n) Fail(ErrorCode::kInternal, "model does not cover the dataset");
    for (std::size_t i = 0; i < n; ++i) matches[i] += row_ids[m][i] == loc.cluster_ids[m];
  }
  for (std::size_t level = 0; level <= m_count; ++level) {
    loc.member_rows.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (matches[i] + level >= m_count) loc.member_rows.push_back(i);
    }
    loc.fallback_level = level;
    if (loc.member_rows.size() >= needed) break;
  }
  return loc;
}

SurrogateModel MakeSurrogate(const AffineFit& fit, const std::vector<FeatureTransform>& transforms,
                             std::size_t training_size, double lambda) {
  SurrogateModel s;
  s.coefficients = fit.coefficients;
  s.intercept = fit.intercept;
  s.training_size = training_size;
  s.ridge_lambda_used = lambda;
  s.coefficients_original_units = Eigen::VectorXd::Zero(fit.coefficients.size());
  s.intercept_original_units = fit.intercept;
  for (Eigen::Index m = 0; m < fit.coefficients.size(); ++m) {
    const auto& t = transforms[static_cast<std::size_t>(m)];
    if (t.constant) continue;
    const double c = fit.coefficients(m) / t.range;
    s.coefficients_original_units(m) = c;
    s.intercept_original_units -= c * t.min;
  }
  return s;
}

SurrogateModel FitSurrogate(const Locality& locality, const Dataset& normalized,
                            const PredictionOracle& oracle) {
  const auto& rows = locality.member_rows;
  if (rows.empty()) Fail(ErrorCode::kInvalidArgument, "empty locality");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = static_cast<Eigen::Index>(normalized.cols());
  Eigen::MatrixXd x(n, m);
  Eigen::MatrixXd original(n, m);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto row = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]);
    x.row(r) = normalized.features.row(row);
    original.row(r) = normalized.original_features.row(row);
  }
  const auto preds = oracle.Predict(original);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(preds.data(), n);
  const auto fit = FitWeightedRidge(x, y, Eigen::VectorXd(), kSurrogateRidge);
  return MakeSurrogate(fit, normalized.transforms, rows.size(), kSurrogateRidge);
}

void CheckFingerprint(const ClusteringModel& model, const Dataset& dataset) {
  if (!(model.fingerprint == dataset.fingerprint)) {
    Fail(ErrorCode::kFingerprint, "model fingerprint " + model.fingerprint.Hex() +
                                      " does not match dataset fingerprint " +
                                      dataset.fingerprint.Hex());
  }
}

Explanation Explain(std::span<const double> original_x, const ClusteringModel& model,
                    const Dataset& normalized, const PredictionOracle& oracle,
                    std::optional<std::size_t> target_row) {
  CheckFingerprint(model, normalized);
  for (double v : original_x) {
    if (!std::isfinite(v)) Fail(ErrorCode::kInvalidArgument, "instance values must be finite");
  }
  Explanation e;
  e.method = "masala";
  e.target_values.assign(original_x.begin(), original_x.end());
  auto locality = BuildLocality(original_x, model, normalized, target_row);
  e.surrogate = FitSurrogate(locality, normalized, oracle);
  e.base_prediction = oracle.PredictOne(original_x);
  const auto normalized_x =
      target_row ? normalized.row(*target_row) : normalized.ToNormalized(original_x);
  e.surrogate_prediction = e.surrogate.PredictNormalized(normalized_x);
  e.instance_fidelity = std::abs(e.base_prediction - e.surrogate_prediction);
  e.locality = std::move(locality);
  return e;
}

Explanation ExplainRow(std::size_t row, const ClusteringModel& model, const Dataset& normalized,
                       const PredictionOracle& oracle) {
  if (row >= normalized.rows()) {
    Fail(ErrorCode::kInvalidArgument, "row " + std::to_string(row) + " out of range (dataset has " +
                                          std::to_string(normalized.rows()) + " rows)");
  }
  const auto x = normalized.original_row(row);
  return Explain(x, model, normalized, oracle, row);
}

}  // namespace masala
