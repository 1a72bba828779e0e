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

#include "core/serialization.hpp"

#include <cstdio>

#include "core/error.hpp"

namespace masala {
namespace {

constexpr const char* kModelFormat = "masala-clustering-model";

}  // namespace

std::string Dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json ModelToJson(const ClusteringModel& model) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t m = 0; m < model.per_feature.size(); ++m) {
    const auto& fc = model.per_feature[m];
    const auto& t = model.transforms[m];
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& c : fc.clusters) {
      clusters.push_back({{"members", c.members},
                          {"medoid", c.medoid},
                          {"a", c.line.slope},
                          {"b", c.line.intercept},
                          {"interval", {c.lo, c.hi}}});
    }
    features.push_back({{"name", model.feature_names[m]},
                        {"index", fc.feature_index},
                        {"transform", {{"min", t.min}, {"range", t.range}, {"constant", t.constant}}},
                        {"k", fc.k()},
                        {"cost", fc.cost},
                        {"constraint_satisfied", fc.constraint_satisfied},
                        {"k_sequence", fc.k_sequence},
                        {"clusters", clusters}});
  }
  return {{"format", kModelFormat},
          {"version", 1},
          {"fingerprint", model.fingerprint.Hex()},
          {"rows", model.fingerprint.rows},
          {"cols", model.fingerprint.cols},
          {"prediction_column", model.prediction_column ? nlohmann::json(*model.prediction_column)
                                                        : nlohmann::json(nullptr)},
          {"config", ConfigToJson(model.config)},
          {"features", features}};
}

ClusteringModel ModelFromJson(const nlohmann::json& j) {
  ClusteringModel model;
  try {
    if (j.at("format").get<std::string>() != kModelFormat) {
      Fail(ErrorCode::kParse, "not a clustering model document");
    }
    const auto hex = j.at("fingerprint").get<std::string>();
    model.fingerprint.hash = std::stoull(hex, nullptr, 16);
    model.fingerprint.rows = j.at("rows").get<std::size_t>();
    model.fingerprint.cols = j.at("cols").get<std::size_t>();
    if (!j.at("prediction_column").is_null()) {
      model.prediction_column = j.at("prediction_column").get<std::string>();
    }
    model.config = ConfigFromJson(j.at("config"));
    for (const auto& f : j.at("features")) {
      model.feature_names.push_back(f.at("name").get<std::string>());
      const auto& t = f.at("transform");
      model.transforms.push_back({t.at("min").get<double>(), t.at("range").get<double>(),
                                  t.at("constant").get<bool>()});
      FeatureClustering fc;
      fc.feature_index = f.at("index").get<std::size_t>();
      fc.cost = f.at("cost").get<double>();
      fc.constraint_satisfied = f.at("constraint_satisfied").get<bool>();
      fc.k_sequence = f.at("k_sequence").get<std::vector<std::size_t>>();
      for (const auto& c : f.at("clusters")) {
        Cluster cl;
        cl.members = c.at("members").get<std::vector<std::size_t>>();
        cl.medoid = c.at("medoid").get<std::size_t>();
        cl.line = {c.at("a").get<double>(), c.at("b").get<double>()};
        cl.fitted = true;
        cl.lo = c.at("interval").at(0).get<double>();
        cl.hi = c.at("interval").at(1).get<double>();
        if (cl.members.empty()) Fail(ErrorCode::kParse, "model has an empty cluster");
        fc.clusters.push_back(std::move(cl));
      }
      if (fc.clusters.empty()) Fail(ErrorCode::kParse, "model feature has no clusters");
      model.per_feature.push_back(std::move(fc));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("malformed model: ") + e.what());
  } catch (const std::invalid_argument&) {
    Fail(ErrorCode::kParse, "malformed model fingerprint");
  }
  if (model.per_feature.size() != model.fingerprint.cols) {
    Fail(ErrorCode::kParse, "model feature count disagrees with its fingerprint");
  }
  return model;
}

ClusteringModel LoadModel(std::string_view text, const Dataset& dataset) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    Fail(ErrorCode::kParse, std::string("model is not valid JSON: ") + e.what());
  }
  auto model = ModelFromJson(j);
  CheckFingerprint(model, dataset);
  return model;
}

nlohmann::json ExplanationToJson(const Explanation& e, const std::vector<std::string>& names) {
  auto vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  nlohmann::json j = {
      {"method", e.method},
      {"hyperparameter", e.hyperparameter ? nlohmann::json(*e.hyperparameter) : nlohmann::json(nullptr)},
      {"feature_names", names},
      {"target",
       {{"row", e.locality && e.locality->target_row ? nlohmann::json(*e.locality->target_row)
                                                     : nlohmann::json(nullptr)},
        {"values", e.target_values}}},
      {"coefficients", vec(e.surrogate.coefficients)},
      {"coefficients_original_units", vec(e.surrogate.coefficients_original_units)},
      {"intercept", e.surrogate.intercept},
      {"intercept_original_units", e.surrogate.intercept_original_units},
      {"training_size", e.surrogate.training_size},
      {"ridge_lambda", e.surrogate.ridge_lambda_used},
      {"base_prediction", e.base_prediction},
      {"surrogate_prediction", e.surrogate_prediction},
      {"instance_fidelity", e.instance_fidelity},
  };
  if (e.locality) {
    j["cluster_ids"] = e.locality->cluster_ids;
    j["locality_size"] = e.locality->member_rows.size();
    j["locality_rows"] = e.locality->member_rows;
    j["fallback_level"] = e.locality->fallback_level;
  }
  return j;
}

std::string DissimilarityCsv(const DissimilarityMatrix& delta) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < delta.size(); ++i) {
    for (std::size_t j = 0; j < delta.size(); ++j) {
      if (j) out += ',';
      std::snprintf(buf, sizeof(buf), "%.17g", delta(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace masala
