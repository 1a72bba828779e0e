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

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "core/clustering.hpp"
#include "core/surrogate.hpp"

namespace masala {

nlohmann::json ModelToJson(const ClusteringModel& model);
ClusteringModel ModelFromJson(const nlohmann::json& j);

// Parses a persisted model and verifies it was built from `dataset`.
ClusteringModel LoadModel(std::string_view text, const Dataset& dataset);

nlohmann::json ExplanationToJson(const Explanation& e, const std::vector<std::string>& names);

std::string DissimilarityCsv(const DissimilarityMatrix& delta);

// Pretty JSON with a trailing newline; stable for identical inputs.
std::string Dump(const nlohmann::json& j);

}  // namespace masala
