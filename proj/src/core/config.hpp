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
#include <string>
#include <vector>

#include "json.hpp"

namespace masala {

struct RunConfig {
  // Neighbourhood radius for the per-point local fits, as a fraction of the
  // normalized feature range.
  double neighborhood_threshold = 0.1;
  std::size_t initial_k = 10;
  std::uint64_t seed = 0;
  std::vector<double> kernel_widths = {0.1, 0.25, 0.5, 1.0};
  std::size_t perturbation_count = 1000;
  std::size_t repeats = 10;
  std::size_t eval_instances = 20;
  std::size_t runs = 5;

  void Validate() const;
};

// Missing keys take the defaults above; unknown keys are rejected.
RunConfig ConfigFromJson(const nlohmann::json& j);
RunConfig ParseConfig(std::string_view text);
nlohmann::json ConfigToJson(const RunConfig& config);

}  // namespace masala
