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

#include "core/config.hpp"

#include <cmath>

#include "core/error.hpp"

namespace masala {

void RunConfig::Validate() const {
  if (!(neighborhood_threshold > 0.0 && neighborhood_threshold <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "neighborhood_threshold must lie in (0, 1]");
  }
  if (initial_k < 2) Fail(ErrorCode::kInvalidArgument, "initial_k must be at least 2");
  for (double kw : kernel_widths) {
    if (!(kw > 0.0) || !std::isfinite(kw)) {
      Fail(ErrorCode::kInvalidArgument, "kernel widths must be positive");
    }
  }
  if (perturbation_count == 0) Fail(ErrorCode::kInvalidArgument, "perturbation_count must be positive");
  if (repeats < 2) Fail(ErrorCode::kInvalidArgument, "repeats must be at least 2");
  if (eval_instances == 0) Fail(ErrorCode::kInvalidArgument, "eval_instances must be positive");
  if (runs == 0) Fail(ErrorCode::kInvalidArgument, "runs must be positive");
}

RunConfig ConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) Fail(ErrorCode::kParse, "config must be a JSON object");
  RunConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "neighborhood_threshold") {
        c.neighborhood_threshold = value.get<double>();
      } else if (key == "initial_k") {
        c.initial_k = value.get<std::size_t>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "kernel_widths") {
        c.kernel_widths = value.get<std::vector<double>>();
      } else if (key == "perturbation_count") {
        c.perturbation_count = value.get<std::size_t>();
      } else if (key == "repeats") {
        c.repeats = value.get<std::size_t>();
      } else if (key == "eval_instances") {
        c.eval_instances = value.get<std::size_t>();
      } else if (key == "runs") {
        c.runs = value.get<std::size_t>();
      } else {
        Fail(ErrorCode::kParse, "unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("bad config value: ") + e.what());
  }
  c.Validate();
  return c;
}

RunConfig ParseConfig(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    Fail(ErrorCode::kParse, std::string("config is not valid JSON: ") + e.what());
  }
  return ConfigFromJson(j);
}

nlohmann::json ConfigToJson(const RunConfig& c) {
  return {
      {"neighborhood_threshold", c.neighborhood_threshold},
      {"initial_k", c.initial_k},
      {"seed", c.seed},
      {"kernel_widths", c.kernel_widths},
      {"perturbation_count", c.perturbation_count},
      {"repeats", c.repeats},
      {"eval_instances", c.eval_instances},
      {"runs", c.runs},
  };
}

}  // namespace masala
