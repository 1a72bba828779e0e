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
#include <string>
#include <vector>

#include "json.hpp"

#include "core/clustering.hpp"
#include "core/dataset.hpp"

namespace masala {

// Everything needed to draw one feature's clustering, in original units.
struct PlotDocument {
  struct Point {
    double value = 0.0;
    double prediction = 0.0;
    std::size_t cluster = 0;
  };
  struct Segment {
    double slope = 0.0;
    double intercept = 0.0;
    double lo = 0.0;
    double hi = 0.0;
  };
  struct Target {
    std::size_t row = 0;
    double value = 0.0;
    double prediction = 0.0;
  };

  std::string feature_name;
  std::string prediction_name;
  std::vector<Point> points;
  std::vector<Segment> lines;
  std::optional<Target> target;

  void Validate() const;
};

// Accepts a feature name or a zero-based column index.
std::size_t ResolveFeature(const ClusteringModel& model, std::string_view selector);

PlotDocument BuildPlotDocument(const ClusteringModel& model, const Dataset& dataset,
                               std::size_t feature, std::optional<std::size_t> target_row = {});

std::string RenderSvg(const PlotDocument& doc);

nlohmann::json PlotToJson(const PlotDocument& doc);
PlotDocument PlotFromJson(const nlohmann::json& j);

// Fixed palette indexed by cluster id.
const std::string& ClusterColor(std::size_t cluster);

}  // namespace masala
