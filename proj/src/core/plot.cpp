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

#include "core/plot.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "core/error.hpp"
#include "core/surrogate.hpp"

namespace masala {
namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr int kTicks = 5;

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string TickLabel(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string Escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo, hi;
  double pixel_lo, pixel_hi;
  double Map(double v) const {
    return pixel_lo + (v - lo) / (hi - lo) * (pixel_hi - pixel_lo);
  }
};

Axis MakeAxis(double lo, double hi, double pixel_lo, double pixel_hi) {
  if (!(hi > lo)) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  } else {
    const double pad = (hi - lo) * 0.05;
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, pixel_lo, pixel_hi};
}

}  // namespace

const std::string& ClusterColor(std::size_t cluster) {
  static const std::array<std::string, 10> kPalette = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return kPalette[cluster % kPalette.size()];
}

void PlotDocument::Validate() const {
  for (const auto& p : points) {
    if (p.cluster >= lines.size()) {
      Fail(ErrorCode::kInvalidArgument, "plot point refers to missing cluster " +
                                            std::to_string(p.cluster));
    }
  }
  for (std::size_t a = 0; a < lines.size(); ++a) {
    for (std::size_t b = a + 1; b < lines.size(); ++b) {
      if (lines[a].lo <= lines[b].hi && lines[b].lo <= lines[a].hi) {
        Fail(ErrorCode::kInvalidArgument, "plot cluster intervals overlap");
      }
    }
  }
}

std::size_t ResolveFeature(const ClusteringModel& model, std::string_view selector) {
  for (std::size_t m = 0; m < model.feature_names.size(); ++m) {
    if (model.feature_names[m] == selector) return m;
  }
  std::size_t index = 0;
  const auto res = std::from_chars(selector.data(), selector.data() + selector.size(), index);
  if (res.ec == std::errc() && res.ptr == selector.data() + selector.size() &&
      index < model.feature_names.size()) {
    return index;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown feature '" + std::string(selector) + "'");
}

PlotDocument BuildPlotDocument(const ClusteringModel& model, const Dataset& dataset,
                               std::size_t feature, std::optional<std::size_t> target_row) {
  CheckFingerprint(model, dataset);
  if (feature >= model.per_feature.size()) Fail(ErrorCode::kInvalidArgument, "feature out of range");
  const auto& preds = dataset.RequirePredictions();
  const auto& fc = model.per_feature[feature];
  const auto& t = model.transforms[feature];
  const auto col = static_cast<Eigen::Index>(feature);

  PlotDocument doc;
  doc.feature_name = model.feature_names[feature];
  doc.prediction_name = model.prediction_column.value_or("prediction");
  const auto ids = RowClusterIds(model)[feature];
  for (std::size_t i = 0; i < dataset.rows(); ++i) {
    doc.points.push_back(
        {dataset.original_features(static_cast<Eigen::Index>(i), col), preds[i], ids[i]});
  }
  for (const auto& c : fc.clusters) {
    PlotDocument::Segment s;
    if (t.constant) {
      s = {0.0, c.line.intercept, t.min, t.min};
    } else {
      s.slope = c.line.slope / t.range;
      s.intercept = c.line.intercept - s.slope * t.min;
      s.lo = t.Invert(c.lo);
      s.hi = t.Invert(c.hi);
    }
    doc.lines.push_back(s);
  }
  if (target_row) {
    if (*target_row >= dataset.rows()) Fail(ErrorCode::kInvalidArgument, "target row out of range");
    doc.target = PlotDocument::Target{
        *target_row, dataset.original_features(static_cast<Eigen::Index>(*target_row), col),
        preds[*target_row]};
  }
  doc.Validate();
  return doc;
}

std::string RenderSvg(const PlotDocument& doc) {
  doc.Validate();
  double xlo = INFINITY, xhi = -INFINITY, ylo = INFINITY, yhi = -INFINITY;
  for (const auto& p : doc.points) {
    xlo = std::min(xlo, p.value);
    xhi = std::max(xhi, p.value);
    ylo = std::min(ylo, p.prediction);
    yhi = std::max(yhi, p.prediction);
  }
  for (const auto& s : doc.lines) {
    for (double x : {s.lo, s.hi}) {
      const double y = s.slope * x + s.intercept;
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  if (doc.points.empty()) xlo = ylo = 0.0, xhi = yhi = 1.0;
  const Axis ax = MakeAxis(xlo, xhi, kLeft, kWidth - kRight);
  const Axis ay = MakeAxis(ylo, yhi, kHeight - kBottom, kTop);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "  <g id=\"axes\" stroke=\"#333333\" stroke-width=\"1\" font-family=\"sans-serif\" "
         "font-size=\"11\">\n";
  svg << "    <line x1=\"" << Fmt(kLeft) << "\" y1=\"" << Fmt(kHeight - kBottom) << "\" x2=\""
      << Fmt(kWidth - kRight) << "\" y2=\"" << Fmt(kHeight - kBottom) << "\"/>\n";
  svg << "    <line x1=\"" << Fmt(kLeft) << "\" y1=\"" << Fmt(kTop) << "\" x2=\"" << Fmt(kLeft)
      << "\" y2=\"" << Fmt(kHeight - kBottom) << "\"/>\n";
  for (int i = 0; i <= kTicks; ++i) {
    const double fx = ax.lo + (ax.hi - ax.lo) * i / kTicks;
    const double px = ax.Map(fx);
    svg << "    <line x1=\"" << Fmt(px) << "\" y1=\"" << Fmt(kHeight - kBottom) << "\" x2=\""
        << Fmt(px) << "\" y2=\"" << Fmt(kHeight - kBottom + 5) << "\"/>\n";
    svg << "    <text x=\"" << Fmt(px) << "\" y=\"" << Fmt(kHeight - kBottom + 18)
        << "\" text-anchor=\"middle\" stroke=\"none\">" << TickLabel(fx) << "</text>\n";
    const double fy = ay.lo + (ay.hi - ay.lo) * i / kTicks;
    const double py = ay.Map(fy);
    svg << "    <line x1=\"" << Fmt(kLeft - 5) << "\" y1=\"" << Fmt(py) << "\" x2=\"" << Fmt(kLeft)
        << "\" y2=\"" << Fmt(py) << "\"/>\n";
    svg << "    <text x=\"" << Fmt(kLeft - 8) << "\" y=\"" << Fmt(py + 4)
        << "\" text-anchor=\"end\" stroke=\"none\">" << TickLabel(fy) << "</text>\n";
  }
  svg << "    <text x=\"" << Fmt((kLeft + kWidth - kRight) / 2) << "\" y=\"" << Fmt(kHeight - 15)
      << "\" text-anchor=\"middle\" stroke=\"none\" font-size=\"13\">" << Escape(doc.feature_name)
      << "</text>\n";
  svg << "    <text x=\"18\" y=\"" << Fmt((kTop + kHeight - kBottom) / 2)
      << "\" text-anchor=\"middle\" stroke=\"none\" font-size=\"13\" transform=\"rotate(-90 18 "
      << Fmt((kTop + kHeight - kBottom) / 2) << ")\">" << Escape(doc.prediction_name)
      << "</text>\n";
  svg << "  </g>\n";

  svg << "  <g id=\"points\" stroke=\"none\" fill-opacity=\"0.7\">\n";
  for (const auto& p : doc.points) {
    svg << "    <circle cx=\"" << Fmt(ax.Map(p.value)) << "\" cy=\"" << Fmt(ay.Map(p.prediction))
        << "\" r=\"2.5\" fill=\"" << ClusterColor(p.cluster) << "\"/>\n";
  }
  svg << "  </g>\n";

  svg << "  <g id=\"lines\" stroke-width=\"2.5\">\n";
  for (std::size_t k = 0; k < doc.lines.size(); ++k) {
    const auto& s = doc.lines[k];
    svg << "    <line class=\"cluster-" << k << "\" x1=\"" << Fmt(ax.Map(s.lo)) << "\" y1=\""
        << Fmt(ay.Map(s.slope * s.lo + s.intercept)) << "\" x2=\"" << Fmt(ax.Map(s.hi))
        << "\" y2=\"" << Fmt(ay.Map(s.slope * s.hi + s.intercept)) << "\" stroke=\""
        << ClusterColor(k) << "\"/>\n";
  }
  svg << "  </g>\n";

  if (doc.target) {
    const double cx = ax.Map(doc.target->value);
    const double cy = ay.Map(doc.target->prediction);
    svg << "  <g id=\"target\">\n";
    svg << "    <path d=\"M " << Fmt(cx) << " " << Fmt(cy - 8) << " L " << Fmt(cx + 8) << " "
        << Fmt(cy) << " L " << Fmt(cx) << " " << Fmt(cy + 8) << " L " << Fmt(cx - 8) << " "
        << Fmt(cy) << " Z\" fill=\"black\" stroke=\"white\" stroke-width=\"1.5\"/>\n";
    svg << "  </g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

nlohmann::json PlotToJson(const PlotDocument& doc) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : doc.points) points.push_back({p.value, p.prediction, p.cluster});
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& s : doc.lines) {
    lines.push_back({{"a", s.slope}, {"b", s.intercept}, {"interval", {s.lo, s.hi}}});
  }
  nlohmann::json j = {{"format", "masala-plot"},
                      {"feature", doc.feature_name},
                      {"prediction", doc.prediction_name},
                      {"points", points},
                      {"lines", lines},
                      {"target", nullptr}};
  if (doc.target) {
    j["target"] = {{"row", doc.target->row},
                   {"value", doc.target->value},
                   {"prediction", doc.target->prediction}};
  }
  return j;
}

PlotDocument PlotFromJson(const nlohmann::json& j) {
  PlotDocument doc;
  try {
    doc.feature_name = j.at("feature").get<std::string>();
    doc.prediction_name = j.at("prediction").get<std::string>();
    for (const auto& p : j.at("points")) {
      doc.points.push_back(
          {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<std::size_t>()});
    }
    for (const auto& s : j.at("lines")) {
      doc.lines.push_back({s.at("a").get<double>(), s.at("b").get<double>(),
                           s.at("interval").at(0).get<double>(),
                           s.at("interval").at(1).get<double>()});
    }
    if (!j.at("target").is_null()) {
      const auto& t = j.at("target");
      doc.target = PlotDocument::Target{t.at("row").get<std::size_t>(), t.at("value").get<double>(),
                                        t.at("prediction").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("malformed plot document: ") + e.what());
  }
  doc.Validate();
  return doc;
}

}  // namespace masala
