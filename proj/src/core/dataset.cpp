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

#include "core/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace masala {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void HashBytes(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void HashDouble(std::uint64_t& h, double v) {
  // +0.0 and -0.0 hash identically.
  if (v == 0.0) v = 0.0;
  const auto bits = std::bit_cast<std::uint64_t>(v);
  HashBytes(h, &bits, sizeof(bits));
}

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> SplitCells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(Trim(line.substr(start)));
      break;
    }
    cells.push_back(Trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

std::string Unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

std::optional<double> ParseReal(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto result = std::from_chars(cell.data(), end, value);
  if (result.ec != std::errc() || result.ptr != end) return std::nullopt;
  return value;
}

}  // namespace

std::string Fingerprint::Hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::vector<double> Dataset::row(std::size_t i) const {
  std::vector<double> out(cols());
  for (std::size_t m = 0; m < cols(); ++m) {
    out[m] = features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m));
  }
  return out;
}

std::vector<double> Dataset::original_row(std::size_t i) const {
  std::vector<double> out(cols());
  for (std::size_t m = 0; m < cols(); ++m) {
    out[m] = original_features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m));
  }
  return out;
}

std::vector<double> Dataset::ToNormalized(std::span<const double> original) const {
  if (original.size() != cols()) {
    Fail(ErrorCode::kInvalidArgument,
         "expected " + std::to_string(cols()) + " feature values, got " +
             std::to_string(original.size()));
  }
  std::vector<double> out(original.size());
  for (std::size_t m = 0; m < original.size(); ++m) out[m] = transforms[m].Apply(original[m]);
  return out;
}

std::vector<double> Dataset::ToOriginal(std::span<const double> normalized) const {
  if (normalized.size() != cols()) {
    Fail(ErrorCode::kInvalidArgument,
         "expected " + std::to_string(cols()) + " feature values, got " +
             std::to_string(normalized.size()));
  }
  std::vector<double> out(normalized.size());
  for (std::size_t m = 0; m < normalized.size(); ++m) out[m] = transforms[m].Invert(normalized[m]);
  return out;
}

const std::vector<double>& Dataset::RequirePredictions() const {
  if (!predictions) Fail(ErrorCode::kInvalidArgument, "dataset has no prediction column");
  return *predictions;
}

Fingerprint ComputeFingerprint(const Eigen::MatrixXd& features,
                               const std::vector<std::string>& names,
                               const std::optional<std::vector<double>>& predictions) {
  std::uint64_t h = kFnvOffset;
  for (const auto& name : names) {
    HashBytes(h, name.data(), name.size());
    const char sep = '\x1f';
    HashBytes(h, &sep, 1);
  }
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index m = 0; m < features.cols(); ++m) HashDouble(h, features(i, m));
  }
  if (predictions) {
    const char tag = 'p';
    HashBytes(h, &tag, 1);
    for (double p : *predictions) HashDouble(h, p);
  }
  return {h, static_cast<std::size_t>(features.rows()),
          static_cast<std::size_t>(features.cols())};
}

Dataset MakeDataset(Eigen::MatrixXd features, std::vector<std::string> names,
                    std::optional<std::vector<double>> predictions,
                    std::optional<std::string> prediction_column) {
  if (features.rows() < 2) Fail(ErrorCode::kInvalidArgument, "dataset needs at least 2 rows");
  if (features.cols() < 1) Fail(ErrorCode::kInvalidArgument, "dataset needs at least 1 feature");
  if (names.size() != static_cast<std::size_t>(features.cols())) {
    Fail(ErrorCode::kInvalidArgument, "feature name count does not match column count");
  }
  if (predictions && predictions->size() != static_cast<std::size_t>(features.rows())) {
    Fail(ErrorCode::kInvalidArgument, "prediction count does not match row count");
  }
  if (!features.allFinite()) Fail(ErrorCode::kInvalidArgument, "features must be finite");
  Dataset d;
  d.fingerprint = ComputeFingerprint(features, names, predictions);
  d.original_features = features;
  d.features = std::move(features);
  d.feature_names = std::move(names);
  d.predictions = std::move(predictions);
  d.prediction_column = d.predictions ? std::move(prediction_column) : std::nullopt;
  d.transforms.assign(d.cols(), FeatureTransform{});
  return d;
}

Dataset ParseDataset(std::string_view text,
                     const std::optional<std::string>& prediction_column,
                     const std::string& source_name) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  while (!lines.empty() && Trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) Fail(ErrorCode::kParse, source_name + ": empty file");

  std::vector<std::string> header;
  for (auto cell : SplitCells(lines[0])) header.push_back(Unquote(cell));
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);

  std::optional<std::size_t> pred_index;
  if (prediction_column) {
    const auto it = std::find(header.begin(), header.end(), *prediction_column);
    if (it == header.end()) {
      Fail(ErrorCode::kInvalidArgument,
           source_name + ": prediction column '" + *prediction_column + "' not found");
    }
    pred_index = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != pred_index) names.push_back(header[c]);
  }
  if (names.empty()) Fail(ErrorCode::kParse, source_name + ": no feature columns");

  std::vector<std::vector<double>> rows;
  std::vector<double> preds;
  std::size_t dropped = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (Trim(lines[li]).empty()) continue;
    const auto cells = SplitCells(lines[li]);
    if (cells.size() != header.size()) {
      Fail(ErrorCode::kParse, source_name + ": row " + std::to_string(li) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(header.size()));
    }
    if (std::any_of(cells.begin(), cells.end(), [](auto c) { return c.empty(); })) {
      ++dropped;
      continue;
    }
    std::vector<double> values;
    values.reserve(names.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = ParseReal(cells[c]);
      if (!v || !std::isfinite(*v)) {
        Fail(ErrorCode::kParse, source_name + ": row " + std::to_string(li) + ", column '" +
                                    header[c] + "': cannot use value '" +
                                    std::string(cells[c]) + "'");
      }
      if (c == pred_index) {
        preds.push_back(*v);
      } else {
        values.push_back(*v);
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.size() < 2) {
    Fail(ErrorCode::kInvalidArgument,
         source_name + ": fewer than 2 usable rows (" + std::to_string(dropped) +
             " dropped for missing values)");
  }

  Eigen::MatrixXd features(static_cast<Eigen::Index>(rows.size()),
                           static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t m = 0; m < names.size(); ++m) {
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = rows[i][m];
    }
  }
  std::optional<std::vector<double>> predictions;
  if (pred_index) predictions = std::move(preds);
  auto d = MakeDataset(std::move(features), std::move(names), std::move(predictions),
                       prediction_column);
  d.dropped_rows = dropped;
  return d;
}

Dataset LoadDataset(const std::filesystem::path& path,
                    const std::optional<std::string>& prediction_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseDataset(buf.str(), prediction_column, path.string());
}

Dataset Normalize(const Dataset& dataset) {
  Dataset out = dataset;
  for (std::size_t m = 0; m < dataset.cols(); ++m) {
    auto col = out.features.col(static_cast<Eigen::Index>(m));
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    const double range = hi - lo;
    FeatureTransform& t = out.transforms[m];
    if (range == 0.0 || t.constant) {
      col.setZero();
      // Composition keeps the original offset so Invert still recovers it.
      t.min = t.constant ? t.min : t.min + t.range * lo;
      t.range = 0.0;
      t.constant = true;
      continue;
    }
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      col(i) = col(i) == hi ? 1.0 : (col(i) - lo) / range;
    }
    t.min = t.min + t.range * lo;
    t.range = t.range * range;
  }
  out.normalized = true;
  return out;
}

Dataset Denormalize(const Dataset& dataset) {
  Dataset out = dataset;
  for (std::size_t m = 0; m < dataset.cols(); ++m) {
    auto col = out.features.col(static_cast<Eigen::Index>(m));
    const auto& t = dataset.transforms[m];
    for (Eigen::Index i = 0; i < col.size(); ++i) col(i) = t.Invert(col(i));
  }
  out.transforms.assign(out.cols(), FeatureTransform{});
  out.normalized = false;
  out.original_features = out.features;
  return out;
}

}  // namespace masala
