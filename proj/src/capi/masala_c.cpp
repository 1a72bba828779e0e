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

#include "masala/masala.h"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "core/clustering.hpp"
#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/error.hpp"
#include "core/evaluation.hpp"
#include "core/oracle.hpp"
#include "core/plot.hpp"
#include "core/serialization.hpp"
#include "core/surrogate.hpp"

struct masala_dataset {
  masala::Dataset normalized;
  std::optional<masala::PredictionOracle> row_oracle;
};

struct masala_oracle {
  masala::PredictionOracle oracle;
};

struct masala_model {
  masala::ClusteringModel model;
};

struct masala_explanation {
  masala::Explanation explanation;
  std::vector<std::string> feature_names;
};

struct masala_report {
  masala::EvaluationReport report;
};

namespace {

thread_local std::string g_last_error;

masala_status ToStatus(masala::ErrorCode code) {
  switch (code) {
    case masala::ErrorCode::kInvalidArgument:
      return MASALA_ERR_INVALID_ARGUMENT;
    case masala::ErrorCode::kIo:
      return MASALA_ERR_IO;
    case masala::ErrorCode::kParse:
      return MASALA_ERR_PARSE;
    case masala::ErrorCode::kOracle:
      return MASALA_ERR_ORACLE;
    case masala::ErrorCode::kFingerprint:
      return MASALA_ERR_FINGERPRINT;
    case masala::ErrorCode::kNotConverged:
      return MASALA_ERR_NOT_CONVERGED;
    case masala::ErrorCode::kInternal:
      return MASALA_ERR_INTERNAL;
  }
  return MASALA_ERR_INTERNAL;
}

masala_status SetError(masala_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs fn, translating exceptions into a status and the thread's last error.
template <typename Fn>
masala_status Guard(Fn&& fn) {
  try {
    fn();
    return MASALA_OK;
  } catch (const masala::Error& e) {
    return SetError(ToStatus(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return SetError(MASALA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return SetError(MASALA_ERR_INTERNAL, e.what());
  }
}

void Require(const void* p, const char* what) {
  if (!p) masala::Fail(masala::ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string ReadFile(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) masala::Fail(masala::ErrorCode::kIo, std::string("cannot open '") + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const char* path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) masala::Fail(masala::ErrorCode::kIo, std::string("cannot write '") + path + "'");
  out << text;
  out.close();
  if (!out) masala::Fail(masala::ErrorCode::kIo, std::string("write failed for '") + path + "'");
}

masala::RunConfig ConfigOrDefault(const char* config_json) {
  if (!config_json || !*config_json) return masala::RunConfig{};
  return masala::ParseConfig(config_json);
}

masala_dataset* WrapDataset(masala::Dataset loaded) {
  auto handle = std::make_unique<masala_dataset>();
  if (loaded.predictions) handle->row_oracle.emplace(masala::PrecomputedColumn(loaded));
  handle->normalized = masala::Normalize(loaded);
  return handle.release();
}

void WriteHex(const masala::Fingerprint& fp, char* buf, size_t size) {
  Require(buf, "buffer");
  if (size < 17) masala::Fail(masala::ErrorCode::kInvalidArgument, "fingerprint buffer too small");
  std::memcpy(buf, fp.Hex().c_str(), 17);
}

}  // namespace

extern "C" {

const char* masala_version(void) { return "1.0.0"; }

const char* masala_last_error(void) { return g_last_error.c_str(); }

const char* masala_status_name(masala_status status) {
  switch (status) {
    case MASALA_OK: return "ok";
    case MASALA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MASALA_ERR_IO: return "i/o error";
    case MASALA_ERR_PARSE: return "parse error";
    case MASALA_ERR_ORACLE: return "oracle error";
    case MASALA_ERR_FINGERPRINT: return "fingerprint mismatch";
    case MASALA_ERR_NOT_CONVERGED: return "not converged";
    case MASALA_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

void masala_string_free(char* s) { std::free(s); }

masala_status masala_dataset_load(const char* path, const char* prediction_column,
                                  masala_dataset** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    std::optional<std::string> column;
    if (prediction_column) column = prediction_column;
    *out = WrapDataset(masala::LoadDataset(path, column));
  });
}

masala_status masala_dataset_parse(const char* csv_text, const char* prediction_column,
                                   masala_dataset** out) {
  return Guard([&] {
    Require(csv_text, "csv_text");
    Require(out, "out");
    std::optional<std::string> column;
    if (prediction_column) column = prediction_column;
    *out = WrapDataset(masala::ParseDataset(csv_text, column));
  });
}

void masala_dataset_free(masala_dataset* dataset) { delete dataset; }

size_t masala_dataset_rows(const masala_dataset* d) { return d ? d->normalized.rows() : 0; }
size_t masala_dataset_cols(const masala_dataset* d) { return d ? d->normalized.cols() : 0; }
size_t masala_dataset_dropped_rows(const masala_dataset* d) {
  return d ? d->normalized.dropped_rows : 0;
}
int masala_dataset_has_predictions(const masala_dataset* d) {
  return d && d->normalized.predictions ? 1 : 0;
}

const char* masala_dataset_feature_name(const masala_dataset* d, size_t feature) {
  if (!d || feature >= d->normalized.cols()) return nullptr;
  return d->normalized.feature_names[feature].c_str();
}

masala_status masala_dataset_fingerprint(const masala_dataset* d, char* buf, size_t size) {
  return Guard([&] {
    Require(d, "dataset");
    WriteHex(d->normalized.fingerprint, buf, size);
  });
}

masala_status masala_dataset_row(const masala_dataset* d, size_t row, double* values,
                                 size_t count) {
  return Guard([&] {
    Require(d, "dataset");
    Require(values, "values");
    if (row >= d->normalized.rows() || count != d->normalized.cols()) {
      masala::Fail(masala::ErrorCode::kInvalidArgument, "row or width out of range");
    }
    const auto r = d->normalized.original_row(row);
    std::copy(r.begin(), r.end(), values);
  });
}

masala_status masala_oracle_precomputed(const masala_dataset* d, masala_oracle** out) {
  return Guard([&] {
    Require(d, "dataset");
    Require(out, "out");
    if (!d->row_oracle) {
      masala::Fail(masala::ErrorCode::kInvalidArgument, "dataset has no prediction column");
    }
    *out = new masala_oracle{*d->row_oracle};
  });
}

masala_status masala_oracle_command(const masala_dataset* d, const char* command,
                                    double timeout_seconds, masala_oracle** out) {
  return Guard([&] {
    Require(d, "dataset");
    Require(command, "command");
    Require(out, "out");
    if (!(timeout_seconds > 0.0) || !std::isfinite(timeout_seconds)) {
      masala::Fail(masala::ErrorCode::kInvalidArgument, "timeout must be positive");
    }
    const auto ms = std::chrono::milliseconds(static_cast<long long>(timeout_seconds * 1000.0));
    *out = new masala_oracle{masala::PredictionOracle(
        masala::ExternalCommand(command, d->normalized.feature_names, ms))};
  });
}

void masala_oracle_free(masala_oracle* oracle) { delete oracle; }

masala_status masala_oracle_predict(const masala_oracle* oracle, const double* rows,
                                    size_t n_rows, size_t n_cols, double* out) {
  return Guard([&] {
    Require(oracle, "oracle");
    Require(out, "out");
    if (n_rows && !rows) Require(rows, "rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
    for (size_t i = 0; i < n_rows; ++i) {
      for (size_t j = 0; j < n_cols; ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i * n_cols + j];
      }
    }
    const auto preds = oracle->oracle.Predict(m);
    std::copy(preds.begin(), preds.end(), out);
  });
}

masala_status masala_model_build(const masala_dataset* d, const char* config_json,
                                 masala_model** out) {
  return Guard([&] {
    Require(d, "dataset");
    Require(out, "out");
    *out = new masala_model{masala::ClusterAll(d->normalized, ConfigOrDefault(config_json))};
  });
}

masala_status masala_model_parse(const char* json, const masala_dataset* d, masala_model** out) {
  return Guard([&] {
    Require(json, "json");
    Require(d, "dataset");
    Require(out, "out");
    *out = new masala_model{masala::LoadModel(json, d->normalized)};
  });
}

masala_status masala_model_load(const char* path, const masala_dataset* d, masala_model** out) {
  return Guard([&] {
    Require(path, "path");
    Require(d, "dataset");
    Require(out, "out");
    *out = new masala_model{masala::LoadModel(ReadFile(path), d->normalized)};
  });
}

masala_status masala_model_save(const masala_model* model, const char* path) {
  return Guard([&] {
    Require(model, "model");
    Require(path, "path");
    WriteFile(path, masala::Dump(masala::ModelToJson(model->model)));
  });
}

masala_status masala_model_to_json(const masala_model* model, char** out) {
  return Guard([&] {
    Require(model, "model");
    Require(out, "out");
    *out = CopyString(masala::Dump(masala::ModelToJson(model->model)));
  });
}

void masala_model_free(masala_model* model) { delete model; }

size_t masala_model_num_features(const masala_model* model) {
  return model ? model->model.per_feature.size() : 0;
}

const char* masala_model_feature_name(const masala_model* model, size_t feature) {
  if (!model || feature >= model->model.feature_names.size()) return nullptr;
  return model->model.feature_names[feature].c_str();
}

size_t masala_model_num_clusters(const masala_model* model, size_t feature) {
  if (!model || feature >= model->model.per_feature.size()) return 0;
  return model->model.per_feature[feature].k();
}

double masala_model_cost(const masala_model* model, size_t feature) {
  if (!model || feature >= model->model.per_feature.size()) return NAN;
  return model->model.per_feature[feature].cost;
}

masala_status masala_model_file_fingerprint(const char* path, char* buf, size_t size) {
  return Guard([&] {
    Require(path, "path");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ReadFile(path));
    } catch (const nlohmann::json::parse_error& e) {
      masala::Fail(masala::ErrorCode::kParse, std::string("model is not valid JSON: ") + e.what());
    }
    WriteHex(masala::ModelFromJson(j).fingerprint, buf, size);
  });
}

masala_status masala_dissimilarity_csv(const masala_dataset* d, size_t feature,
                                       const char* config_json, char** out) {
  return Guard([&] {
    Require(d, "dataset");
    Require(out, "out");
    if (feature >= d->normalized.cols()) {
      masala::Fail(masala::ErrorCode::kInvalidArgument, "feature out of range");
    }
    const auto config = ConfigOrDefault(config_json);
    const auto values = d->normalized.column(feature);
    const auto profiles = masala::BuildProfiles(values, d->normalized.RequirePredictions(),
                                                config.neighborhood_threshold);
    *out = CopyString(masala::DissimilarityCsv(masala::PairwiseDissimilarity(profiles, values)));
  });
}

masala_status masala_explain_row(const masala_model* model, const masala_dataset* d,
                                 const masala_oracle* oracle, size_t row,
                                 masala_explanation** out) {
  return Guard([&] {
    Require(model, "model");
    Require(d, "dataset");
    Require(oracle, "oracle");
    Require(out, "out");
    *out = new masala_explanation{
        masala::ExplainRow(row, model->model, d->normalized, oracle->oracle),
        d->normalized.feature_names};
  });
}

masala_status masala_explain_values(const masala_model* model, const masala_dataset* d,
                                    const masala_oracle* oracle, const double* values,
                                    size_t count, masala_explanation** out) {
  return Guard([&] {
    Require(model, "model");
    Require(d, "dataset");
    Require(oracle, "oracle");
    Require(values, "values");
    Require(out, "out");
    *out = new masala_explanation{
        masala::Explain(std::span<const double>(values, count), model->model, d->normalized,
                        oracle->oracle),
        d->normalized.feature_names};
  });
}

void masala_explanation_free(masala_explanation* e) { delete e; }

masala_status masala_explanation_to_json(const masala_explanation* e, char** out) {
  return Guard([&] {
    Require(e, "explanation");
    Require(out, "out");
    *out = CopyString(masala::Dump(masala::ExplanationToJson(e->explanation, e->feature_names)));
  });
}

size_t masala_explanation_num_features(const masala_explanation* e) {
  return e ? static_cast<size_t>(e->explanation.surrogate.coefficients.size()) : 0;
}

double masala_explanation_coefficient(const masala_explanation* e, size_t feature,
                                      int original_units) {
  if (!e || feature >= masala_explanation_num_features(e)) return NAN;
  const auto& s = e->explanation.surrogate;
  const auto i = static_cast<Eigen::Index>(feature);
  return original_units ? s.coefficients_original_units(i) : s.coefficients(i);
}

double masala_explanation_intercept(const masala_explanation* e, int original_units) {
  if (!e) return NAN;
  return original_units ? e->explanation.surrogate.intercept_original_units
                        : e->explanation.surrogate.intercept;
}

double masala_explanation_base_prediction(const masala_explanation* e) {
  return e ? e->explanation.base_prediction : NAN;
}
double masala_explanation_surrogate_prediction(const masala_explanation* e) {
  return e ? e->explanation.surrogate_prediction : NAN;
}
double masala_explanation_fidelity(const masala_explanation* e) {
  return e ? e->explanation.instance_fidelity : NAN;
}
size_t masala_explanation_locality_size(const masala_explanation* e) {
  return e && e->explanation.locality ? e->explanation.locality->member_rows.size() : 0;
}
size_t masala_explanation_fallback_level(const masala_explanation* e) {
  return e && e->explanation.locality ? e->explanation.locality->fallback_level : 0;
}

masala_status masala_evaluate(const masala_dataset* d, const masala_oracle* live_oracle,
                              const char* methods_json, const char* config_json,
                              masala_report** out) {
  return Guard([&] {
    Require(d, "dataset");
    Require(methods_json, "methods_json");
    Require(out, "out");
    if (!d->row_oracle) {
      masala::Fail(masala::ErrorCode::kInvalidArgument,
                   "evaluation needs a dataset with a prediction column");
    }
    std::vector<masala::MethodSpec> methods;
    try {
      const auto j = nlohmann::json::parse(methods_json);
      for (const auto& m : j) {
        masala::MethodSpec spec;
        spec.method = masala::ParseMethod(m.at("method").get<std::string>());
        if (m.contains("kernel_widths")) {
          spec.kernel_widths = m.at("kernel_widths").get<std::vector<double>>();
        }
        methods.push_back(std::move(spec));
      }
    } catch (const nlohmann::json::exception& e) {
      masala::Fail(masala::ErrorCode::kParse, std::string("bad methods document: ") + e.what());
    }
    if (live_oracle && !live_oracle->oracle.is_live()) {
      masala::Fail(masala::ErrorCode::kInvalidArgument, "live oracle must be a command oracle");
    }
    masala::BenchmarkInputs inputs{d->normalized, *d->row_oracle,
                                   live_oracle ? &live_oracle->oracle : nullptr, nullptr};
    *out = new masala_report{masala::RunBenchmark(inputs, methods, ConfigOrDefault(config_json))};
  });
}

void masala_report_free(masala_report* report) { delete report; }

masala_status masala_report_json(const masala_report* r, char** out) {
  return Guard([&] {
    Require(r, "report");
    Require(out, "out");
    *out = CopyString(masala::Dump(masala::ReportToJson(r->report)));
  });
}

masala_status masala_report_text(const masala_report* r, char** out) {
  return Guard([&] {
    Require(r, "report");
    Require(out, "out");
    *out = CopyString(masala::ReportToText(r->report));
  });
}

masala_status masala_report_instances_csv(const masala_report* r, char** out) {
  return Guard([&] {
    Require(r, "report");
    Require(out, "out");
    *out = CopyString(masala::ReportInstancesCsv(r->report));
  });
}

size_t masala_report_num_rows(const masala_report* r) { return r ? r->report.rows.size() : 0; }
size_t masala_report_num_failures(const masala_report* r) {
  return r ? r->report.failures.size() : 0;
}

masala_status masala_plot(const masala_model* model, const masala_dataset* d, const char* feature,
                          long long target_row, char** svg_out, char** document_json_out) {
  return Guard([&] {
    Require(model, "model");
    Require(d, "dataset");
    Require(feature, "feature");
    const auto index = masala::ResolveFeature(model->model, feature);
    std::optional<std::size_t> target;
    if (target_row >= 0) target = static_cast<std::size_t>(target_row);
    const auto doc = masala::BuildPlotDocument(model->model, d->normalized, index, target);
    std::string svg = masala::RenderSvg(doc);
    std::string json = masala::Dump(masala::PlotToJson(doc));
    char* svg_copy = svg_out ? CopyString(svg) : nullptr;
    if (document_json_out) {
      try {
        *document_json_out = CopyString(json);
      } catch (...) {
        std::free(svg_copy);
        throw;
      }
    }
    if (svg_out) *svg_out = svg_copy;
  });
}

masala_status masala_plot_render(const char* document_json, char** svg_out) {
  return Guard([&] {
    Require(document_json, "document_json");
    Require(svg_out, "svg_out");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(document_json);
    } catch (const nlohmann::json::parse_error& e) {
      masala::Fail(masala::ErrorCode::kParse, std::string("plot document is not JSON: ") + e.what());
    }
    *svg_out = CopyString(masala::RenderSvg(masala::PlotFromJson(j)));
  });
}

}  // extern "C"
