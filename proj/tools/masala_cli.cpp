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

// masala: cluster, explain, evaluate and plot from the command line.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "masala/masala.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reported as a single diagnostic line by main().
struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void Check(masala_status status, const std::string& context) {
  if (status != MASALA_OK) throw CliError(context + ": " + masala_last_error());
}

struct Free {
  void operator()(masala_dataset* p) const { masala_dataset_free(p); }
  void operator()(masala_oracle* p) const { masala_oracle_free(p); }
  void operator()(masala_model* p) const { masala_model_free(p); }
  void operator()(masala_explanation* p) const { masala_explanation_free(p); }
  void operator()(masala_report* p) const { masala_report_free(p); }
  void operator()(char* p) const { masala_string_free(p); }
};
template <typename T>
using Owned = std::unique_ptr<T, Free>;

std::string Take(char* s) {
  Owned<char> owned(s);
  return s ? std::string(s) : std::string();
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes through a sibling temp file so a failed run never leaves a partial artifact.
void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CliError("cannot write '" + path.string() + "'");
    out << text;
    out.close();
    if (!out) throw CliError("write failed for '" + path.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw CliError("cannot move output into '" + path.string() + "': " + ec.message());
}

struct Common {
  std::string data;
  std::string pred;
  std::string config;
  std::optional<unsigned long long> seed;
  std::string out;
};

void AddCommon(CLI::App* cmd, Common& c, bool data_required = true) {
  auto* data = cmd->add_option("--data", c.data, "CSV dataset (header row)");
  if (data_required) data->required();
  cmd->add_option("--pred", c.pred, "column holding model predictions")->default_val("f");
  cmd->add_option("--config", c.config, "JSON file with run configuration");
  cmd->add_option("--seed", c.seed, "master seed, overrides the config file");
}

// Config file contents with --seed applied; empty for all defaults.
std::string ConfigJson(const Common& c) {
  json j = json::object();
  if (!c.config.empty()) {
    try {
      j = json::parse(ReadText(c.config));
    } catch (const json::exception& e) {
      throw CliError("config '" + c.config + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw CliError("config '" + c.config + "' must be a JSON object");
  }
  if (c.seed) j["seed"] = *c.seed;
  return j.empty() ? std::string() : j.dump();
}

Owned<masala_dataset> LoadData(const Common& c) {
  masala_dataset* d = nullptr;
  Check(masala_dataset_load(c.data.c_str(), c.pred.empty() ? nullptr : c.pred.c_str(), &d),
        "data");
  return Owned<masala_dataset>(d);
}

Owned<masala_oracle> MakeOracle(const masala_dataset* d, const std::string& command,
                                double timeout) {
  masala_oracle* o = nullptr;
  if (command.empty()) {
    Check(masala_oracle_precomputed(d, &o), "oracle");
  } else {
    Check(masala_oracle_command(d, command.c_str(), timeout, &o), "oracle");
  }
  return Owned<masala_oracle>(o);
}

Owned<masala_model> LoadModelFile(const std::string& path, const masala_dataset* d) {
  masala_model* m = nullptr;
  Check(masala_model_load(path.c_str(), d, &m), path);
  return Owned<masala_model>(m);
}

std::vector<double> ParseValues(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw CliError("malformed instance value '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) {
      throw CliError("malformed instance value '" + item + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw CliError("--values is empty");
  return values;
}

struct ClusterArgs {
  Common common;
  std::string dump_dir;
};

int RunCluster(const ClusterArgs& a) {
  auto d = LoadData(a.common);
  const auto config = ConfigJson(a.common);
  masala_model* raw = nullptr;
  Check(masala_model_build(d.get(), config.empty() ? nullptr : config.c_str(), &raw), "cluster");
  Owned<masala_model> model(raw);
  char* text = nullptr;
  Check(masala_model_to_json(model.get(), &text), "cluster");
  WriteText(a.common.out, Take(text));
  if (!a.dump_dir.empty()) {
    for (std::size_t m = 0; m < masala_model_num_features(model.get()); ++m) {
      char* csv = nullptr;
      Check(masala_dissimilarity_csv(d.get(), m, config.empty() ? nullptr : config.c_str(), &csv),
            "dissimilarity");
      WriteText(fs::path(a.dump_dir) / (std::string(masala_model_feature_name(model.get(), m)) +
                                        ".dissimilarity.csv"),
                Take(csv));
    }
  }
  for (std::size_t m = 0; m < masala_model_num_features(model.get()); ++m) {
    std::printf("%s: K=%zu J=%.6g\n", masala_model_feature_name(model.get(), m),
                masala_model_num_clusters(model.get(), m), masala_model_cost(model.get(), m));
  }
  return 0;
}

struct ExplainArgs {
  Common common;
  std::string model;
  std::optional<std::size_t> row;
  std::string values;
  std::string oracle_cmd;
  double oracle_timeout = 60.0;
};

int RunExplain(const ExplainArgs& a) {
  auto d = LoadData(a.common);
  auto model = LoadModelFile(a.model, d.get());
  auto oracle = MakeOracle(d.get(), a.oracle_cmd, a.oracle_timeout);
  masala_explanation* raw = nullptr;
  std::vector<double> values;
  if (a.row) {
    Check(masala_explain_row(model.get(), d.get(), oracle.get(), *a.row, &raw), "explain");
  } else {
    values = ParseValues(a.values);
    Check(masala_explain_values(model.get(), d.get(), oracle.get(), values.data(), values.size(),
                                &raw),
          "explain");
  }
  Owned<masala_explanation> e(raw);
  char* text = nullptr;
  Check(masala_explanation_to_json(e.get(), &text), "explain");
  const std::string doc = Take(text);
  if (a.common.out.empty()) {
    std::fwrite(doc.data(), 1, doc.size(), stdout);
    return 0;
  }
  WriteText(a.common.out, doc);

  const std::size_t m = masala_explanation_num_features(e.get());
  std::vector<std::size_t> order(m);
  for (std::size_t k = 0; k < m; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return std::abs(masala_explanation_coefficient(e.get(), l, 0)) >
           std::abs(masala_explanation_coefficient(e.get(), r, 0));
  });
  std::size_t width = 7;
  for (std::size_t k = 0; k < m; ++k) {
    width = std::max(width, std::string(masala_model_feature_name(model.get(), k)).size());
  }
  std::printf("%-*s  %14s  %14s\n", static_cast<int>(width), "feature", "normalized", "original");
  for (auto k : order) {
    std::printf("%-*s  %14.6g  %14.6g\n", static_cast<int>(width),
                masala_model_feature_name(model.get(), k),
                masala_explanation_coefficient(e.get(), k, 0),
                masala_explanation_coefficient(e.get(), k, 1));
  }
  std::printf("prediction=%.6g surrogate=%.6g fidelity=%.3g locality=%zu fallback=%zu\n",
              masala_explanation_base_prediction(e.get()),
              masala_explanation_surrogate_prediction(e.get()),
              masala_explanation_fidelity(e.get()), masala_explanation_locality_size(e.get()),
              masala_explanation_fallback_level(e.get()));
  return 0;
}

struct EvaluateArgs {
  Common common;
  std::vector<std::string> methods;
  std::vector<double> kernel_widths;
  std::string oracle_cmd;
  double oracle_timeout = 60.0;
};

int RunEvaluate(const EvaluateArgs& a) {
  auto d = LoadData(a.common);
  std::optional<Owned<masala_oracle>> live;
  if (!a.oracle_cmd.empty()) live = MakeOracle(d.get(), a.oracle_cmd, a.oracle_timeout);
  json methods = json::array();
  for (const auto& name : a.methods) {
    json spec = {{"method", name}};
    if (!a.kernel_widths.empty() && (name == "lime" || name == "chilli")) {
      spec["kernel_widths"] = a.kernel_widths;
    }
    methods.push_back(spec);
  }
  const auto config = ConfigJson(a.common);
  masala_report* raw = nullptr;
  Check(masala_evaluate(d.get(), live ? live->get() : nullptr, methods.dump().c_str(),
                        config.empty() ? nullptr : config.c_str(), &raw),
        "evaluate");
  Owned<masala_report> report(raw);
  char *report_json = nullptr, *text = nullptr, *csv = nullptr;
  Check(masala_report_json(report.get(), &report_json), "evaluate");
  Check(masala_report_text(report.get(), &text), "evaluate");
  Check(masala_report_instances_csv(report.get(), &csv), "evaluate");
  const std::string doc = Take(report_json), table = Take(text), instances = Take(csv);
  const fs::path dir = a.common.out;
  WriteText(dir / "report.json", doc);
  WriteText(dir / "report.txt", table);
  WriteText(dir / "instances.csv", instances);
  std::fwrite(table.data(), 1, table.size(), stdout);

  bool any_completed = false;
  const json parsed = json::parse(doc);
  for (const auto& row : parsed.at("rows")) {
    any_completed = any_completed || row.at("runs_completed").get<std::size_t>() > 0;
  }
  if (!any_completed) throw CliError("evaluate: every method failed; see report.json");
  return 0;
}

struct PlotArgs {
  Common common;
  std::string model;
  std::string feature;
  std::optional<long long> row;
  std::string from_json;
};

int RunPlot(const PlotArgs& a) {
  const fs::path out = a.common.out;
  fs::path doc_path = out;
  doc_path.replace_extension(".json");
  if (doc_path == out) doc_path += ".json";
  if (!a.from_json.empty()) {
    char* svg = nullptr;
    Check(masala_plot_render(ReadText(a.from_json).c_str(), &svg), a.from_json);
    WriteText(out, Take(svg));
    return 0;
  }
  if (a.common.data.empty() || a.model.empty() || a.feature.empty()) {
    throw CliError("plot needs --data, --model and --feature (or --from-json)");
  }
  auto d = LoadData(a.common);
  auto model = LoadModelFile(a.model, d.get());
  char *svg = nullptr, *doc = nullptr;
  Check(masala_plot(model.get(), d.get(), a.feature.c_str(), a.row.value_or(-1), &svg, &doc),
        "plot");
  const std::string svg_text = Take(svg), doc_text = Take(doc);
  WriteText(out, svg_text);
  WriteText(doc_path, doc_text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"masala: piecewise-linear local surrogate explanations for tabular regressors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(masala_version()));

  ClusterArgs cluster;
  auto* cluster_cmd = app.add_subcommand("cluster", "cluster every feature and save the model");
  AddCommon(cluster_cmd, cluster.common);
  cluster_cmd->add_option("--out", cluster.common.out, "model JSON path")->required();
  cluster_cmd->add_option("--dump-dissimilarity", cluster.dump_dir,
                          "directory for per-feature dissimilarity matrices");

  ExplainArgs explain;
  auto* explain_cmd = app.add_subcommand("explain", "explain one instance with a saved model");
  AddCommon(explain_cmd, explain.common);
  explain_cmd->add_option("--model", explain.model, "model JSON from 'cluster'")->required();
  auto* row = explain_cmd->add_option("--row", explain.row, "dataset row to explain");
  auto* values = explain_cmd->add_option("--values", explain.values,
                                         "comma-separated feature values in original units");
  row->excludes(values);
  explain_cmd->add_option("--oracle-cmd", explain.oracle_cmd,
                          "shell command answering predictions for unseen instances");
  explain_cmd->add_option("--oracle-timeout", explain.oracle_timeout, "seconds per oracle call")
      ->check(CLI::PositiveNumber);
  explain_cmd->add_option("--out", explain.common.out, "explanation JSON path (stdout if absent)");

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "benchmark fidelity and consistency");
  AddCommon(evaluate_cmd, evaluate.common);
  evaluate_cmd->add_option("--methods", evaluate.methods, "masala, lime, chilli, global")
      ->delimiter(',')
      ->default_val(std::vector<std::string>{"masala"});
  evaluate_cmd->add_option("--kernel-widths", evaluate.kernel_widths,
                           "LIME/CHILLI grid, overrides the config")
      ->delimiter(',');
  evaluate_cmd->add_option("--oracle-cmd", evaluate.oracle_cmd,
                           "shell command answering predictions, needed by lime and chilli");
  evaluate_cmd->add_option("--oracle-timeout", evaluate.oracle_timeout, "seconds per oracle call")
      ->check(CLI::PositiveNumber);
  evaluate_cmd->add_option("--out", evaluate.common.out, "output directory")->required();

  PlotArgs plot;
  auto* plot_cmd = app.add_subcommand("plot", "SVG scatter of one feature's clusters");
  AddCommon(plot_cmd, plot.common, false);
  plot_cmd->add_option("--model", plot.model, "model JSON from 'cluster'");
  plot_cmd->add_option("--feature", plot.feature, "feature name or zero-based index");
  plot_cmd->add_option("--row", plot.row, "dataset row to highlight");
  plot_cmd->add_option("--from-json", plot.from_json, "re-render a saved plot document");
  plot_cmd->add_option("--out", plot.common.out, "SVG path; the document goes next to it")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (cluster_cmd->parsed()) return RunCluster(cluster);
    if (explain_cmd->parsed()) {
      if (!explain.row && explain.values.empty()) throw CliError("explain needs --row or --values");
      return RunExplain(explain);
    }
    if (evaluate_cmd->parsed()) return RunEvaluate(evaluate);
    if (plot_cmd->parsed()) return RunPlot(plot);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::fprintf(stderr, "masala: error: %s\n", msg.c_str());
    return 1;
  }
  return 1;
}
