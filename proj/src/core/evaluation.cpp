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

#include "core/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>

#include "core/error.hpp"
#include "core/linalg.hpp"

namespace masala {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void RequireLive(const PredictionOracle& oracle, std::string_view method) {
  if (!oracle.is_live()) {
    Fail(ErrorCode::kInvalidArgument,
         std::string(method) + " perturbs inputs and needs a live oracle command, not " +
             oracle.Describe());
  }
}

void CheckBaseline(const Dataset& normalized, const BaselineConfig& config,
                   std::span<const double> x) {
  if (!normalized.normalized) Fail(ErrorCode::kInvalidArgument, "dataset must be normalized");
  if (!(config.kernel_width > 0.0)) Fail(ErrorCode::kInvalidArgument, "kernel width must be > 0");
  if (config.perturbation_count < normalized.cols() + 2) {
    Fail(ErrorCode::kInvalidArgument, "perturbation count must be at least M + 2 (" +
                                          std::to_string(normalized.cols() + 2) + ")");
  }
  if (x.size() != normalized.cols()) Fail(ErrorCode::kInvalidArgument, "instance has wrong width");
}

// exp(-d^2 / kw^2) rescaled so the largest weight is 1.
Eigen::VectorXd KernelWeights(const Eigen::VectorXd& squared_distances, double kernel_width) {
  const double nearest = squared_distances.minCoeff();
  const double kw2 = kernel_width * kernel_width;
  return ((squared_distances.array() - nearest) / -kw2).exp().matrix();
}

Eigen::VectorXd SquaredDistances(const Eigen::MatrixXd& points, std::span<const double> x) {
  const Eigen::RowVectorXd center =
      Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return (points.rowwise() - center).rowwise().squaredNorm();
}

Explanation FitPerturbations(std::string method, double kernel_width,
                             std::span<const double> original_x, const Eigen::MatrixXd& z,
                             const Dataset& normalized, const PredictionOracle& oracle) {
  const auto normalized_x = normalized.ToNormalized(original_x);
  const Eigen::Index p = z.rows();
  const Eigen::Index m = z.cols();
  // Row 0 is the target itself so one oracle call yields f(x) too.
  Eigen::MatrixXd query(p + 1, m);
  for (Eigen::Index j = 0; j < m; ++j) query(0, j) = original_x[static_cast<std::size_t>(j)];
  for (Eigen::Index r = 0; r < p; ++r) {
    for (Eigen::Index j = 0; j < m; ++j) {
      query(r + 1, j) = normalized.transforms[static_cast<std::size_t>(j)].Invert(z(r, j));
    }
  }
  const auto preds = oracle.Predict(query);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(preds.data() + 1, p);
  const Eigen::VectorXd w = KernelWeights(SquaredDistances(z, normalized_x), kernel_width);

  Explanation e;
  e.method = std::move(method);
  e.hyperparameter = kernel_width;
  e.target_values.assign(original_x.begin(), original_x.end());
  e.surrogate = MakeSurrogate(FitWeightedRidge(z, y, w, kSurrogateRidge), normalized.transforms,
                              static_cast<std::size_t>(p), kSurrogateRidge);
  e.base_prediction = preds.front();
  e.surrogate_prediction = e.surrogate.PredictNormalized(normalized_x);
  e.instance_fidelity = std::abs(e.base_prediction - e.surrogate_prediction);
  return e;
}

std::string FormatDouble(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

MeanStd PopulationMeanStd(std::span<const double> values) {
  if (values.empty()) return {NAN, NAN};
  // Shifting by the first value keeps identical inputs exact.
  const double shift = values.front();
  double sum = 0.0;
  for (double v : values) sum += v - shift;
  const double n = static_cast<double>(values.size());
  const double mean_shifted = sum / n;
  double ss = 0.0;
  for (double v : values) {
    const double d = (v - shift) - mean_shifted;
    ss += d * d;
  }
  return {shift + mean_shifted, std::sqrt(ss / n)};
}

double ExplanationFidelity(std::span<const Explanation> explanations) {
  if (explanations.empty()) Fail(ErrorCode::kInvalidArgument, "no explanations to score");
  double sum = 0.0;
  for (const auto& e : explanations) sum += e.instance_fidelity;
  return sum / static_cast<double>(explanations.size());
}

double ConsistencyOfCoefficients(std::span<const Eigen::VectorXd> coefficients) {
  if (coefficients.size() < 2) {
    Fail(ErrorCode::kInvalidArgument, "consistency needs at least 2 repeated explanations");
  }
  const Eigen::Index m = coefficients.front().size();
  std::vector<Eigen::VectorXd> scaled;
  for (const auto& c : coefficients) {
    if (c.size() != m) Fail(ErrorCode::kInvalidArgument, "repeats disagree on feature count");
    const double peak = c.cwiseAbs().maxCoeff();
    scaled.push_back(peak > 0.0 ? Eigen::VectorXd(c / peak) : Eigen::VectorXd::Zero(m));
  }
  double total = 0.0;
  std::vector<double> column(scaled.size());
  for (Eigen::Index j = 0; j < m; ++j) {
    for (std::size_t r = 0; r < scaled.size(); ++r) column[r] = scaled[r](j);
    total += PopulationMeanStd(column).std;
  }
  return 1.0 - total / static_cast<double>(m);
}

double Consistency(std::span<const Explanation> repeated) {
  std::vector<Eigen::VectorXd> coefficients;
  for (const auto& e : repeated) coefficients.push_back(e.surrogate.coefficients);
  return ConsistencyOfCoefficients(coefficients);
}

std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t run, std::uint64_t instance,
                         std::uint64_t repeat) {
  std::uint64_t h = SplitMix64(master);
  h = SplitMix64(h ^ run);
  h = SplitMix64(h ^ instance);
  return SplitMix64(h ^ repeat);
}

Eigen::MatrixXd LimePerturbations(std::span<const double> normalized_x, const Dataset& normalized,
                                  const BaselineConfig& config) {
  const auto m = static_cast<Eigen::Index>(normalized.cols());
  const auto p = static_cast<Eigen::Index>(config.perturbation_count);
  std::vector<double> sigma(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto col = normalized.column(static_cast<std::size_t>(j));
    sigma[static_cast<std::size_t>(j)] =
        PopulationMeanStd(std::vector<double>(col.begin(), col.end())).std;
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd z(p, m);
  for (Eigen::Index r = 0; r < p; ++r) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      z(r, j) = normalized_x[sj] + sigma[sj] * gauss(rng);
    }
  }
  return z;
}

Eigen::MatrixXd ChilliPerturbations(std::span<const double> normalized_x,
                                    const Dataset& normalized, const BaselineConfig& config) {
  const auto m = static_cast<Eigen::Index>(normalized.cols());
  const auto p = static_cast<Eigen::Index>(config.perturbation_count);
  const Eigen::VectorXd w =
      KernelWeights(SquaredDistances(normalized.features, normalized_x), config.kernel_width);
  std::mt19937_64 rng(config.seed);
  std::discrete_distribution<std::size_t> pick(w.data(), w.data() + w.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd z(p, m);
  for (Eigen::Index r = 0; r < p; ++r) {
    const auto row = static_cast<Eigen::Index>(pick(rng));
    const double t = unit(rng);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double xj = normalized_x[static_cast<std::size_t>(j)];
      z(r, j) = xj + t * (normalized.features(row, j) - xj);
    }
  }
  return z;
}

Explanation LimeExplain(std::span<const double> original_x, const Dataset& normalized,
                        const PredictionOracle& oracle, const BaselineConfig& config) {
  CheckBaseline(normalized, config, original_x);
  RequireLive(oracle, "LIME");
  const auto x = normalized.ToNormalized(original_x);
  return FitPerturbations("lime", config.kernel_width, original_x,
                          LimePerturbations(x, normalized, config), normalized, oracle);
}

Explanation ChilliExplain(std::span<const double> original_x, const Dataset& normalized,
                          const PredictionOracle& oracle, const BaselineConfig& config) {
  CheckBaseline(normalized, config, original_x);
  RequireLive(oracle, "CHILLI");
  const auto x = normalized.ToNormalized(original_x);
  return FitPerturbations("chilli", config.kernel_width, original_x,
                          ChilliPerturbations(x, normalized, config), normalized, oracle);
}

Explanation GlobalExplain(std::span<const double> original_x, const Dataset& normalized,
                          const PredictionOracle& oracle, std::optional<std::size_t> target_row) {
  if (!normalized.normalized) Fail(ErrorCode::kInvalidArgument, "dataset must be normalized");
  const auto preds = oracle.Predict(normalized.original_features);
  const Eigen::VectorXd y =
      Eigen::Map<const Eigen::VectorXd>(preds.data(), static_cast<Eigen::Index>(preds.size()));
  Explanation e;
  e.method = "global";
  e.target_values.assign(original_x.begin(), original_x.end());
  e.surrogate = MakeSurrogate(FitWeightedRidge(normalized.features, y, Eigen::VectorXd(),
                                               kSurrogateRidge),
                              normalized.transforms, normalized.rows(), kSurrogateRidge);
  const auto x = target_row ? normalized.row(*target_row) : normalized.ToNormalized(original_x);
  e.base_prediction = target_row ? preds[*target_row] : oracle.PredictOne(original_x);
  e.surrogate_prediction = e.surrogate.PredictNormalized(x);
  e.instance_fidelity = std::abs(e.base_prediction - e.surrogate_prediction);
  return e;
}

std::string MethodName(Method method) {
  switch (method) {
    case Method::kMasala:
      return "masala";
    case Method::kLime:
      return "lime";
    case Method::kChilli:
      return "chilli";
    case Method::kGlobal:
      return "global";
  }
  return "unknown";
}

Method ParseMethod(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "masala") return Method::kMasala;
  if (lower == "lime") return Method::kLime;
  if (lower == "chilli") return Method::kChilli;
  if (lower == "global") return Method::kGlobal;
  Fail(ErrorCode::kInvalidArgument, "unknown method '" + std::string(name) + "'");
}

std::string ReportRow::Label() const {
  std::string label = MethodName(method);
  std::transform(label.begin(), label.end(), label.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (hyperparameter) label += " (" + FormatDouble("%g", *hyperparameter) + ")";
  return label;
}

EvaluationReport RunBenchmark(const BenchmarkInputs& inputs, std::span<const MethodSpec> methods,
                              const RunConfig& config) {
  config.Validate();
  const Dataset& data = inputs.normalized;
  if (!data.normalized) Fail(ErrorCode::kInvalidArgument, "dataset must be normalized");
  data.RequirePredictions();
  if (methods.empty()) Fail(ErrorCode::kInvalidArgument, "no methods to evaluate");

  struct Variant {
    Method method;
    std::optional<double> kw;
  };
  std::vector<Variant> variants;
  bool needs_model = false;
  for (const auto& spec : methods) {
    switch (spec.method) {
      case Method::kMasala:
        needs_model = true;
        [[fallthrough]];
      case Method::kGlobal:
        variants.push_back({spec.method, std::nullopt});
        break;
      case Method::kLime:
      case Method::kChilli: {
        if (!inputs.live_oracle) {
          Fail(ErrorCode::kInvalidArgument,
               MethodName(spec.method) + " needs a live oracle command");
        }
        const auto& grid = spec.kernel_widths.empty() ? config.kernel_widths : spec.kernel_widths;
        if (grid.empty()) Fail(ErrorCode::kInvalidArgument, "empty kernel width grid");
        for (double kw : grid) variants.push_back({spec.method, kw});
        break;
      }
    }
  }

  std::optional<ClusteringModel> built;
  const ClusteringModel* model = inputs.model;
  if (needs_model && !model) {
    built = ClusterAll(data, config);
    model = &*built;
  }
  if (model) CheckFingerprint(*model, data);

  EvaluationReport report;
  report.protocol = config;
  report.fingerprint = data.fingerprint;
  report.rows.resize(variants.size());
  for (std::size_t v = 0; v < variants.size(); ++v) {
    report.rows[v].method = variants[v].method;
    report.rows[v].hyperparameter = variants[v].kw;
  }

  const std::size_t n = data.rows();
  const std::size_t picks = std::min(config.eval_instances, n);
  for (std::size_t run = 0; run < config.runs; ++run) {
    // Partial Fisher-Yates over row ids.
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::mt19937_64 pick_rng(DeriveSeed(config.seed, run, ~0ULL, ~0ULL));
    for (std::size_t i = 0; i < picks; ++i) {
      std::uniform_int_distribution<std::size_t> d(i, n - 1);
      std::swap(pool[i], pool[d(pick_rng)]);
    }
    pool.resize(picks);
    report.instances_per_run.push_back(pool);

    for (std::size_t v = 0; v < variants.size(); ++v) {
      const auto& variant = variants[v];
      std::vector<double> run_consistency, run_fidelity;
      for (std::size_t inst = 0; inst < picks; ++inst) {
        const std::size_t row = pool[inst];
        const auto x = data.original_row(row);
        try {
          std::vector<Explanation> repeats;
          for (std::size_t r = 0; r < config.repeats; ++r) {
            BaselineConfig bc{variant.kw.value_or(1.0), config.perturbation_count,
                              DeriveSeed(config.seed, run, inst, r)};
            switch (variant.method) {
              case Method::kMasala:
                repeats.push_back(ExplainRow(row, *model, data, inputs.row_oracle));
                break;
              case Method::kGlobal:
                repeats.push_back(GlobalExplain(x, data, inputs.row_oracle, row));
                break;
              case Method::kLime:
                repeats.push_back(LimeExplain(x, data, *inputs.live_oracle, bc));
                break;
              case Method::kChilli:
                repeats.push_back(ChilliExplain(x, data, *inputs.live_oracle, bc));
                break;
            }
          }
          const double consistency = Consistency(repeats);
          const double fidelity = repeats.front().instance_fidelity;
          run_consistency.push_back(consistency);
          run_fidelity.push_back(fidelity);
          report.per_instance.push_back(
              {run, row, variant.method, variant.kw, fidelity, consistency});
        } catch (const Error& e) {
          report.failures.push_back({run, row, variant.method, variant.kw, e.what()});
          ++report.rows[v].failures;
        }
      }
      if (!run_fidelity.empty()) {
        report.rows[v].consistency_per_run.push_back(PopulationMeanStd(run_consistency).mean);
        report.rows[v].fidelity_per_run.push_back(PopulationMeanStd(run_fidelity).mean);
      }
    }
  }
  for (auto& row : report.rows) {
    row.consistency = PopulationMeanStd(row.consistency_per_run);
    row.fidelity = PopulationMeanStd(row.fidelity_per_run);
  }
  return report;
}

nlohmann::json ReportToJson(const EvaluationReport& report) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  auto num = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"method", MethodName(r.method)},
                    {"label", r.Label()},
                    {"hyperparameter", opt(r.hyperparameter)},
                    {"consistency_mean", num(r.consistency.mean)},
                    {"consistency_std", num(r.consistency.std)},
                    {"fidelity_mean", num(r.fidelity.mean)},
                    {"fidelity_std", num(r.fidelity.std)},
                    {"consistency_per_run", r.consistency_per_run},
                    {"fidelity_per_run", r.fidelity_per_run},
                    {"runs_completed", r.fidelity_per_run.size()},
                    {"failures", r.failures}});
  }
  nlohmann::json per_instance = nlohmann::json::array();
  for (const auto& p : report.per_instance) {
    per_instance.push_back({{"run", p.run},
                            {"row", p.row},
                            {"method", MethodName(p.method)},
                            {"hyperparameter", opt(p.hyperparameter)},
                            {"fidelity", p.fidelity},
                            {"consistency", p.consistency}});
  }
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : report.failures) {
    failures.push_back({{"run", f.run},
                        {"row", f.row},
                        {"method", MethodName(f.method)},
                        {"hyperparameter", opt(f.hyperparameter)},
                        {"message", f.message}});
  }
  return {{"format", "masala-evaluation-report"},
          {"version", 1},
          {"fingerprint", report.fingerprint.Hex()},
          {"protocol",
           {{"eval_instances", report.protocol.eval_instances},
            {"repeats", report.protocol.repeats},
            {"runs", report.protocol.runs},
            {"seed", report.protocol.seed},
            {"perturbation_count", report.protocol.perturbation_count},
            {"instances_per_run", report.instances_per_run}}},
          {"rows", rows},
          {"per_instance", per_instance},
          {"failures", failures}};
}

std::string ReportToText(const EvaluationReport& report) {
  std::vector<std::array<std::string, 3>> cells;
  cells.push_back({"Method", "Consistency", "Fidelity"});
  auto cell = [](const MeanStd& s, const char* mean_fmt) {
    if (!std::isfinite(s.mean)) return std::string("n/a");
    return FormatDouble(mean_fmt, s.mean) + " ± " + FormatDouble("%.3f", s.std);
  };
  for (const auto& r : report.rows) {
    cells.push_back({r.Label(), cell(r.consistency, "%.2f"), cell(r.fidelity, "%.3f")});
  }
  // Column widths in code points; the only non-ASCII glyph is the 2-byte +-.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
  };
  std::array<std::size_t, 3> widths{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < 3; ++c) widths[c] = std::max(widths[c], width(row[c]));
  }
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      out += cells[i][c];
      if (c < 2) out += std::string(widths[c] - width(cells[i][c]) + 2, ' ');
    }
    out += '\n';
    if (i == 0) {
      out += std::string(widths[0] + widths[1] + widths[2] + 4, '-');
      out += '\n';
    }
  }
  out += "runs=" + std::to_string(report.protocol.runs) +
         " instances=" + std::to_string(report.protocol.eval_instances) +
         " repeats=" + std::to_string(report.protocol.repeats) +
         " seed=" + std::to_string(report.protocol.seed) + "\n";
  if (!report.failures.empty()) {
    out += std::to_string(report.failures.size()) + " explanation(s) failed; see report JSON\n";
  }
  return out;
}

std::string ReportInstancesCsv(const EvaluationReport& report) {
  std::string out = "run,row,method,hyperparameter,fidelity,consistency\n";
  for (const auto& p : report.per_instance) {
    out += std::to_string(p.run) + "," + std::to_string(p.row) + "," + MethodName(p.method) + "," +
           (p.hyperparameter ? FormatDouble("%.17g", *p.hyperparameter) : std::string()) + "," +
           FormatDouble("%.17g", p.fidelity) + "," + FormatDouble("%.17g", p.consistency) + "\n";
  }
  return out;
}

}  // namespace masala
