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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "core/clustering.hpp"
#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/oracle.hpp"
#include "core/surrogate.hpp"

namespace masala {

double ExplanationFidelity(std::span<const Explanation> explanations);

// 1 minus the mean per-feature population std of the L-infinity normalized
// coefficient vectors. All-zero vectors normalize to all zeros.
double Consistency(std::span<const Explanation> repeated);
double ConsistencyOfCoefficients(std::span<const Eigen::VectorXd> coefficients);

// Population statistics. Identical inputs give a standard deviation of exactly 0.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd PopulationMeanStd(std::span<const double> values);

struct BaselineConfig {
  double kernel_width = 0.5;
  std::size_t perturbation_count = 1000;
  std::uint64_t seed = 0;
};

// Seed for one unit of benchmark work; independent of scheduling order.
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t run, std::uint64_t instance,
                         std::uint64_t repeat);

// Gaussian perturbations around x (per-feature training std, normalized
// space), weighted by exp(-d^2 / kw^2).
Explanation LimeExplain(std::span<const double> original_x, const Dataset& normalized,
                        const PredictionOracle& oracle, const BaselineConfig& config);

// Perturbations interpolated between x and training rows drawn with
// probability proportional to exp(-d^2 / kw^2).
Explanation ChilliExplain(std::span<const double> original_x, const Dataset& normalized,
                          const PredictionOracle& oracle, const BaselineConfig& config);

// The perturbation sets themselves, in normalized units; exposed for tests.
Eigen::MatrixXd LimePerturbations(std::span<const double> normalized_x, const Dataset& normalized,
                                  const BaselineConfig& config);
Eigen::MatrixXd ChilliPerturbations(std::span<const double> normalized_x,
                                    const Dataset& normalized, const BaselineConfig& config);

// One ridge MLR over every dataset row; the no-locality reference point.
Explanation GlobalExplain(std::span<const double> original_x, const Dataset& normalized,
                          const PredictionOracle& oracle,
                          std::optional<std::size_t> target_row = {});

enum class Method { kMasala, kLime, kChilli, kGlobal };

std::string MethodName(Method method);
Method ParseMethod(std::string_view name);

struct MethodSpec {
  Method method = Method::kMasala;
  std::vector<double> kernel_widths;  // LIME and CHILLI only
};

struct ReportRow {
  Method method = Method::kMasala;
  std::optional<double> hyperparameter;
  MeanStd consistency;
  MeanStd fidelity;
  std::vector<double> consistency_per_run;
  std::vector<double> fidelity_per_run;
  std::size_t failures = 0;

  std::string Label() const;
};

struct InstanceRecord {
  std::size_t run = 0;
  std::size_t row = 0;
  Method method = Method::kMasala;
  std::optional<double> hyperparameter;
  double fidelity = 0.0;
  double consistency = 0.0;
};

struct FailureRecord {
  std::size_t run = 0;
  std::size_t row = 0;
  Method method = Method::kMasala;
  std::optional<double> hyperparameter;
  std::string message;
};

struct EvaluationReport {
  std::vector<ReportRow> rows;
  std::vector<InstanceRecord> per_instance;
  std::vector<FailureRecord> failures;
  std::vector<std::vector<std::size_t>> instances_per_run;
  RunConfig protocol;
  Fingerprint fingerprint;
};

struct BenchmarkInputs {
  const Dataset& normalized;
  // Answers for dataset rows; used by MASALA and the global baseline.
  const PredictionOracle& row_oracle;
  // Required by LIME and CHILLI.
  const PredictionOracle* live_oracle = nullptr;
  // Built from `normalized` when absent.
  const ClusteringModel* model = nullptr;
};

EvaluationReport RunBenchmark(const BenchmarkInputs& inputs, std::span<const MethodSpec> methods,
                              const RunConfig& config);

nlohmann::json ReportToJson(const EvaluationReport& report);
std::string ReportToText(const EvaluationReport& report);
std::string ReportInstancesCsv(const EvaluationReport& report);

}  // namespace masala
