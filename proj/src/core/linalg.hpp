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

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace masala {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;

  double operator()(double x) const { return slope * x + intercept; }
};

// Ordinary least squares of y on x over the selected indices. Zero spread in
// x yields slope 0 and the mean of y.
Line FitLine(std::span<const double> x, std::span<const double> y,
             std::span<const std::size_t> indices);

// Weighted version; points with zero weight are ignored.
Line FitWeightedLine(std::span<const double> x, std::span<const double> y,
                     std::span<const std::size_t> indices, std::span<const double> weights);

double Rmse(const Line& line, std::span<const double> x, std::span<const double> y,
            std::span<const std::size_t> indices);

struct AffineFit {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
};

inline constexpr int kRidgeRefinements = 2;

// Weighted least squares with an unpenalized intercept, regularized by
// iterated Tikhonov: the lambda |beta|^2 ridge solution followed by
// kRidgeRefinements residual sweeps through the same factorization. Empty
// `weights` means unit weights.
AffineFit FitWeightedRidge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& weights, double lambda);

}  // namespace masala
