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

#include "core/linalg.hpp"

#include <cmath>

#include "core/error.hpp"

namespace masala {

Line FitWeightedLine(std::span<const double> x, std::span<const double> y,
                     std::span<const std::size_t> indices, std::span<const double> weights) {
  if (indices.empty()) Fail(ErrorCode::kInvalidArgument, "cannot fit a line to no points");
  const bool weighted = !weights.empty();
  double sw = 0.0, sx = 0.0, sy = 0.0;
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const double w = weighted ? weights[k] : 1.0;
    if (w <= 0.0) continue;
    const std::size_t i = indices[k];
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
    lo = std::min(lo, x[i]);
    hi = std::max(hi, x[i]);
  }
  if (sw <= 0.0) Fail(ErrorCode::kInvalidArgument, "all line-fit weights are zero");
  const double mx = sx / sw;
  const double my = sy / sw;
  if (lo == hi) return {0.0, my};
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const double w = weighted ? weights[k] : 1.0;
    if (w <= 0.0) continue;
    const std::size_t i = indices[k];
    const double dx = x[i] - mx;
    sxx += w * dx * dx;
    sxy += w * dx * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

Line FitLine(std::span<const double> x, std::span<const double> y,
             std::span<const std::size_t> indices) {
  return FitWeightedLine(x, y, indices, {});
}

double Rmse(const Line& line, std::span<const double> x, std::span<const double> y,
            std::span<const std::size_t> indices) {
  if (indices.empty()) return 0.0;
  double ss = 0.0;
  for (std::size_t i : indices) {
    const double r = line(x[i]) - y[i];
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(indices.size()));
}

AffineFit FitWeightedRidge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& weights, double lambda) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  if (n == 0) Fail(ErrorCode::kInvalidArgument, "cannot fit a surrogate to no points");
  if (y.size() != n) Fail(ErrorCode::kInvalidArgument, "target length mismatch");
  const Eigen::VectorXd w = weights.size() == 0 ? Eigen::VectorXd::Ones(n) : weights;
  if (w.size() != n) Fail(ErrorCode::kInvalidArgument, "weight length mismatch");
  const double sw = w.sum();
  if (!(sw > 0.0)) Fail(ErrorCode::kInvalidArgument, "all surrogate weights are zero");

  const Eigen::RowVectorXd x_mean = (w.transpose() * x) / sw;
  const double y_mean = w.dot(y) / sw;
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;
  const Eigen::VectorXd sqrt_w = w.array().sqrt();

  // Ridge as an augmented least-squares problem [sqrt(W) Xc; sqrt(lambda) I],
  // solved by QR to avoid squaring the condition number.
  Eigen::MatrixXd a(n + m, m);
  a.topRows(n) = sqrt_w.asDiagonal() * xc;
  a.bottomRows(m) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + m);
  b.head(n) = sqrt_w.cwiseProduct(yc);

  // Iterated Tikhonov: each sweep re-solves for the residual, shrinking the
  // ridge bias by lambda / (sigma^2 + lambda) per direction while directions
  // the data do not determine stay regularized.
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::VectorXd beta = qr.solve(b);
  for (int sweep = 0; sweep < kRidgeRefinements; ++sweep) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n + m);
    r.head(n) = b.head(n) - a.topRows(n) * beta;
    beta += qr.solve(r);
  }
  AffineFit fit;
  fit.coefficients = beta;
  fit.intercept = y_mean - x_mean.dot(fit.coefficients);
  if (!fit.coefficients.allFinite() || !std::isfinite(fit.intercept)) {
    Fail(ErrorCode::kInternal, "surrogate fit produced non-finite parameters");
  }
  return fit;
}

}  // namespace masala
