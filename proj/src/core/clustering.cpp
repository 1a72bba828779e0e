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

#include "core/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "core/error.hpp"

namespace masala {
namespace {

std::vector<std::size_t> SortedByValue(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return order;
}

// Cost differences below this are rounding noise and count as ties.
double CostTolerance(std::span<const double> predictions) {
  double scale = 0.0;
  for (double f : predictions) scale = std::max(scale, std::abs(f));
  return kCostTieTolerance * scale;
}

double FeatureRange(std::span<const double> values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

Cluster MergeClusters(const Cluster& a, const Cluster& b, const FeatureData& data) {
  Cluster out;
  out.members.reserve(a.members.size() + b.members.size());
  std::merge(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
             std::back_inserter(out.members));
  Refit(out, data);
  out.medoid = RecomputeMedoid(out, data.delta);
  return out;
}

void SortByInterval(std::vector<Cluster>& clusters) {
  std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
}

bool Contains(const Cluster& outer, const Cluster& inner) {
  return outer.lo <= inner.lo && inner.hi <= outer.hi;
}

// Absorbs one contained cluster. Returns false when none is contained.
bool ResolveContainment(std::vector<Cluster>& clusters, const FeatureData& data) {
  for (std::size_t a = 0; a < clusters.size(); ++a) {
    for (std::size_t b = a + 1; b < clusters.size(); ++b) {
      const bool a_holds_b = Contains(clusters[a], clusters[b]);
      const bool b_holds_a = Contains(clusters[b], clusters[a]);
      if (!a_holds_b && !b_holds_a) continue;
      std::size_t keep = a_holds_b ? a : b;
      if (a_holds_b && b_holds_a) {
        keep = clusters[b].members.size() > clusters[a].members.size() ? b : a;
      }
      const std::size_t drop = keep == a ? b : a;
      clusters[keep] = MergeClusters(clusters[keep], clusters[drop], data);
      clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(drop));
      return true;
    }
  }
  return false;
}

// Splits one partially overlapping pair at the midpoint of the shared
// interval. Returns false when all intervals are disjoint.
bool ResolveOverlap(std::vector<Cluster>& clusters, const FeatureData& data) {
  for (std::size_t a = 0; a < clusters.size(); ++a) {
    for (std::size_t b = 0; b < clusters.size(); ++b) {
      if (a == b) continue;
      const Cluster& left = clusters[a];
      const Cluster& right = clusters[b];
      if (!(left.lo < right.lo && right.lo <= left.hi && left.hi < right.hi)) continue;
      const double mid = 0.5 * (right.lo + left.hi);
      Cluster low, high;
      std::vector<std::size_t> all;
      std::merge(left.members.begin(), left.members.end(), right.members.begin(),
                 right.members.end(), std::back_inserter(all));
      for (std::size_t i : all) (data.values[i] < mid ? low : high).members.push_back(i);
      Refit(low, data);
      Refit(high, data);
      low.medoid = RecomputeMedoid(low, data.delta);
      high.medoid = RecomputeMedoid(high, data.delta);
      clusters[a] = std::move(low);
      clusters[b] = std::move(high);
      return true;
    }
  }
  return false;
}

// Merges clusters[index] into whichever adjacent cluster (in feature order)
// gives the lower total cost; ties prefer the left neighbour.
void MergeWithBestNeighbor(std::vector<Cluster>& clusters, std::size_t index,
                           const FeatureData& data) {
  std::optional<std::vector<Cluster>> best;
  double best_cost = std::numeric_limits<double>::infinity();
  const double tol = CostTolerance(data.predictions);
  for (const std::size_t neighbor : {index - 1, index + 1}) {
    if (neighbor >= clusters.size()) continue;  // index - 1 wraps for index 0
    std::vector<Cluster> trial = clusters;
    const std::size_t left = std::min(index, neighbor);
    trial[left] = MergeClusters(clusters[left], clusters[left + 1], data);
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(left + 1));
    const double cost = ClusteringCost(trial, data.values, data.predictions);
    if (!best || cost < best_cost - tol) {
      best_cost = cost;
      best = std::move(trial);
    }
  }
  if (best) clusters = std::move(*best);
}

std::optional<std::size_t> FindSparse(const std::vector<Cluster>& clusters, double threshold) {
  std::size_t largest = 0;
  for (const auto& c : clusters) largest = std::max(largest, c.members.size());
  std::optional<std::size_t> pick;
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    if (!IsSparse(clusters[k], largest, threshold)) continue;
    if (!pick || clusters[k].members.size() < clusters[*pick].members.size()) pick = k;
  }
  return pick;
}

std::optional<std::size_t> FindLowCoverage(const std::vector<Cluster>& clusters,
                                           double feature_range, double threshold) {
  if (feature_range <= 0.0) return std::nullopt;
  std::optional<std::size_t> pick;
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    const double cov = Coverage(clusters[k], feature_range);
    if (!(cov < threshold)) continue;
    if (!pick || cov < Coverage(clusters[*pick], feature_range)) pick = k;
  }
  return pick;
}

}  // namespace

std::vector<std::size_t> InitMedoids(std::span<const double> values, std::size_t k) {
  const std::size_t n = values.size();
  if (k < 2 || k > n) {
    Fail(ErrorCode::kInvalidArgument, "initial medoid count must satisfy 2 <= K <= N (K=" +
                                          std::to_string(k) + ", N=" + std::to_string(n) + ")");
  }
  const auto order = SortedByValue(values);
  std::vector<std::size_t> medoids(k);
  for (std::size_t c = 0; c < k; ++c) medoids[c] = order[((2 * c + 1) * n) / (2 * k)];
  return medoids;
}

void Refit(Cluster& cluster, const FeatureData& data) {
  if (cluster.members.empty()) Fail(ErrorCode::kInternal, "empty cluster");
  cluster.line = FitLine(data.values, data.predictions, cluster.members);
  cluster.fitted = true;
  cluster.lo = INFINITY;
  cluster.hi = -INFINITY;
  for (std::size_t i : cluster.members) {
    cluster.lo = std::min(cluster.lo, data.values[i]);
    cluster.hi = std::max(cluster.hi, data.values[i]);
  }
}

std::size_t RecomputeMedoid(const Cluster& cluster, const DissimilarityMatrix& delta) {
  std::size_t best = cluster.members.front();
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t i : cluster.members) {
    double sum = 0.0;
    for (std::size_t j : cluster.members) sum += delta(i, j);
    if (sum < best_sum) {
      best_sum = sum;
      best = i;
    }
  }
  return best;
}

std::vector<Cluster> Assign(const FeatureData& data, std::span<const std::size_t> medoids) {
  const std::size_t n = data.values.size();
  if (medoids.empty()) Fail(ErrorCode::kInvalidArgument, "no medoids");
  std::vector<long> medoid_slot(n, -1);
  for (std::size_t k = 0; k < medoids.size(); ++k) {
    if (medoids[k] >= n) Fail(ErrorCode::kInvalidArgument, "medoid out of range");
    if (medoid_slot[medoids[k]] >= 0) {
      Fail(ErrorCode::kInvalidArgument, "duplicate medoid " + std::to_string(medoids[k]));
    }
    medoid_slot[medoids[k]] = static_cast<long>(k);
  }
  std::vector<Cluster> clusters(medoids.size());
  for (std::size_t k = 0; k < medoids.size(); ++k) clusters[k].medoid = medoids[k];
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    if (medoid_slot[i] >= 0) {
      best = static_cast<std::size_t>(medoid_slot[i]);
    } else {
      for (std::size_t k = 1; k < medoids.size(); ++k) {
        const double dk = data.delta(i, medoids[k]);
        const double db = data.delta(i, medoids[best]);
        if (dk < db) {
          best = k;
        } else if (dk == db) {
          const double vk = data.values[medoids[k]];
          const double vb = data.values[medoids[best]];
          if (vk < vb || (vk == vb && medoids[k] < medoids[best])) best = k;
        }
      }
    }
    clusters[best].members.push_back(i);
  }
  for (auto& c : clusters) Refit(c, data);
  return clusters;
}

double ClusteringCost(std::span<const Cluster> clusters, std::span<const double> values,
                      std::span<const double> predictions) {
  double j = 0.0;
  for (const auto& c : clusters) {
    if (!c.fitted) Fail(ErrorCode::kInvalidArgument, "cluster line has not been fitted");
    j += Rmse(c.line, values, predictions, c.members);
  }
  return j;
}

FeatureClustering OptimizeMedoids(const FeatureData& data, std::vector<Cluster> clusters) {
  FeatureClustering out;
  std::vector<std::size_t> medoids;
  for (const auto& c : clusters) medoids.push_back(c.medoid);
  double best = ClusteringCost(clusters, data.values, data.predictions);
  out.cost_history.push_back(best);
  const double tol = CostTolerance(data.predictions);

  // Each cluster in turn tries every member as its medoid and keeps the
  // cheapest trial; the first of equally cheap trials wins, the incumbent
  // wins ties.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k < clusters.size(); ++k) {
      std::optional<std::vector<std::size_t>> pick;
      std::vector<Cluster> pick_clusters;
      double pick_cost = best - tol;
      for (std::size_t x : clusters[k].members) {
        if (x == medoids[k]) continue;
        std::vector<std::size_t> trial_medoids = medoids;
        trial_medoids[k] = x;
        auto trial = Assign(data, trial_medoids);
        const double cost = ClusteringCost(trial, data.values, data.predictions);
        if (cost < pick_cost) {
          pick_cost = cost;
          pick = std::move(trial_medoids);
          pick_clusters = std::move(trial);
        }
      }
      if (pick) {
        best = pick_cost;
        medoids = std::move(*pick);
        clusters = std::move(pick_clusters);
        out.cost_history.push_back(best);
        changed = true;
      }
    }
  }
  out.clusters = std::move(clusters);
  out.cost = best;
  return out;
}

double SparsityThreshold(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) Fail(ErrorCode::kInvalidArgument, "sparsity threshold needs at least 2 points");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // sum_{i<j} (x_(j) - x_(i)) = sum_j x_(j) * (2j - n + 1), shifted by the
  // minimum so identical values give exactly 0.
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    sum += (sorted[j] - sorted[0]) * (2.0 * static_cast<double>(j) - static_cast<double>(n) + 1.0);
  }
  const double nn = static_cast<double>(n);
  return 2.0 * sum / (nn * nn);
}

bool IsSparse(const Cluster& cluster, std::size_t largest_size, double threshold) {
  return static_cast<double>(cluster.members.size()) / static_cast<double>(largest_size) <
         threshold;
}

double Coverage(const Cluster& cluster, double feature_range) {
  if (feature_range <= 0.0) return 1.0;
  return (cluster.hi - cluster.lo) / feature_range;
}

bool IntervalsDisjoint(std::span<const Cluster> clusters) {
  for (std::size_t a = 0; a < clusters.size(); ++a) {
    for (std::size_t b = a + 1; b < clusters.size(); ++b) {
      if (clusters[a].lo <= clusters[b].hi && clusters[b].lo <= clusters[a].hi) return false;
    }
  }
  return true;
}

bool ConstraintsHold(std::span<const Cluster> clusters, std::span<const double> values,
                     double threshold) {
  if (!IntervalsDisjoint(clusters)) return false;
  std::size_t largest = 0;
  for (const auto& c : clusters) largest = std::max(largest, c.members.size());
  const double range = FeatureRange(values);
  for (const auto& c : clusters) {
    if (IsSparse(c, largest, threshold)) return false;
    if (Coverage(c, range) < threshold) return false;
  }
  return true;
}

FeatureClustering EnforceConstraints(const FeatureData& data, FeatureClustering clustering,
                                     double threshold) {
  auto& clusters = clustering.clusters;
  for (auto& c : clusters) {
    if (!c.fitted) Refit(c, data);
  }
  while (ResolveContainment(clusters, data) || ResolveOverlap(clusters, data)) {
  }
  SortByInterval(clusters);

  const double range = FeatureRange(data.values);
  while (clusters.size() > 1) {
    if (auto k = FindSparse(clusters, threshold)) {
      MergeWithBestNeighbor(clusters, *k, data);
    } else if (auto k = FindLowCoverage(clusters, range, threshold)) {
      MergeWithBestNeighbor(clusters, *k, data);
    } else {
      break;
    }
  }
  clustering.cost = ClusteringCost(clusters, data.values, data.predictions);
  clustering.constraint_satisfied = ConstraintsHold(clusters, data.values, threshold);
  return clustering;
}

FeatureClustering AutoCluster(const FeatureData& data, std::size_t initial_k) {
  const std::size_t n = data.values.size();
  if (initial_k < 2) Fail(ErrorCode::kInvalidArgument, "initial K must be at least 2");
  if (data.delta.size() != n || data.predictions.size() != n) {
    Fail(ErrorCode::kInvalidArgument, "feature data lengths disagree");
  }
  const double threshold = SparsityThreshold(data.values);
  std::size_t k = std::min(initial_k, n);
  std::vector<std::size_t> sequence;
  for (std::size_t iter = 0; iter < kMaxOuterIterations; ++iter) {
    sequence.push_back(k);
    std::vector<std::size_t> medoids;
    if (k >= 2) {
      medoids = InitMedoids(data.values, k);
    } else {
      medoids = {SortedByValue(data.values)[n / 2]};
    }
    auto optimized = OptimizeMedoids(data, Assign(data, medoids));
    auto constrained = EnforceConstraints(data, std::move(optimized), threshold);
    if (constrained.k() == k) {
      constrained.k_sequence = std::move(sequence);
      return constrained;
    }
    k = constrained.k();
  }
  std::string seq;
  for (std::size_t s : sequence) seq += (seq.empty() ? "" : ",") + std::to_string(s);
  Fail(ErrorCode::kNotConverged,
       "cluster count did not settle within " + std::to_string(kMaxOuterIterations) +
           " iterations (K sequence " + seq + ")");
}

FeatureClustering ClusterFeature(std::span<const double> values,
                                 std::span<const double> predictions, const RunConfig& config,
                                 std::size_t feature_index) {
  const auto profiles = BuildProfiles(values, predictions, config.neighborhood_threshold);
  const auto delta = PairwiseDissimilarity(profiles, values);
  FeatureData data{values, predictions, delta};
  auto fc = AutoCluster(data, config.initial_k);
  fc.feature_index = feature_index;
  return fc;
}

ClusteringModel ClusterAll(const Dataset& normalized, const RunConfig& config) {
  if (!normalized.normalized) Fail(ErrorCode::kInvalidArgument, "dataset must be normalized");
  config.Validate();
  const auto& preds = normalized.RequirePredictions();
  ClusteringModel model;
  model.feature_names = normalized.feature_names;
  model.transforms = normalized.transforms;
  model.prediction_column = normalized.prediction_column;
  model.fingerprint = normalized.fingerprint;
  model.config = config;
  for (std::size_t m = 0; m < normalized.cols(); ++m) {
    try {
      model.per_feature.push_back(ClusterFeature(normalized.column(m), preds, config, m));
    } catch (const Error& e) {
      throw Error(e.code(), "feature '" + normalized.feature_names[m] + "': " + e.what());
    }
  }
  return model;
}

}  // namespace masala
