// Copyright 2026 The HaloScope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "haloscope/matrix.hpp"

namespace haloscope {

inline constexpr int kSignConventionVersion = 1;

// Top-k right singular structure of the centered unlabeled embedding matrix.
// directions is d x k with orthonormal columns; singular_values is
// non-increasing. When weighted is false every singular value is treated as 1
// by the scoring functions.
struct SubspaceModel {
  Vector mean;
  Matrix directions;
  Vector singular_values;
  std::size_t k = 0;
  bool weighted = true;
  int sign_convention_version = kSignConventionVersion;

  std::size_t dim() const noexcept { return mean.size(); }

  // Keeps the leading k directions. Directions are nested, so a fit at k_max
  // truncated to k equals a fit at k.
  SubspaceModel truncated(std::size_t new_k) const;
  SubspaceModel with_weighting(bool use_weights) const;
};

// Centers on the column mean and takes the top-k right singular vectors.
// The singular vectors come from a Jacobi eigendecomposition of the smaller
// of the two Gram matrices. Each direction is sign-normalized so its largest
// magnitude component is positive (first index wins ties).
//
// Throws kOutOfRange when k is outside [1, min(N, d)] or N < 2, and
// kRankDeficient when the centered data has fewer than k non-zero singular
// values.
SubspaceModel fit_subspace(const Matrix& embeddings, std::size_t k, bool weighted = true);

// zeta = (1/k) * sum_j w_j * <f - mean, v_j>^2 with w_j = sigma_j (weighted)
// or 1.
double membership_score(const SubspaceModel& model, std::span<const double> f);

// Row-wise membership_score. Each row goes through the same code path as the
// scalar call, so results are bit-identical for any thread count.
Vector score_batch(const SubspaceModel& model, const Matrix& embeddings,
                   std::size_t threads = 1);

// <f - mean, v_1>^2, the unweighted single-direction score.
double single_direction_score(const SubspaceModel& model, std::span<const double> f);

double layerwise_sum_score(std::span<const SubspaceModel> models,
                           std::span<const std::vector<double>> per_layer_f);
Vector layerwise_sum_batch(std::span<const SubspaceModel> models,
                           std::span<const Matrix> per_layer_embeddings);

struct MembershipPartition {
  Vector scores;
  double threshold = 0.0;
  std::vector<std::size_t> hallucinated_idx;  // score > threshold
  std::vector<std::size_t> truthful_idx;      // score <= threshold
};

MembershipPartition split_unlabeled(std::span<const double> scores, double threshold);

// Linear-interpolated percentile, p in [0, 100].
double percentile(std::span<const double> values, double p);

std::vector<double> default_threshold_percentiles();

struct ThresholdCandidate {
  double percentile = 0.0;
  double threshold = 0.0;
  double value = 0.0;
  bool feasible = false;
};

struct ThresholdSelection {
  double threshold = 0.0;
  double percentile = 0.0;
  double value = 0.0;
  std::vector<ThresholdCandidate> candidates;
};

// Validation objective for one candidate partition (higher is better).
using ThresholdObjective = std::function<double(const MembershipPartition&)>;

// Evaluates every percentile candidate whose partition has both sides
// non-empty and returns the best one; equal values resolve to the larger
// percentile. Throws kNoFeasibleThreshold if no candidate is feasible.
ThresholdSelection select_threshold(std::span<const double> scores,
                                    std::span<const double> candidate_percentiles,
                                    const ThresholdObjective& objective);

// Writes <prefix>.json plus <prefix>.mean.hse, <prefix>.directions.hse and
// <prefix>.sigma.hse.
void save_subspace(const SubspaceModel& model, const std::filesystem::path& prefix);
SubspaceModel load_subspace(const std::filesystem::path& prefix);

}  // namespace haloscope
