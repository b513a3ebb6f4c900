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
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "haloscope/matrix.hpp"
#include "haloscope/subspace.hpp"

namespace haloscope {

// Huber-contamination embedding mixture: a fraction pi of rows is
// hallucinated and displaced away from the common center inside a planted
// low-rank subspace; every row gets isotropic Gaussian noise.
struct MixtureConfig {
  std::size_t n_samples = 2000;
  std::size_t dim = 64;
  double pi = 0.25;
  std::size_t planted_rank = 2;
  double signal = 4.0;
  double noise_std = 1.0;
  std::uint64_t seed = 0;
  // Optional per-direction multipliers on the displacement (size
  // planted_rank). Empty means isotropic within the planted subspace.
  std::vector<double> direction_scales;
};

void validate(const MixtureConfig& cfg);

struct PlantedMixture {
  Matrix embeddings;
  std::vector<int> labels;  // 1 truthful, 0 hallucinated
  Matrix planted_directions;  // dim x planted_rank, orthonormal columns
  Vector center;              // common center of every row before noise
};

PlantedMixture generate_mixture(const MixtureConfig& cfg);
// Reuses the given planted directions (dim x planted_rank) instead of drawing
// new ones, so several mixtures can share one hallucination subspace.
PlantedMixture generate_mixture(const MixtureConfig& cfg, const Matrix& planted_directions);
// Also reuses the common center, so two mixtures differ only in their noise
// and in which rows are hallucinated.
PlantedMixture generate_mixture(const MixtureConfig& cfg, const Matrix& planted_directions,
                                const Vector& center);

Matrix random_orthonormal(std::size_t dim, std::size_t rank, std::uint64_t seed);

struct TopKEigen {
  Matrix directions;           // d x k
  Vector eigenvalues;          // of the centered Gram matrix X^T X
  Vector singular_values;      // sqrt of eigenvalues
};

// Reference implementation for the subspace fit: power iteration with
// deflation on the centered Gram matrix (up to 10^4 iterations per
// component, stopping when the iterate moves less than 1e-12). Shares no code
// with fit_subspace beyond the Matrix type.
TopKEigen brute_force_top_k(const Matrix& embeddings, std::size_t k);

// ||V_a V_a^T - V_b V_b^T||_F for column-orthonormal V_a, V_b.
double subspace_recovery_error(const Matrix& fitted, const Matrix& planted);
double subspace_recovery_error(const SubspaceModel& fitted, const Matrix& planted);

struct LabeledSplit {
  Matrix embeddings;
  std::vector<int> labels;
};

struct MixtureSplits {
  LabeledSplit unlabeled;
  LabeledSplit validation;
  LabeledSplit test;
};

// Shuffled split; the test split takes whatever the first two leave.
MixtureSplits split_mixture(const PlantedMixture& mixture, double unlabeled_fraction,
                            double validation_fraction, std::uint64_t seed);

// Writes <dir>/<name>.json (manifest), <name>.hse (embeddings),
// <name>.generations.jsonl and <name>.similarity.hse (planted labels as a
// one-column similarity of 1.0 or 0.0). Returns the manifest path.
std::filesystem::path write_labeled_split(const LabeledSplit& split,
                                          const std::filesystem::path& dir,
                                          const std::string& name, int layer_index = 0);

inline constexpr const char* kPlantedModelName = "planted-mixture";

}  // namespace haloscope
