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
#include <span>
#include <string>
#include <vector>

#include "haloscope/matrix.hpp"
#include "haloscope/subspace.hpp"

namespace haloscope {

// Two-layer ReLU network g(f) = w2 . relu(w1 f + b1) + b2.
struct MlpParams {
  Matrix w1;  // hidden x d
  Vector b1;  // hidden
  Matrix w2;  // 1 x hidden
  double b2 = 0.0;

  std::size_t dim() const noexcept { return w1.cols(); }
  std::size_t hidden() const noexcept { return w1.rows(); }

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

std::size_t param_count(const MlpParams& params);
// Order: w1 (row-major), b1, w2, b2.
std::vector<double> flatten(const MlpParams& params);
MlpParams unflatten(std::span<const double> flat, std::size_t d, std::size_t hidden);

struct TrainConfig {
  std::size_t hidden = 1024;
  std::size_t epochs = 50;
  double lr0 = 0.05;
  std::size_t batch_size = 512;
  double weight_decay = 3e-4;
  std::uint64_t seed = 0;
  // Scale each class's loss by N / (2 * class_count). Off by default.
  bool reweight_classes = false;
};

void validate(const TrainConfig& cfg);
std::string config_hash(const TrainConfig& cfg);

// Learning rate at step t of total_steps: lr0 * 0.5 * (1 + cos(pi t / S)).
double cosine_lr(double lr0, std::size_t step, std::size_t total_steps);

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
MlpParams init_params(std::size_t d, std::size_t hidden, std::uint64_t seed);

double forward(const MlpParams& params, std::span<const double> f);
Vector forward_batch(const MlpParams& params, const Matrix& embeddings);

struct LossAndGradient {
  double loss = 0.0;  // weighted mean BCE + 0.5 * weight_decay * ||theta||^2
  MlpParams gradient;
};

// Full objective and its analytic gradient. labels are 1 (truthful) or 0;
// sample_weights may be empty (all ones).
LossAndGradient loss_and_gradient(const MlpParams& params, const Matrix& embeddings,
                                  std::span<const int> labels,
                                  std::span<const double> sample_weights, double weight_decay);

struct TrainResult {
  MlpParams params;
  std::vector<double> epoch_losses;  // mean BCE over each epoch's batches
};

// Minibatch SGD on binary cross-entropy with a logistic link, coupled L2
// weight decay and cosine learning-rate decay to zero. The last partial
// batch is kept. Throws kEmptyClass if either label is absent and
// kTrainingDiverged on a non-finite loss.
TrainResult train_supervised(const Matrix& embeddings, std::span<const int> labels,
                             const TrainConfig& cfg);

// Candidate hallucinated rows are labeled 0, candidate truthful rows 1.
// embeddings must be the matrix the partition was computed on.
TrainResult train(const Matrix& embeddings, const MembershipPartition& partition,
                  const TrainConfig& cfg);

std::vector<int> partition_labels(const MembershipPartition& partition);

// S = e^g / (1 + e^g), evaluated without overflow and clamped to the open
// interval (0, 1).
double logistic(double g);
double truthfulness_score(const MlpParams& params, std::span<const double> f);
Vector truthfulness_scores(const MlpParams& params, const Matrix& embeddings);

struct DetectorConfig {
  double lambda = 0.5;
};

// 1 (truthful) iff S >= lambda.
int detect(const MlpParams& params, std::span<const double> f, const DetectorConfig& cfg);

struct ClassifierMetadata {
  std::uint64_t seed = 0;
  std::string config_hash;
};

// Writes <prefix>.json plus one HSE1 tensor per parameter block.
void save_classifier(const MlpParams& params, const ClassifierMetadata& meta,
                     const std::filesystem::path& prefix);
MlpParams load_classifier(const std::filesystem::path& prefix, ClassifierMetadata* meta = nullptr);

}  // namespace haloscope
