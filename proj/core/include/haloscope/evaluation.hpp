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

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "haloscope/matrix.hpp"

namespace haloscope {

enum class LabelSource { kExternalSimilarity, kRougeL, kPlanted };
std::string_view to_string(LabelSource source);

inline constexpr double kDefaultSimilarityThreshold = 0.5;

// Per-sample ground truth, 1 = truthful, 0 = hallucinated.
struct EvalLabels {
  std::vector<int> labels;
  LabelSource source = LabelSource::kExternalSimilarity;
  double threshold = kDefaultSimilarityThreshold;
};

// Lowercases ASCII letters, splits on Unicode whitespace (UTF-8 input) and
// removes ASCII punctuation; tokens left empty are dropped.
std::vector<std::string> tokenize(std::string_view text);

// ROUGE-L F1 over token sequences. Returns 0 (and warns) if either side is
// empty.
double rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference);
double rouge_l(std::string_view candidate, std::string_view reference);

// label_i = 1 iff max_r similarity[i][r] > threshold. Every row needs at
// least one reference.
EvalLabels label_from_similarity(std::span<const std::vector<double>> similarities,
                                 double threshold = kDefaultSimilarityThreshold,
                                 LabelSource source = LabelSource::kExternalSimilarity);
// Rows of an N x R matrix are the per-reference similarities.
EvalLabels label_from_similarity(const Matrix& similarities,
                                 double threshold = kDefaultSimilarityThreshold,
                                 LabelSource source = LabelSource::kExternalSimilarity);

// Mann-Whitney AUROC with average ranks for ties: the fraction of
// (positive, negative) pairs ranked correctly, ties counting one half.
// Positives are label 1. Throws kSingleClassLabels when a class is missing.
double auroc(std::span<const double> scores, std::span<const int> labels);
double auroc(std::span<const double> scores, const EvalLabels& labels);

struct ScoreSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double p05 = 0.0;
  double p25 = 0.0;
  double p50 = 0.0;
  double p75 = 0.0;
  double p95 = 0.0;
};

ScoreSummary summarize(std::span<const double> values);

struct DetectorReport {
  double auroc = 0.0;
  // Threshold on the score maximizing accuracy of 1{score >= lambda}.
  double best_lambda = 0.0;
  double best_accuracy = 0.0;
  ScoreSummary truthful;
  ScoreSummary hallucinated;
};

DetectorReport evaluate_detector(std::span<const double> scores, std::span<const int> labels);

// Fraction of predictions 1{score >= lambda} that match labels.
double accuracy_at(std::span<const double> scores, std::span<const int> labels, double lambda);

std::string report_to_json(const DetectorReport& report, const EvalLabels* labels = nullptr);
void write_score_csv(std::span<const double> scores, std::span<const int> labels,
                     const std::filesystem::path& path);

}  // namespace haloscope
