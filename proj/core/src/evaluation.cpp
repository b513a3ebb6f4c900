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

#include "haloscope/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>

#include "haloscope/error.hpp"
#include "haloscope/subspace.hpp"
#include "json.hpp"

namespace haloscope {
namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::kShapeMismatch, std::to_string(scores.size()) + " scores for " +
                                               std::to_string(labels.size()) + " labels");
  }
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorKind::kInvalidArgument, "labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  if (pos == 0 || pos == labels.size()) {
    throw Error(ErrorKind::kSingleClassLabels, "AUROC needs at least one label of each class");
  }
}

nlohmann::json summary_json(const ScoreSummary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"std", s.stddev}, {"p05", s.p05},
          {"p25", s.p25},     {"p50", s.p50},   {"p75", s.p75},    {"p95", s.p95}};
}

}  // namespace

std::string_view to_string(LabelSource source) {
  switch (source) {
    case LabelSource::kExternalSimilarity: return "external_similarity";
    case LabelSource::kRougeL: return "rouge_l";
    case LabelSource::kPlanted: return "planted";
  }
  return "unknown";
}

EvalLabels label_from_similarity(std::span<const std::vector<double>> similarities,
                                 double threshold, LabelSource source) {
  EvalLabels out{{}, source, threshold};
  out.labels.reserve(similarities.size());
  for (std::size_t i = 0; i < similarities.size(); ++i) {
    const auto& row = similarities[i];
    if (row.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "sample " + std::to_string(i) + " has no reference similarity");
    }
    // Strict: a generation is truthful only when similarity exceeds the threshold.
    out.labels.push_back(*std::max_element(row.begin(), row.end()) > threshold ? 1 : 0);
  }
  return out;
}

EvalLabels label_from_similarity(const Matrix& similarities, double threshold, LabelSource source) {
  std::vector<std::vector<double>> rows(similarities.rows());
  for (std::size_t r = 0; r < similarities.rows(); ++r) {
    auto row = similarities.row(r);
    rows[r].assign(row.begin(), row.end());
  }
  return label_from_similarity(rows, threshold, source);
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Doubled ranks keep the tie average integral: a tie block spanning
  // 1-based ranks [i+1, j] gets 2 * avg = i + 1 + j.
  std::uint64_t pos_rank_sum2 = 0;
  std::uint64_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::uint64_t rank2 = i + 1 + j;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) {
        pos_rank_sum2 += rank2;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::uint64_t n_neg = n - n_pos;
  const std::uint64_t u2 = pos_rank_sum2 - n_pos * (n_pos + 1);
  return static_cast<double>(u2) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double auroc(std::span<const double> scores, const EvalLabels& labels) {
  return auroc(scores, std::span<const int>(labels.labels));
}

ScoreSummary summarize(std::span<const double> values) {
  ScoreSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  s.p05 = percentile(values, 5);
  s.p25 = percentile(values, 25);
  s.p50 = percentile(values, 50);
  s.p75 = percentile(values, 75);
  s.p95 = percentile(values, 95);
  return s;
}

double accuracy_at(std::span<const double> scores, std::span<const int> labels, double lambda) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw Error(ErrorKind::kShapeMismatch, "accuracy_at needs equal, non-empty inputs");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    correct += ((scores[i] >= lambda ? 1 : 0) == labels[i]) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

DetectorReport evaluate_detector(std::span<const double> scores, std::span<const int> labels) {
  DetectorReport report;
  report.auroc = auroc(scores, labels);

  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(scores[i]);
  report.truthful = summarize(pos);
  report.hallucinated = summarize(neg);

  // Sweep lambda over the sorted distinct scores. Predicting 1 for every
  // score >= lambda, accuracy = (positives at or above + negatives below) / n.
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::size_t pos_above = pos.size();
  std::size_t neg_below = 0;
  double best_acc = -1.0;
  double best_lambda = scores[order.front()];
  for (std::size_t i = 0; i < n;) {
    const double lambda = scores[order[i]];
    const double acc = static_cast<double>(pos_above + neg_below) / static_cast<double>(n);
    if (acc > best_acc) {
      best_acc = acc;
      best_lambda = lambda;
    }
    std::size_t j = i;
    while (j < n && scores[order[j]] == lambda) {
      if (labels[order[j]] == 1) {
        --pos_above;
      } else {
        ++neg_below;
      }
      ++j;
    }
    i = j;
  }
  // Above the maximum score everything is predicted 0.
  const double all_zero = static_cast<double>(neg.size()) / static_cast<double>(n);
  if (all_zero > best_acc) {
    best_acc = all_zero;
    best_lambda = std::nextafter(scores[order.back()], INFINITY);
  }
  report.best_lambda = best_lambda;
  report.best_accuracy = best_acc;
  return report;
}

std::string report_to_json(const DetectorReport& report, const EvalLabels* labels) {
  nlohmann::json j = {
      {"auroc", report.auroc},
      {"best_lambda", report.best_lambda},
      {"best_lambda_accuracy", report.best_accuracy},
      {"score_distribution",
       {{"truthful", summary_json(report.truthful)},
        {"hallucinated", summary_json(report.hallucinated)}}},
  };
  if (labels) {
    j["labels"] = {{"source", to_string(labels->source)},
                   {"similarity_threshold", labels->threshold},
                   {"comparison", "strict_greater"}};
  }
  return j.dump(2);
}

void write_score_csv(std::span<const double> scores, std::span<const int> labels,
                     const std::filesystem::path& path) {
  if (!labels.empty() && labels.size() != scores.size()) {
    throw Error(ErrorKind::kShapeMismatch, "scores and labels differ in length");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.precision(17);
  out << (labels.empty() ? "score\n" : "score,label\n");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out << scores[i];
    if (!labels.empty()) out << ',' << labels[i];
    out << '\n';
  }
}

}  // namespace haloscope
