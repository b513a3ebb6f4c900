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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "haloscope/classifier.hpp"
#include "haloscope/evaluation.hpp"
#include "haloscope/manifest.hpp"
#include "haloscope/matrix.hpp"
#include "haloscope/subspace.hpp"

namespace haloscope {

// Embeddings of one data split, one matrix per layer (all for the same MHA
// location), plus ground truth when the split carries it.
struct SplitData {
  std::map<int, Matrix> layers;
  std::optional<EvalLabels> labels;

  std::size_t rows() const;
  // Same rows in every layer, in the given order.
  SplitData select_rows(std::span<const std::size_t> indices) const;
};

// A split that the pipeline reads on demand. load_count() is incremented on
// every load so callers can audit which splits a run touched.
class DataSource {
 public:
  virtual ~DataSource() = default;
  SplitData load() const;
  std::size_t load_count() const noexcept { return loads_.load(); }

 protected:
  virtual SplitData do_load() const = 0;

 private:
  mutable std::atomic<std::size_t> loads_{0};
};

class InMemorySource final : public DataSource {
 public:
  explicit InMemorySource(SplitData data) : data_(std::move(data)) {}
  // Single-layer convenience; labels may be empty.
  InMemorySource(Matrix embeddings, std::vector<int> labels, int layer = 0);

 protected:
  SplitData do_load() const override { return data_; }

 private:
  SplitData data_;
};

// Reads every manifest whose mha_location matches and whose layer is in
// layer_grid (empty grid = any layer). Labels come from, in order of
// preference: the similarity_file, per-record similarity in the generation
// file, or ROUGE-L of the generation against its references.
class ManifestSource final : public DataSource {
 public:
  ManifestSource(std::vector<std::filesystem::path> manifests, MhaLocation location,
                 std::vector<int> layer_grid = {},
                 double similarity_threshold = kDefaultSimilarityThreshold);

 protected:
  SplitData do_load() const override;

 private:
  std::vector<std::filesystem::path> manifests_;
  MhaLocation location_;
  std::vector<int> layer_grid_;
  double similarity_threshold_;
};

// Labels for one manifest, or nullopt when it carries no ground truth.
std::optional<EvalLabels> load_labels(const EmbeddingManifest& manifest, double threshold);

enum class RunMode { kHaloscope, kDirectProjection, kSupervisedOracle, kNonWeighted, kLayerSum };
std::string_view to_string(RunMode mode);
RunMode parse_run_mode(std::string_view s);

struct RunConfig {
  std::vector<std::filesystem::path> unlabeled_manifests;
  std::vector<std::filesystem::path> validation_manifests;
  std::vector<std::filesystem::path> test_manifests;
  std::vector<std::size_t> k_grid = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<int> layer_grid;
  MhaLocation mha_location = MhaLocation::kBlockOutput;
  bool weighted = true;
  std::vector<double> threshold_percentiles = default_threshold_percentiles();
  TrainConfig train;
  RunMode mode = RunMode::kHaloscope;
  std::uint64_t seed = 0;
  double similarity_threshold = kDefaultSimilarityThreshold;
  // When set, the chosen SubspaceModel and classifier are written here
  // before the test split is read.
  std::filesystem::path output_dir;
  // Grid cells evaluated concurrently; results do not depend on this.
  std::size_t threads = 1;
};

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(std::string_view json_text,
                               const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
// Hash of every field that influences results (excludes output_dir and
// threads).
std::string run_config_hash(const RunConfig& cfg);

struct GridCell {
  int layer = 0;
  std::size_t k = 0;
  double threshold = 0.0;
  double threshold_percentile = 0.0;
  double validation_auroc = 0.0;
  std::size_t hallucinated_count = 0;
  std::size_t truthful_count = 0;
};

struct RunReport {
  RunMode mode = RunMode::kHaloscope;
  int layer = 0;
  std::size_t k = 0;
  double threshold = 0.0;
  double threshold_percentile = 0.0;
  double lambda = 0.5;
  double validation_auroc = 0.0;
  double test_auroc = 0.0;
  double test_accuracy = 0.0;
  std::size_t hallucinated_count = 0;
  std::size_t truthful_count = 0;
  std::size_t unlabeled_count = 0;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<GridCell> grid;
  DetectorReport test_report;
  std::map<std::string, double> timings_ms;
};

// "metrics" holds every deterministic field; "timings_ms" is kept apart.
std::string report_to_json(const RunReport& report);
std::string report_metrics_json(const RunReport& report);

struct RunInputs {
  const DataSource* unlabeled = nullptr;
  const DataSource* validation = nullptr;
  const DataSource* test = nullptr;
  // Data the subspace is fitted on; defaults to unlabeled.
  const DataSource* subspace_source = nullptr;
};

// Joint grid search over (layer, k, T) driven by validation AUROC, then one
// read of the test split for the final evaluation. Dispatches on cfg.mode.
RunReport run_haloscope(const RunConfig& cfg, const RunInputs& inputs);
RunReport run_direct_projection(const RunConfig& cfg, const RunInputs& inputs);
// Subspace from the source unlabeled split; partition, classifier and
// evaluation on the target.
RunReport run_transfer(const RunConfig& cfg, const DataSource& source_unlabeled,
                       const RunInputs& target);

// File-based front end: builds ManifestSources from cfg.
RunReport run_from_manifests(const RunConfig& cfg);

struct AblationPlan {
  bool k_sweep = true;
  bool layer_sweep = true;
  bool score_variants = true;  // weighted, non-weighted, layer-sum
  bool direct_projection = true;
  bool supervised_oracle = true;  // skipped when the unlabeled split has no labels
  std::vector<std::size_t> unlabeled_sizes;  // empty: no size sweep
  std::vector<MhaLocation> locations;        // file-based runs only
};

struct AblationRow {
  std::string ablation;
  std::string setting;
  RunReport report;
};

std::vector<AblationRow> run_ablation_suite(const RunConfig& cfg, const AblationPlan& plan,
                                            const SplitData& unlabeled, const SplitData& validation,
                                            const SplitData& test);
std::vector<AblationRow> run_ablation_suite(const RunConfig& cfg, const AblationPlan& plan);
void write_ablation_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& path);

}  // namespace haloscope
