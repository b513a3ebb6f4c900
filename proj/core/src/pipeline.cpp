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

#include "haloscope/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <set>
#include <fstream>
#include <sstream>
#include <thread>

#include "haloscope/error.hpp"
#include "haloscope/rng.hpp"
#include "haloscope/tensor_io.hpp"
#include "json.hpp"

namespace haloscope {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<int> usable_layers(const SplitData& a, const SplitData& b, const SplitData& c,
                               const std::vector<int>& grid) {
  std::vector<int> out;
  for (const auto& [layer, _] : a.layers) {
    if (!b.layers.contains(layer) || !c.layers.contains(layer)) continue;
    if (!grid.empty() && std::find(grid.begin(), grid.end(), layer) == grid.end()) continue;
    out.push_back(layer);
  }
  return out;
}

// Fits at k_max, shrinking to the achievable rank if the data is deficient.
SubspaceModel fit_nested(const Matrix& x, std::size_t k_max, bool weighted) {
  k_max = std::min({k_max, x.rows(), x.cols()});
  for (;;) {
    try {
      return fit_subspace(x, k_max, weighted);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kRankDeficient || k_max == 1) throw;
      --k_max;
    }
  }
}

template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<std::size_t> sorted_k_grid(const std::vector<std::size_t>& grid) {
  std::vector<std::size_t> ks(grid.begin(), grid.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.empty() || ks.front() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "k_grid must be non-empty with entries >= 1");
  }
  return ks;
}

const EvalLabels& require_labels(const SplitData& split, const char* name) {
  if (!split.labels) {
    throw Error(ErrorKind::kMissingLabels, std::string(name) + " split has no labels");
  }
  return *split.labels;
}

Vector negated(Vector v) {
  for (double& x : v) x = -x;
  return v;
}

struct CellOutcome {
  GridCell cell;
  MlpParams params;
  bool has_classifier = false;
};

template <typename T>
std::vector<T> json_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

std::vector<fs::path> path_list(const json& j, const fs::path& base) {
  std::vector<fs::path> out;
  for (const auto& s : json_list<std::string>(j)) {
    fs::path p(s);
    out.push_back(p.is_absolute() || base.empty() ? p : base / p);
  }
  return out;
}

json path_json(const std::vector<fs::path>& paths) {
  json out = json::array();
  for (const auto& p : paths) out.push_back(p.generic_string());
  return out;
}

json train_json(const TrainConfig& t) {
  return {{"hidden", t.hidden},       {"epochs", t.epochs},
          {"lr0", t.lr0},             {"batch_size", t.batch_size},
          {"weight_decay", t.weight_decay}, {"reweight_classes", t.reweight_classes},
          {"optimizer", "sgd"},       {"schedule", "cosine"}};
}

json config_json(const RunConfig& cfg, bool include_runtime) {
  json locs = to_string(cfg.mha_location);
  json j = {
      {"unlabeled", path_json(cfg.unlabeled_manifests)},
      {"validation", path_json(cfg.validation_manifests)},
      {"test", path_json(cfg.test_manifests)},
      {"k_grid", cfg.k_grid},
      {"layer_grid", cfg.layer_grid},
      {"mha_location", locs},
      {"weighted", cfg.weighted},
      {"threshold_percentiles", cfg.threshold_percentiles},
      {"train", train_json(cfg.train)},
      {"mode", to_string(cfg.mode)},
      {"seed", cfg.seed},
      {"similarity_threshold", cfg.similarity_threshold},
  };
  if (include_runtime) {
    j["output_dir"] = cfg.output_dir.generic_string();
    j["threads"] = cfg.threads;
  }
  return j;
}

json cell_json(const GridCell& c) {
  return {{"layer", c.layer},
          {"k", c.k},
          {"threshold", c.threshold},
          {"threshold_percentile", c.threshold_percentile},
          {"validation_auroc", c.validation_auroc},
          {"hallucinated_count", c.hallucinated_count},
          {"truthful_count", c.truthful_count}};
}

json summary_json(const ScoreSummary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"std", s.stddev}, {"p05", s.p05},
          {"p25", s.p25},     {"p50", s.p50},   {"p75", s.p75},    {"p95", s.p95}};
}

json metrics_json(const RunReport& r) {
  json grid = json::array();
  for (const auto& c : r.grid) grid.push_back(cell_json(c));
  return {
      {"mode", to_string(r.mode)},
      {"layer", r.layer},
      {"k", r.k},
      {"threshold", r.threshold},
      {"threshold_percentile", r.threshold_percentile},
      {"lambda", r.lambda},
      {"validation_auroc", r.validation_auroc},
      {"test_auroc", r.test_auroc},
      {"test_accuracy", r.test_accuracy},
      {"hallucinated_count", r.hallucinated_count},
      {"truthful_count", r.truthful_count},
      {"unlabeled_count", r.unlabeled_count},
      {"config_hash", r.config_hash},
      {"seed", r.seed},
      {"selection", "joint_grid_over_layer_k_threshold"},
      {"test_score_distribution",
       {{"truthful", summary_json(r.test_report.truthful)},
        {"hallucinated", summary_json(r.test_report.hallucinated)}}},
      {"grid", grid},
  };
}

}  // namespace

// ---------------------------------------------------------------------------
// Data sources

std::size_t SplitData::rows() const {
  return layers.empty() ? 0 : layers.begin()->second.rows();
}

SplitData SplitData::select_rows(std::span<const std::size_t> indices) const {
  SplitData out;
  for (const auto& [layer, m] : layers) out.layers.emplace(layer, m.select_rows(indices));
  if (labels) {
    EvalLabels l = *labels;
    l.labels.clear();
    for (std::size_t i : indices) l.labels.push_back(labels->labels.at(i));
    out.labels = std::move(l);
  }
  return out;
}

SplitData DataSource::load() const {
  ++loads_;
  return do_load();
}

InMemorySource::InMemorySource(Matrix embeddings, std::vector<int> labels, int layer) {
  if (!labels.empty()) {
    if (labels.size() != embeddings.rows()) {
      throw Error(ErrorKind::kRowCountMismatch, "labels and embeddings differ in row count");
    }
    data_.labels = EvalLabels{std::move(labels), LabelSource::kPlanted, kDefaultSimilarityThreshold};
  }
  data_.layers.emplace(layer, std::move(embeddings));
}

ManifestSource::ManifestSource(std::vector<fs::path> manifests, MhaLocation location,
                               std::vector<int> layer_grid, double similarity_threshold)
    : manifests_(std::move(manifests)),
      location_(location),
      layer_grid_(std::move(layer_grid)),
      similarity_threshold_(similarity_threshold) {}

SplitData ManifestSource::do_load() const {
  SplitData out;
  std::optional<std::uint64_t> rows;
  for (const auto& path : manifests_) {
    const EmbeddingManifest m = load_manifest(path);
    if (m.mha_location != location_) continue;
    if (!layer_grid_.empty() &&
        std::find(layer_grid_.begin(), layer_grid_.end(), m.layer_index) == layer_grid_.end()) {
      continue;
    }
    if (rows && *rows != m.record_count) {
      throw Error(ErrorKind::kRowCountMismatch,
                  path.string() + " disagrees with other layers of the same split on record_count");
    }
    rows = m.record_count;
    if (out.layers.contains(m.layer_index)) {
      throw Error(ErrorKind::kInvalidArgument, "layer " + std::to_string(m.layer_index) +
                                                   " appears twice for location " +
                                                   std::string(to_string(location_)));
    }
    out.layers.emplace(m.layer_index, read_matrix(embedding_tensor_path(path)));
    if (!out.labels) out.labels = load_labels(m, similarity_threshold_);
  }
  if (out.layers.empty()) {
    throw Error(ErrorKind::kInvalidArgument,
                "no manifest matches location " + std::string(to_string(location_)) +
                    " and the layer grid");
  }
  return out;
}

std::optional<EvalLabels> load_labels(const EmbeddingManifest& m, double threshold) {
  if (m.similarity_file) {
    const LabelSource source =
        m.model_name == "planted-mixture" ? LabelSource::kPlanted : LabelSource::kExternalSimilarity;
    return label_from_similarity(read_matrix(*m.similarity_file), threshold, source);
  }
  const auto records = read_generations(m.generation_file);
  if (std::all_of(records.begin(), records.end(), [](const auto& r) { return r.similarity.has_value(); })) {
    std::vector<std::vector<double>> sims;
    for (const auto& r : records) sims.push_back({*r.similarity});
    return label_from_similarity(sims, threshold, LabelSource::kExternalSimilarity);
  }
  std::vector<std::vector<std::string>> refs;
  if (m.reference_file) {
    refs = read_references(*m.reference_file);
  } else {
    for (const auto& r : records) refs.push_back(r.references);
  }
  if (refs.size() != records.size() ||
      std::any_of(refs.begin(), refs.end(), [](const auto& r) { return r.empty(); })) {
    return std::nullopt;
  }
  std::vector<std::vector<double>> sims(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& ref : refs[i]) sims[i].push_back(rouge_l(records[i].generation, ref));
  }
  return label_from_similarity(sims, threshold, LabelSource::kRougeL);
}

// ---------------------------------------------------------------------------
// Configuration

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kHaloscope: return "haloscope";
    case RunMode::kDirectProjection: return "direct_projection";
    case RunMode::kSupervisedOracle: return "supervised_oracle";
    case RunMode::kNonWeighted: return "nonweighted";
    case RunMode::kLayerSum: return "layer_sum";
  }
  return "unknown";
}

RunMode parse_run_mode(std::string_view s) {
  for (RunMode m : {RunMode::kHaloscope, RunMode::kDirectProjection, RunMode::kSupervisedOracle,
                    RunMode::kNonWeighted, RunMode::kLayerSum}) {
    if (to_string(m) == s) return m;
  }
  throw Error(ErrorKind::kUnknownEnumValue, "mode \"" + std::string(s) + "\"");
}

std::string run_config_to_json(const RunConfig& cfg) { return config_json(cfg, true).dump(2); }

RunConfig run_config_from_json(std::string_view text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("run config is not valid JSON: ") + e.what());
  }
  static const std::set<std::string> kKeys = {
      "unlabeled", "validation", "test", "k_grid", "layer_grid", "mha_location", "weighted",
      "threshold_percentiles", "mode", "seed", "similarity_threshold", "output_dir", "threads",
      "train"};
  static const std::set<std::string> kTrainKeys = {"hidden", "epochs", "lr0", "batch_size",
                                                   "weight_decay", "reweight_classes",
                                                   "optimizer", "schedule"};
  if (!j.is_object()) throw Error(ErrorKind::kInvalidArgument, "run config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kKeys.contains(key)) throw Error(ErrorKind::kInvalidArgument, "run config: unknown key \"" + key + "\"");
  }
  if (j.contains("train") && j["train"].is_object()) {
    for (const auto& [key, _] : j["train"].items()) {
      if (!kTrainKeys.contains(key)) {
        throw Error(ErrorKind::kInvalidArgument, "run config: unknown train key \"" + key + "\"");
      }
    }
  }
  RunConfig cfg;
  try {
    if (j.contains("unlabeled")) cfg.unlabeled_manifests = path_list(j["unlabeled"], base_dir);
    if (j.contains("validation")) cfg.validation_manifests = path_list(j["validation"], base_dir);
    if (j.contains("test")) cfg.test_manifests = path_list(j["test"], base_dir);
    if (j.contains("k_grid")) cfg.k_grid = json_list<std::size_t>(j["k_grid"]);
    if (j.contains("layer_grid")) cfg.layer_grid = json_list<int>(j["layer_grid"]);
    if (j.contains("mha_location")) cfg.mha_location = parse_mha_location(j["mha_location"].get<std::string>());
    if (j.contains("weighted")) cfg.weighted = j["weighted"].get<bool>();
    if (j.contains("threshold_percentiles")) {
      cfg.threshold_percentiles = json_list<double>(j["threshold_percentiles"]);
    }
    if (j.contains("mode")) cfg.mode = parse_run_mode(j["mode"].get<std::string>());
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("similarity_threshold")) cfg.similarity_threshold = j["similarity_threshold"].get<double>();
    if (j.contains("output_dir")) {
      fs::path p(j["output_dir"].get<std::string>());
      cfg.output_dir = p.is_absolute() || base_dir.empty() || p.empty() ? p : base_dir / p;
    }
    if (j.contains("threads")) cfg.threads = j["threads"].get<std::size_t>();
    if (j.contains("train")) {
      const json& t = j["train"];
      if (t.contains("hidden")) cfg.train.hidden = t["hidden"].get<std::size_t>();
      if (t.contains("epochs")) cfg.train.epochs = t["epochs"].get<std::size_t>();
      if (t.contains("lr0")) cfg.train.lr0 = t["lr0"].get<double>();
      if (t.contains("batch_size")) cfg.train.batch_size = t["batch_size"].get<std::size_t>();
      if (t.contains("weight_decay")) cfg.train.weight_decay = t["weight_decay"].get<double>();
      if (t.contains("reweight_classes")) cfg.train.reweight_classes = t["reweight_classes"].get<bool>();
      if (t.contains("optimizer") && t["optimizer"].get<std::string>() != "sgd") {
        throw Error(ErrorKind::kUnknownEnumValue, "optimizer must be \"sgd\"");
      }
      if (t.contains("schedule") && t["schedule"].get<std::string>() != "cosine") {
        throw Error(ErrorKind::kUnknownEnumValue, "schedule must be \"cosine\"");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("run config: ") + e.what());
  }
  validate(cfg.train);
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return run_config_from_json(ss.str(), path.parent_path());
}

std::string run_config_hash(const RunConfig& cfg) {
  std::ostringstream os;
  os << std::hex << fnv1a(config_json(cfg, false).dump());
  return os.str();
}

std::string report_metrics_json(const RunReport& report) { return metrics_json(report).dump(2); }

std::string report_to_json(const RunReport& report) {
  json j = {{"metrics", metrics_json(report)}, {"timings_ms", report.timings_ms}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Runs

RunReport run_haloscope(const RunConfig& cfg, const RunInputs& in) {
  if (!in.unlabeled || !in.validation || !in.test) {
    throw Error(ErrorKind::kInvalidArgument, "unlabeled, validation and test sources are required");
  }
  const RunMode mode = cfg.mode;
  const bool weighted = cfg.weighted && mode != RunMode::kNonWeighted;
  const auto ks = sorted_k_grid(cfg.k_grid);
  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = derive_seed(cfg.seed, "train");
  validate(train_cfg);

  RunReport report;
  report.mode = mode;
  report.seed = cfg.seed;
  report.config_hash = run_config_hash(cfg);

  auto t0 = Clock::now();
  const SplitData unlabeled = in.unlabeled->load();
  const SplitData validation = in.validation->load();
  const SplitData fit_data =
      in.subspace_source && in.subspace_source != in.unlabeled ? in.subspace_source->load() : unlabeled;
  const EvalLabels& val_labels = require_labels(validation, "validation");
  report.unlabeled_count = unlabeled.rows();
  report.timings_ms["load"] = ms_since(t0);

  const std::vector<int> layers = usable_layers(unlabeled, validation, fit_data, cfg.layer_grid);
  if (layers.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "no layer is present in every split and the layer grid");
  }

  // Subspaces per layer at the largest k; smaller k are nested truncations.
  t0 = Clock::now();
  std::map<int, SubspaceModel> subspaces;
  if (mode != RunMode::kSupervisedOracle) {
    for (int layer : layers) subspaces.emplace(layer, fit_nested(fit_data.layers.at(layer), ks.back(), weighted));
  }
  report.timings_ms["fit"] = ms_since(t0);

  std::vector<GridCell> cells;
  for (int layer : layers) {
    if (mode == RunMode::kSupervisedOracle) {
      cells.push_back({layer, 0});
      continue;
    }
    for (std::size_t k : ks) {
      if (k <= subspaces.at(layer).k) cells.push_back({layer, k});
    }
  }

  // Membership scores on the unlabeled split for layer-sum mode do not depend
  // on the classifier's layer, only on k.
  auto layer_sum_scores = [&](std::size_t k) {
    std::vector<SubspaceModel> models;
    std::vector<Matrix> mats;
    for (int l : layers) {
      models.push_back(subspaces.at(l).truncated(std::min(k, subspaces.at(l).k)));
      mats.push_back(unlabeled.layers.at(l));
    }
    return layerwise_sum_batch(models, mats);
  };

  t0 = Clock::now();
  std::vector<CellOutcome> outcomes(cells.size());
  parallel_for(cells.size(), cfg.threads, [&](std::size_t i) {
    CellOutcome& out = outcomes[i];
    out.cell = cells[i];
    const Matrix& x_unl = unlabeled.layers.at(out.cell.layer);
    const Matrix& x_val = validation.layers.at(out.cell.layer);

    if (mode == RunMode::kSupervisedOracle) {
      const EvalLabels& unl_labels = require_labels(unlabeled, "unlabeled");
      out.params = train_supervised(x_unl, unl_labels.labels, train_cfg).params;
      out.has_classifier = true;
      out.cell.validation_auroc = auroc(truthfulness_scores(out.params, x_val), val_labels);
      out.cell.truthful_count = static_cast<std::size_t>(
          std::count(unl_labels.labels.begin(), unl_labels.labels.end(), 1));
      out.cell.hallucinated_count = unl_labels.labels.size() - out.cell.truthful_count;
      return;
    }

    const SubspaceModel model = subspaces.at(out.cell.layer).truncated(out.cell.k);
    if (mode == RunMode::kDirectProjection) {
      out.cell.validation_auroc = auroc(negated(score_batch(model, x_val)), val_labels);
      return;
    }

    const Vector zeta = mode == RunMode::kLayerSum ? layer_sum_scores(out.cell.k)
                                                   : score_batch(model, x_unl);
    double best = 0.0;
    bool have_best = false;
    const ThresholdSelection sel = select_threshold(
        zeta, cfg.threshold_percentiles, [&](const MembershipPartition& part) {
          TrainResult trained = train(x_unl, part, train_cfg);
          const double value = auroc(truthfulness_scores(trained.params, x_val), val_labels);
          // Mirrors select_threshold's ascending scan with ties to the later candidate.
          if (!have_best || value >= best) {
            best = value;
            have_best = true;
            out.params = std::move(trained.params);
            out.cell.hallucinated_count = part.hallucinated_idx.size();
            out.cell.truthful_count = part.truthful_idx.size();
          }
          return value;
        });
    out.has_classifier = true;
    out.cell.threshold = sel.threshold;
    out.cell.threshold_percentile = sel.percentile;
    out.cell.validation_auroc = sel.value;
  });
  report.timings_ms["search"] = ms_since(t0);

  // First cell in (layer, k) order wins ties.
  std::size_t best = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    report.grid.push_back(outcomes[i].cell);
    if (outcomes[i].cell.validation_auroc > outcomes[best].cell.validation_auroc) best = i;
  }
  const CellOutcome& chosen = outcomes[best];
  report.layer = chosen.cell.layer;
  report.k = chosen.cell.k;
  report.threshold = chosen.cell.threshold;
  report.threshold_percentile = chosen.cell.threshold_percentile;
  report.validation_auroc = chosen.cell.validation_auroc;
  report.hallucinated_count = chosen.cell.hallucinated_count;
  report.truthful_count = chosen.cell.truthful_count;

  std::optional<SubspaceModel> chosen_subspace;
  if (mode != RunMode::kSupervisedOracle) {
    chosen_subspace = subspaces.at(report.layer).truncated(report.k);
  }
  auto score_split = [&](const Matrix& x) {
    return chosen.has_classifier ? truthfulness_scores(chosen.params, x)
                                 : negated(score_batch(*chosen_subspace, x));
  };
  report.lambda =
      evaluate_detector(score_split(validation.layers.at(report.layer)), val_labels.labels).best_lambda;

  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
    if (chosen_subspace) save_subspace(*chosen_subspace, cfg.output_dir / "subspace");
    if (chosen.has_classifier) {
      save_classifier(chosen.params, {train_cfg.seed, config_hash(train_cfg)},
                      cfg.output_dir / "classifier");
    }
  }

  t0 = Clock::now();
  const SplitData test = in.test->load();
  const EvalLabels& test_labels = require_labels(test, "test");
  if (!test.layers.contains(report.layer)) {
    throw Error(ErrorKind::kInvalidArgument,
                "test split lacks the selected layer " + std::to_string(report.layer));
  }
  const Vector test_scores = score_split(test.layers.at(report.layer));
  report.test_report = evaluate_detector(test_scores, test_labels.labels);
  report.test_auroc = report.test_report.auroc;
  report.test_accuracy = accuracy_at(test_scores, test_labels.labels, report.lambda);
  report.timings_ms["test"] = ms_since(t0);
  return report;
}

RunReport run_direct_projection(const RunConfig& cfg, const RunInputs& inputs) {
  RunConfig c = cfg;
  c.mode = RunMode::kDirectProjection;
  return run_haloscope(c, inputs);
}

RunReport run_transfer(const RunConfig& cfg, const DataSource& source_unlabeled,
                       const RunInputs& target) {
  RunInputs in = target;
  in.subspace_source = &source_unlabeled;
  return run_haloscope(cfg, in);
}

RunReport run_from_manifests(const RunConfig& cfg) {
  if (cfg.unlabeled_manifests.empty() || cfg.validation_manifests.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "unlabeled and validation manifests are required");
  }
  ManifestSource unlabeled(cfg.unlabeled_manifests, cfg.mha_location, cfg.layer_grid,
                           cfg.similarity_threshold);
  ManifestSource validation(cfg.validation_manifests, cfg.mha_location, cfg.layer_grid,
                            cfg.similarity_threshold);
  ManifestSource test(cfg.test_manifests, cfg.mha_location, cfg.layer_grid,
                      cfg.similarity_threshold);
  return run_haloscope(cfg, {&unlabeled, &validation, &test});
}

}  // namespace haloscope
