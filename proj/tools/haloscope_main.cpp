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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "haloscope/classifier.hpp"
#include "haloscope/error.hpp"
#include "haloscope/manifest.hpp"
#include "haloscope/pipeline.hpp"
#include "haloscope/subspace.hpp"
#include "haloscope/synthetic.hpp"
#include "haloscope/tensor_io.hpp"

namespace fs = std::filesystem;
namespace hs = haloscope;

namespace {

// Flags shared by run, transfer and ablate. Values given on the command line
// override the JSON config.
struct RunFlags {
  std::string config;
  std::vector<std::string> unlabeled, validation, test;
  std::vector<std::size_t> k_grid;
  std::vector<int> layer_grid;
  std::string location, mode;
  std::vector<double> percentiles;
  std::optional<std::uint64_t> seed;
  std::optional<double> similarity_threshold;
  std::string output_dir;
  std::optional<std::size_t> threads, hidden, epochs, batch_size;
  std::optional<double> lr0, weight_decay;
  bool no_weighted = false;
  std::string report;
};

void add_run_flags(CLI::App* app, RunFlags& f) {
  app->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--unlabeled", f.unlabeled, "Unlabeled split manifests");
  app->add_option("--validation", f.validation, "Validation split manifests");
  app->add_option("--test", f.test, "Test split manifests");
  app->add_option("--k-grid", f.k_grid, "Subspace ranks to search");
  app->add_option("--layer-grid", f.layer_grid, "Layers to search");
  app->add_option("--location", f.location, "block_output, attn_output or attn_projected");
  app->add_option("--mode", f.mode, "haloscope, direct_projection, supervised_oracle, nonweighted, layer_sum");
  app->add_option("--percentiles", f.percentiles, "Threshold percentiles to search");
  app->add_option("--seed", f.seed, "Root seed");
  app->add_option("--similarity-threshold", f.similarity_threshold, "Truthfulness cut on similarity");
  app->add_option("--output-dir", f.output_dir, "Directory for the fitted subspace and classifier");
  app->add_option("--threads", f.threads, "Grid cells evaluated concurrently");
  app->add_option("--hidden", f.hidden, "Classifier hidden width");
  app->add_option("--epochs", f.epochs, "Training epochs");
  app->add_option("--batch-size", f.batch_size, "Training batch size");
  app->add_option("--lr", f.lr0, "Initial learning rate");
  app->add_option("--weight-decay", f.weight_decay, "L2 weight decay");
  app->add_flag("--no-weighted", f.no_weighted, "Use unit weights in the membership score");
  app->add_option("--report", f.report, "Write the report here instead of stdout");
}

std::vector<fs::path> to_paths(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

hs::RunConfig build_config(const RunFlags& f) {
  hs::RunConfig cfg = f.config.empty() ? hs::RunConfig{} : hs::load_run_config(f.config);
  if (!f.unlabeled.empty()) cfg.unlabeled_manifests = to_paths(f.unlabeled);
  if (!f.validation.empty()) cfg.validation_manifests = to_paths(f.validation);
  if (!f.test.empty()) cfg.test_manifests = to_paths(f.test);
  if (!f.k_grid.empty()) cfg.k_grid = f.k_grid;
  if (!f.layer_grid.empty()) cfg.layer_grid = f.layer_grid;
  if (!f.location.empty()) cfg.mha_location = hs::parse_mha_location(f.location);
  if (!f.mode.empty()) cfg.mode = hs::parse_run_mode(f.mode);
  if (!f.percentiles.empty()) cfg.threshold_percentiles = f.percentiles;
  if (f.seed) cfg.seed = *f.seed;
  if (f.similarity_threshold) cfg.similarity_threshold = *f.similarity_threshold;
  if (!f.output_dir.empty()) cfg.output_dir = f.output_dir;
  if (f.threads) cfg.threads = *f.threads;
  if (f.hidden) cfg.train.hidden = *f.hidden;
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.batch_size) cfg.train.batch_size = *f.batch_size;
  if (f.lr0) cfg.train.lr0 = *f.lr0;
  if (f.weight_decay) cfg.train.weight_decay = *f.weight_decay;
  if (f.no_weighted) cfg.weighted = false;
  hs::validate(cfg.train);
  return cfg;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw hs::Error(hs::ErrorKind::kIo, "cannot write " + path);
  out << text << '\n';
  if (!out) throw hs::Error(hs::ErrorKind::kIo, "write failed for " + path);
}

// Embeddings of one manifest plus its labels when available.
struct LoadedSplit {
  hs::Matrix embeddings;
  std::vector<int> labels;
};

LoadedSplit load_split(const fs::path& manifest_path, double threshold) {
  const auto m = hs::load_manifest(manifest_path);
  LoadedSplit s{hs::read_matrix(hs::embedding_tensor_path(manifest_path)), {}};
  if (auto labels = hs::load_labels(m, threshold)) s.labels = std::move(labels->labels);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised hallucination detection from LLM embeddings"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Grid search, train and evaluate on manifests");
  add_run_flags(run, run_flags);

  RunFlags transfer_flags;
  std::vector<std::string> source;
  auto* transfer = app.add_subcommand("transfer", "Fit the subspace on a source split, evaluate on a target");
  add_run_flags(transfer, transfer_flags);
  transfer->add_option("--source", source, "Source unlabeled manifests")->required();

  RunFlags ablate_flags;
  std::string ablate_csv;
  std::vector<std::size_t> unlabeled_sizes;
  std::vector<std::string> locations;
  auto* ablate = app.add_subcommand("ablate", "Run the ablation suite and write a CSV");
  add_run_flags(ablate, ablate_flags);
  ablate->add_option("--csv", ablate_csv, "Output CSV")->required();
  ablate->add_option("--unlabeled-sizes", unlabeled_sizes, "Unlabeled subset sizes to sweep");
  ablate->add_option("--locations", locations, "MHA locations to compare");

  std::vector<std::string> fit_inputs;
  std::size_t fit_k = 1;
  bool fit_unweighted = false;
  std::string fit_out;
  auto* fit = app.add_subcommand("fit", "Fit a membership subspace on one split");
  fit->add_option("--unlabeled", fit_inputs, "Manifests to stack row-wise")->required();
  fit->add_option("--k", fit_k, "Subspace rank")->required();
  fit->add_flag("--no-weighted", fit_unweighted, "Use unit weights");
  fit->add_option("--out", fit_out, "Output prefix")->required();

  std::string score_manifest, score_subspace, score_classifier, score_csv;
  double score_threshold = hs::kDefaultSimilarityThreshold;
  auto* score = app.add_subcommand("score", "Score a split with a saved subspace or classifier");
  score->add_option("--manifest", score_manifest, "Manifest to score")->required()->check(CLI::ExistingFile);
  auto* subspace_opt = score->add_option("--subspace", score_subspace, "Subspace prefix (membership score)");
  auto* classifier_opt = score->add_option("--classifier", score_classifier, "Classifier prefix (truthfulness score)");
  subspace_opt->excludes(classifier_opt);
  score->add_option("--similarity-threshold", score_threshold, "Truthfulness cut on similarity");
  score->add_option("--out", score_csv, "Output CSV")->required();

  hs::MixtureConfig synth_cfg;
  std::string synth_dir;
  double synth_unlabeled = 0.7, synth_validation = 0.1;
  std::vector<int> synth_layers = {0};
  auto* synth = app.add_subcommand("synth", "Write a planted-mixture dataset as manifests");
  synth->add_option("--out", synth_dir, "Output directory")->required();
  synth->add_option("--n", synth_cfg.n_samples, "Rows");
  synth->add_option("--dim", synth_cfg.dim, "Embedding dimension");
  synth->add_option("--pi", synth_cfg.pi, "Hallucinated fraction");
  synth->add_option("--rank", synth_cfg.planted_rank, "Planted subspace rank");
  synth->add_option("--signal", synth_cfg.signal, "Displacement magnitude");
  synth->add_option("--noise", synth_cfg.noise_std, "Noise standard deviation");
  synth->add_option("--seed", synth_cfg.seed, "Seed");
  synth->add_option("--unlabeled-fraction", synth_unlabeled, "Unlabeled share");
  synth->add_option("--validation-fraction", synth_validation, "Validation share");
  synth->add_option("--layers", synth_layers, "Layer indices to write (same embeddings)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = build_config(run_flags);
      emit(hs::report_to_json(hs::run_from_manifests(cfg)), run_flags.report);
    } else if (*transfer) {
      const auto cfg = build_config(transfer_flags);
      hs::ManifestSource src(to_paths(source), cfg.mha_location, cfg.layer_grid, cfg.similarity_threshold);
      hs::ManifestSource u(cfg.unlabeled_manifests, cfg.mha_location, cfg.layer_grid, cfg.similarity_threshold);
      hs::ManifestSource v(cfg.validation_manifests, cfg.mha_location, cfg.layer_grid, cfg.similarity_threshold);
      hs::ManifestSource t(cfg.test_manifests, cfg.mha_location, cfg.layer_grid, cfg.similarity_threshold);
      emit(hs::report_to_json(hs::run_transfer(cfg, src, {&u, &v, &t})), transfer_flags.report);
    } else if (*ablate) {
      const auto cfg = build_config(ablate_flags);
      hs::AblationPlan plan;
      plan.unlabeled_sizes = unlabeled_sizes;
      for (const auto& l : locations) plan.locations.push_back(hs::parse_mha_location(l));
      hs::write_ablation_csv(hs::run_ablation_suite(cfg, plan), ablate_csv);
    } else if (*fit) {
      hs::ManifestSource src(to_paths(fit_inputs), hs::load_manifest(fit_inputs.front()).mha_location);
      const auto data = src.load();
      if (data.layers.size() != 1) {
        throw hs::Error(hs::ErrorKind::kInvalidArgument, "fit expects manifests of a single layer");
      }
      const auto model = hs::fit_subspace(data.layers.begin()->second, fit_k, !fit_unweighted);
      hs::save_subspace(model, fit_out);
      std::cout << "wrote " << fit_out << ".json (k=" << model.k << ", d=" << model.dim() << ")\n";
    } else if (*score) {
      const auto split = load_split(score_manifest, score_threshold);
      hs::Vector scores;
      if (!score_subspace.empty()) {
        scores = hs::score_batch(hs::load_subspace(score_subspace), split.embeddings);
      } else if (!score_classifier.empty()) {
        scores = hs::truthfulness_scores(hs::load_classifier(score_classifier), split.embeddings);
      } else {
        throw hs::Error(hs::ErrorKind::kInvalidArgument, "score needs --subspace or --classifier");
      }
      hs::write_score_csv(scores, split.labels, score_csv);
    } else if (*synth) {
      const auto mixture = hs::generate_mixture(synth_cfg);
      const auto splits = hs::split_mixture(mixture, synth_unlabeled, synth_validation, synth_cfg.seed);
      fs::create_directories(synth_dir);
      for (int layer : synth_layers) {
        const std::string suffix = synth_layers.size() > 1 ? "_l" + std::to_string(layer) : "";
        hs::write_labeled_split(splits.unlabeled, synth_dir, "unlabeled" + suffix, layer);
        hs::write_labeled_split(splits.validation, synth_dir, "validation" + suffix, layer);
        hs::write_labeled_split(splits.test, synth_dir, "test" + suffix, layer);
      }
      std::cout << "wrote " << splits.unlabeled.labels.size() << "/" << splits.validation.labels.size()
                << "/" << splits.test.labels.size() << " rows to " << synth_dir << '\n';
    }
  } catch (const hs::Error& e) {
    std::cerr << "haloscope: error [" << hs::to_string(e.kind()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "haloscope: error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
