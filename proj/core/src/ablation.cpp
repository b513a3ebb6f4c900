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

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "haloscope/error.hpp"
#include "haloscope/pipeline.hpp"
#include "haloscope/rng.hpp"

namespace haloscope {
namespace {

void append_suite(std::vector<AblationRow>& rows, const RunConfig& cfg, const AblationPlan& plan,
                  const SplitData& unlabeled, const SplitData& validation, const SplitData& test,
                  const std::string& prefix) {
  auto run = [&](const std::string& ablation, const std::string& setting, const RunConfig& c,
                 const SplitData& unl) {
    InMemorySource u(unl), v(validation), t(test);
    rows.push_back({ablation, prefix + setting, run_haloscope(c, {&u, &v, &t})});
  };

  RunConfig base = cfg;
  base.mode = RunMode::kHaloscope;
  base.output_dir.clear();

  if (plan.k_sweep) {
    for (std::size_t k : cfg.k_grid) {
      RunConfig c = base;
      c.k_grid = {k};
      run("k", std::to_string(k), c, unlabeled);
    }
  }

  std::vector<int> layers;
  for (const auto& [layer, _] : unlabeled.layers) {
    if (cfg.layer_grid.empty() ||
        std::find(cfg.layer_grid.begin(), cfg.layer_grid.end(), layer) != cfg.layer_grid.end()) {
      layers.push_back(layer);
    }
  }
  if (plan.layer_sweep && layers.size() > 1) {
    for (int layer : layers) {
      RunConfig c = base;
      c.layer_grid = {layer};
      run("layer", std::to_string(layer), c, unlabeled);
    }
  }

  if (plan.score_variants) {
    RunConfig w = base;
    w.weighted = true;
    run("score", "weighted", w, unlabeled);
    RunConfig nw = base;
    nw.mode = RunMode::kNonWeighted;
    run("score", "non_weighted", nw, unlabeled);
    if (layers.size() > 1) {
      RunConfig ls = base;
      ls.mode = RunMode::kLayerSum;
      run("score", "layer_sum", ls, unlabeled);
    }
  }

  if (plan.direct_projection) {
    RunConfig c = base;
    c.mode = RunMode::kDirectProjection;
    run("mode", "direct_projection", c, unlabeled);
  }

  if (plan.supervised_oracle && unlabeled.labels) {
    RunConfig c = base;
    c.mode = RunMode::kSupervisedOracle;
    run("mode", "supervised_oracle", c, unlabeled);
  }

  if (!plan.unlabeled_sizes.empty()) {
    std::vector<std::size_t> order(unlabeled.rows());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(cfg.seed, "unlabeled_size"));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t n : plan.unlabeled_sizes) {
      const std::size_t take = std::min(n, order.size());
      std::vector<std::size_t> subset(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
      std::sort(subset.begin(), subset.end());
      run("unlabeled_size", std::to_string(take), base, unlabeled.select_rows(subset));
    }
  }
}

}  // namespace

std::vector<AblationRow> run_ablation_suite(const RunConfig& cfg, const AblationPlan& plan,
                                            const SplitData& unlabeled, const SplitData& validation,
                                            const SplitData& test) {
  std::vector<AblationRow> rows;
  append_suite(rows, cfg, plan, unlabeled, validation, test, "");
  return rows;
}

std::vector<AblationRow> run_ablation_suite(const RunConfig& cfg, const AblationPlan& plan) {
  std::vector<MhaLocation> locations = plan.locations;
  if (locations.empty()) locations.push_back(cfg.mha_location);

  std::vector<AblationRow> rows;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const MhaLocation loc = locations[i];
    ManifestSource u(cfg.unlabeled_manifests, loc, cfg.layer_grid, cfg.similarity_threshold);
    ManifestSource v(cfg.validation_manifests, loc, cfg.layer_grid, cfg.similarity_threshold);
    ManifestSource t(cfg.test_manifests, loc, cfg.layer_grid, cfg.similarity_threshold);
    const SplitData unl = u.load();
    const SplitData val = v.load();
    const SplitData tst = t.load();

    RunConfig c = cfg;
    c.mha_location = loc;
    c.mode = RunMode::kHaloscope;
    c.output_dir.clear();
    if (locations.size() > 1) {
      InMemorySource su(unl), sv(val), st(tst);
      rows.push_back({"location", std::string(to_string(loc)), run_haloscope(c, {&su, &sv, &st})});
    }
    // The remaining ablations run once, at the first location.
    if (i == 0) append_suite(rows, c, plan, unl, val, tst, "");
  }
  return rows;
}

void write_ablation_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.precision(10);
  out << "ablation,setting,mode,layer,k,threshold_percentile,validation_auroc,test_auroc,"
         "test_accuracy,hallucinated_count,truthful_count,unlabeled_count\n";
  for (const auto& r : rows) {
    const RunReport& p = r.report;
    out << r.ablation << ',' << r.setting << ',' << to_string(p.mode) << ',' << p.layer << ','
        << p.k << ',' << p.threshold_percentile << ',' << p.validation_auroc << ','
        << p.test_auroc << ',' << p.test_accuracy << ',' << p.hallucinated_count << ','
        << p.truthful_count << ',' << p.unlabeled_count << '\n';
  }
}

}  // namespace haloscope
