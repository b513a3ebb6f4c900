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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "haloscope/classifier.hpp"
#include "haloscope/evaluation.hpp"
#include "haloscope/pipeline.hpp"
#include "haloscope/subspace.hpp"
#include "haloscope/synthetic.hpp"
#include "oracles.hpp"

namespace hs = haloscope;
namespace ht = haloscope::testing;

namespace {

constexpr int kSeeds = 5;
constexpr double kSplitUnlabeled = 0.7;
constexpr double kSplitValidation = 0.1;

struct Outcome {
  bool ok = true;
  std::string detail;
};

int g_failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_budget = secs < budget_s;
  const bool pass = out.ok && in_budget;
  if (!pass) ++g_failures;
  std::printf("%s criterion %d (%s): %s [%.2fs of %.0fs budget]\n", pass ? "PASS" : "FAIL", id, name,
              out.detail.c_str(), secs, budget_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

hs::MixtureConfig planted_config(std::uint64_t seed) {
  hs::MixtureConfig m;
  m.n_samples = 2000;
  m.dim = 64;
  m.pi = 0.25;
  m.planted_rank = 2;
  m.signal = 4.0;
  m.noise_std = 1.0;
  m.seed = seed;
  return m;
}

// Classifier settings sized for 1400 unlabeled rows; the library defaults
// target much larger embedding sets.
hs::RunConfig synthetic_run_config(std::uint64_t seed) {
  hs::RunConfig cfg;
  cfg.k_grid = {1, 2, 3, 4};
  cfg.train.hidden = 32;
  cfg.train.epochs = 50;
  cfg.train.batch_size = 32;
  cfg.train.lr0 = 0.05;
  cfg.train.weight_decay = 3e-4;
  cfg.seed = seed;
  return cfg;
}

struct SeedData {
  hs::PlantedMixture mixture;
  hs::MixtureSplits splits;
};

SeedData seed_data(std::uint64_t seed) {
  SeedData d{hs::generate_mixture(planted_config(seed)), {}};
  d.splits = hs::split_mixture(d.mixture, kSplitUnlabeled, kSplitValidation, seed);
  return d;
}

struct Sources {
  explicit Sources(const hs::MixtureSplits& s, bool unlabeled_has_labels = false)
      : unlabeled(s.unlabeled.embeddings, unlabeled_has_labels ? s.unlabeled.labels : std::vector<int>{}),
        validation(s.validation.embeddings, s.validation.labels),
        test(s.test.embeddings, s.test.labels) {}
  hs::RunInputs inputs() const { return {&unlabeled, &validation, &test}; }
  hs::InMemorySource unlabeled, validation, test;
};

double run_auroc(const hs::RunConfig& cfg, const hs::MixtureSplits& s, bool with_labels = false) {
  Sources src(s, with_labels);
  return hs::run_haloscope(cfg, src.inputs()).test_auroc;
}

// Test AUROC of the standard pipeline per seed, shared by criteria 5 and 6.
std::map<std::uint64_t, double> g_haloscope_auroc;

double haloscope_auroc(std::uint64_t seed) {
  auto it = g_haloscope_auroc.find(seed);
  if (it == g_haloscope_auroc.end()) {
    it = g_haloscope_auroc.emplace(seed, run_auroc(synthetic_run_config(seed), seed_data(seed).splits)).first;
  }
  return it->second;
}

double abs_cosine(const hs::Matrix& a, const hs::Matrix& b, std::size_t j) {
  double d = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    d += a(i, j) * b(i, j);
    na += a(i, j) * a(i, j);
    nb += b(i, j) * b(i, j);
  }
  return std::abs(d) / std::sqrt(na * nb);
}

Outcome svd_oracle() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> n_dist(20, 200), d_dist(4, 64);
  double worst_cos = 1.0, worst_sigma = 0.0;
  for (int m = 0; m < 30; ++m) {
    const std::size_t n = n_dist(rng), d = d_dist(rng);
    const std::size_t k = std::min<std::size_t>(3, std::min(n - 1, d));
    const hs::Matrix x = ht::spread_spectrum_matrix(n, d, 1000 + m);
    const auto fit = hs::fit_subspace(x, k);
    const auto oracle = hs::brute_force_top_k(x, k);
    for (std::size_t j = 0; j < k; ++j) {
      worst_cos = std::min(worst_cos, abs_cosine(fit.directions, oracle.directions, j));
      worst_sigma = std::max(worst_sigma, std::abs(fit.singular_values[j] - oracle.singular_values[j]) /
                                              oracle.singular_values[j]);
    }
  }
  const bool ok = worst_cos >= 1.0 - 1e-6 && worst_sigma <= 1e-6;
  return {ok, fmt("min |cos| = %.12f", worst_cos) + fmt(", max sigma rel err = %.3e", worst_sigma)};
}

hs::SubspaceModel manual_model(hs::Vector mean, hs::Matrix v, hs::Vector sigma) {
  hs::SubspaceModel m;
  m.mean = std::move(mean);
  m.k = v.cols();
  m.directions = std::move(v);
  m.singular_values = std::move(sigma);
  m.weighted = true;
  return m;
}

Outcome score_correctness() {
  bool ok = true;
  ok &= hs::membership_score(manual_model({0, 0}, hs::Matrix(2, 1, {1, 0}), {2.0}), hs::Vector{3, 4}) == 18.0;
  ok &= hs::membership_score(manual_model({0, 0}, hs::Matrix(2, 2, {1, 0, 0, 1}), {2.0, 1.0}),
                             hs::Vector{1, 1}) == 1.5;
  const auto one = manual_model({1, 1}, hs::Matrix(2, 1, {1, 0}), {1.0});
  ok &= hs::score_batch(one, hs::Matrix(2, 2, {1, 1, 3, 1})) == hs::Vector{0.0, 4.0};
  const auto fit = hs::fit_subspace(ht::random_matrix(100, 16, 3), 4);
  ok &= hs::membership_score(fit, fit.mean) == 0.0;

  const hs::Matrix batch = ht::random_matrix(200, 16, 4);
  const hs::Vector vec = hs::score_batch(fit, batch);
  std::size_t mismatches = 0;
  for (std::size_t r = 0; r < batch.rows(); ++r) mismatches += vec[r] != hs::membership_score(fit, batch.row(r));
  ok &= mismatches == 0;
  return {ok, "hand cases exact, 200x16 batch mismatches = " + std::to_string(mismatches)};
}

Outcome gradient_check() {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int draw = 0; draw < 50; ++draw) {
    const std::size_t d = 2 + draw % 5, hidden = 3 + draw % 6, n = 10;
    const hs::Matrix flat = ht::random_matrix(1, hidden * d + 2 * hidden + 1, 300 + draw, 0.7);
    const hs::MlpParams p = hs::unflatten(flat.data(), d, hidden);
    const hs::Matrix x = ht::random_matrix(n, d, 600 + draw);
    std::vector<int> y(n);
    for (int& v : y) v = static_cast<int>(rng() & 1u);
    const double wd = 1e-2;
    const auto analytic = hs::flatten(hs::loss_and_gradient(p, x, y, {}, wd).gradient);
    auto theta = hs::flatten(p);
    constexpr double h = 1e-5;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double saved = theta[i];
      theta[i] = saved + h;
      const double up = ht::reference_objective(hs::unflatten(theta, d, hidden), x, y, wd);
      theta[i] = saved - h;
      const double down = ht::reference_objective(hs::unflatten(theta, d, hidden), x, y, wd);
      theta[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
      worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
    }
  }
  return {worst < 1e-4, fmt("max rel err = %.3e", worst)};
}

Outcome auroc_oracle() {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int set = 0; set < 100; ++set) {
    const std::size_t n = 20 + rng() % 481;
    const int levels = 2 + static_cast<int>(rng() % 20);
    std::uniform_int_distribution<int> level(0, levels - 1);
    hs::Vector s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = level(rng);
      y[i] = static_cast<int>(rng() % 4 == 0);
    }
    y[0] = 1;
    y[1] = 0;
    worst = std::max(worst, std::abs(hs::auroc(s, y) - ht::pairwise_auroc(s, y)));
  }
  return {worst <= 1e-12, fmt("max |rank - pairwise| = %.3e", worst)};
}

Outcome end_to_end() {
  std::vector<double> aurocs;
  bool geometry = true;
  for (int s = 0; s < kSeeds; ++s) {
    aurocs.push_back(haloscope_auroc(s));
    const auto data = seed_data(s);
    const auto fit = hs::fit_subspace(data.splits.unlabeled.embeddings, 2);
    const auto z = hs::score_batch(fit, data.splits.unlabeled.embeddings);
    double sum[2] = {0, 0};
    double count[2] = {0, 0};
    for (std::size_t i = 0; i < z.size(); ++i) {
      sum[data.splits.unlabeled.labels[i]] += z[i];
      count[data.splits.unlabeled.labels[i]] += 1;
    }
    geometry &= sum[0] / count[0] > sum[1] / count[1];
  }
  const double med = ht::median(aurocs);
  return {med >= 0.90 && geometry,
          fmt("median test AUROC = %.4f", med) + (geometry ? ", hallucinated mean zeta > truthful" : ", zeta ordering violated")};
}

double median_over_seeds(const std::function<double(std::uint64_t)>& f) {
  std::vector<double> v;
  for (int s = 0; s < kSeeds; ++s) v.push_back(f(s));
  return ht::median(v);
}

Outcome ordering_properties() {
  std::string detail;
  bool ok = true;
  auto record = [&](const char* name, bool pass, const std::string& values) {
    ok &= pass;
    if (!detail.empty()) detail += "; ";
    detail += std::string(name) + (pass ? " ok " : " FAILED ") + values;
  };

  const double halo = median_over_seeds(haloscope_auroc);
  const double direct = median_over_seeds([](std::uint64_t s) {
    hs::RunConfig cfg = synthetic_run_config(s);
    cfg.mode = hs::RunMode::kDirectProjection;
    return run_auroc(cfg, seed_data(s).splits);
  });
  record("haloscope>=direct-0.01", halo >= direct - 0.01, fmt("(%.4f", halo) + fmt(" vs %.4f)", direct));

  // Weighting only matters when the planted directions carry unequal spread.
  auto anisotropic = [](std::uint64_t s, hs::RunMode mode) {
    hs::MixtureConfig m = planted_config(s);
    m.direction_scales = {1.0, 0.5};
    const auto split = hs::split_mixture(hs::generate_mixture(m), kSplitUnlabeled, kSplitValidation, s);
    hs::RunConfig cfg = synthetic_run_config(s);
    cfg.mode = mode;
    return run_auroc(cfg, split);
  };
  const double weighted = median_over_seeds([&](std::uint64_t s) { return anisotropic(s, hs::RunMode::kHaloscope); });
  const double nonweighted =
      median_over_seeds([&](std::uint64_t s) { return anisotropic(s, hs::RunMode::kNonWeighted); });
  record("weighted>=nonweighted", weighted >= nonweighted,
         fmt("(anisotropic %.4f", weighted) + fmt(" vs %.4f)", nonweighted));

  std::vector<double> per_k;
  for (std::size_t k = 1; k <= 10; ++k) {
    per_k.push_back(median_over_seeds([k](std::uint64_t s) {
      hs::RunConfig cfg = synthetic_run_config(s);
      cfg.k_grid = {k};
      return run_auroc(cfg, seed_data(s).splits);
    }));
  }
  const auto peak = static_cast<std::size_t>(std::max_element(per_k.begin(), per_k.end()) - per_k.begin()) + 1;
  std::string curve = "(peak k=" + std::to_string(peak) + ":";
  for (double a : per_k) curve += fmt(" %.3f", a);
  record("k-sweep peak at rank+-1", peak >= 1 && peak <= 3, curve + ")");

  auto transfer = [](std::uint64_t s, bool shared) {
    const auto target = seed_data(s);
    hs::MixtureConfig src_cfg = planted_config(s + 1000);
    const hs::Matrix planted = shared ? target.mixture.planted_directions
                                      : hs::random_orthonormal(src_cfg.dim, src_cfg.planted_rank, s + 2000);
    const auto source = hs::generate_mixture(src_cfg, planted, target.mixture.center);
    const auto source_split = hs::split_mixture(source, kSplitUnlabeled, kSplitValidation, s + 1000);
    hs::InMemorySource source_unlabeled(source_split.unlabeled.embeddings, {});
    Sources tgt(target.splits);
    return hs::run_transfer(synthetic_run_config(s), source_unlabeled, tgt.inputs()).test_auroc;
  };
  const double shared = median_over_seeds([&](std::uint64_t s) { return transfer(s, true); });
  const double disjoint = median_over_seeds([&](std::uint64_t s) { return transfer(s, false); });
  record("shared transfer within 0.05", std::abs(shared - halo) <= 0.05,
         fmt("(%.4f", shared) + fmt(" vs in-domain %.4f", halo) + fmt("; disjoint control %.4f)", disjoint));

  const double oracle = median_over_seeds([](std::uint64_t s) {
    hs::RunConfig cfg = synthetic_run_config(s);
    cfg.mode = hs::RunMode::kSupervisedOracle;
    return run_auroc(cfg, seed_data(s).splits, true);
  });
  record("oracle>=haloscope-0.03", oracle >= halo - 0.03, fmt("(%.4f", oracle) + fmt(" vs %.4f)", halo));
  return {ok, detail};
}

Outcome determinism() {
  const auto data = seed_data(42);
  const hs::RunConfig cfg = synthetic_run_config(42);
  Sources a(data.splits), b(data.splits);
  const std::string first = hs::report_metrics_json(hs::run_haloscope(cfg, a.inputs()));
  const std::string second = hs::report_metrics_json(hs::run_haloscope(cfg, b.inputs()));
  return {first == second, first == second ? "metric JSON byte-identical" : "metric JSON differs"};
}

Outcome rouge() {
  struct Case {
    const char* candidate;
    const char* reference;
    double expected;
  };
  const Case cases[] = {
      {"a b c", "a c", 0.8},
      {"the cat sat", "the cat sat", 1.0},
      {"red blue", "green yellow", 0.0},
      {"a b c d", "b d", 2.0 * 0.5 * 1.0 / 1.5},
      {"x y z w", "w z y x", 2.0 * 0.25 * 0.25 / 0.5},
  };
  double worst = 0.0;
  for (const auto& c : cases) worst = std::max(worst, std::abs(hs::rouge_l(c.candidate, c.reference) - c.expected));
  const std::vector<std::vector<double>> sims = {{0.51}, {0.50}, {std::nextafter(0.5, 1.0)}};
  const auto labels = hs::label_from_similarity(sims, 0.5).labels;
  const bool strict = labels == std::vector<int>{1, 0, 1};
  return {worst <= 1e-12 && strict,
          fmt("max LCS-F1 err = %.3e", worst) + (strict ? ", boundary 0.5 strict" : ", boundary not strict")};
}

}  // namespace

int main() {
  criterion(1, "SVD oracle equivalence", 10, svd_oracle);
  criterion(2, "score correctness", 1, score_correctness);
  criterion(3, "gradient check", 30, gradient_check);
  criterion(4, "AUROC oracle", 5, auroc_oracle);
  criterion(5, "end-to-end synthetic", 120, end_to_end);
  criterion(6, "ordering properties", 600, ordering_properties);
  criterion(7, "determinism", 120, determinism);
  criterion(8, "ROUGE-L", 1, rouge);
  std::printf("%d criteria failed\n", g_failures);
  return g_failures;
}
