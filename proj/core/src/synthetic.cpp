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

#include "haloscope/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "haloscope/error.hpp"
#include "haloscope/manifest.hpp"
#include "haloscope/rng.hpp"
#include "haloscope/tensor_io.hpp"

namespace haloscope {
namespace {

Matrix projector(const Matrix& v) {
  const std::size_t d = v.rows();
  Matrix p(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < v.cols(); ++c) s += v(i, c) * v(j, c);
      p(i, j) = s;
    }
  return p;
}

LabeledSplit take(const PlantedMixture& m, std::span<const std::size_t> idx) {
  LabeledSplit s{m.embeddings.select_rows(idx), {}};
  s.labels.reserve(idx.size());
  for (std::size_t i : idx) s.labels.push_back(m.labels[i]);
  return s;
}

}  // namespace

void validate(const MixtureConfig& cfg) {
  if (cfg.n_samples < 1 || cfg.dim < 1) {
    throw Error(ErrorKind::kInvalidArgument, "n_samples and dim must be >= 1");
  }
  if (!(cfg.pi > 0.0 && cfg.pi <= 1.0)) throw Error(ErrorKind::kOutOfRange, "pi must lie in (0, 1]");
  if (cfg.planted_rank < 1 || cfg.planted_rank > cfg.dim) {
    throw Error(ErrorKind::kOutOfRange, "planted_rank must lie in [1, dim]");
  }
  if (!(cfg.signal >= 0.0)) throw Error(ErrorKind::kOutOfRange, "signal must be >= 0");
  if (!(cfg.noise_std >= 0.0)) throw Error(ErrorKind::kOutOfRange, "noise_std must be >= 0");
  if (!cfg.direction_scales.empty() && cfg.direction_scales.size() != cfg.planted_rank) {
    throw Error(ErrorKind::kShapeMismatch, "direction_scales needs planted_rank entries");
  }
}

Matrix random_orthonormal(std::size_t dim, std::size_t rank, std::uint64_t seed) {
  if (rank > dim) throw Error(ErrorKind::kOutOfRange, "rank exceeds dimension");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix v(dim, rank);
  for (std::size_t j = 0; j < rank; ++j) {
    // Redraw in the (measure-zero) case that the column collapses.
    for (;;) {
      for (std::size_t i = 0; i < dim; ++i) v(i, j) = gauss(rng);
      for (std::size_t p = 0; p < j; ++p) {
        double proj = 0.0;
        for (std::size_t i = 0; i < dim; ++i) proj += v(i, j) * v(i, p);
        for (std::size_t i = 0; i < dim; ++i) v(i, j) -= proj * v(i, p);
      }
      double n = 0.0;
      for (std::size_t i = 0; i < dim; ++i) n += v(i, j) * v(i, j);
      n = std::sqrt(n);
      if (n > 1e-8) {
        for (std::size_t i = 0; i < dim; ++i) v(i, j) /= n;
        break;
      }
    }
  }
  return v;
}

namespace {

PlantedMixture generate(const MixtureConfig& cfg, const Matrix& planted, const Vector* center) {
  validate(cfg);
  if (planted.rows() != cfg.dim || planted.cols() != cfg.planted_rank) {
    throw Error(ErrorKind::kShapeMismatch, "planted directions must be dim x planted_rank");
  }
  if (center && center->size() != cfg.dim) {
    throw Error(ErrorKind::kShapeMismatch, "center must have dim entries");
  }
  std::mt19937_64 rng(derive_seed(cfg.seed, "mixture"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution is_hallucinated(cfg.pi);

  Vector base(cfg.dim);
  for (double& b : base) b = gauss(rng);
  if (center) base = *center;

  PlantedMixture out{Matrix(cfg.n_samples, cfg.dim), std::vector<int>(cfg.n_samples, 1), planted, base};
  Vector coef(cfg.planted_rank);
  for (std::size_t r = 0; r < cfg.n_samples; ++r) {
    auto row = out.embeddings.row(r);
    for (std::size_t i = 0; i < cfg.dim; ++i) row[i] = base[i] + cfg.noise_std * gauss(rng);
    if (!is_hallucinated(rng)) continue;
    out.labels[r] = 0;
    // Uniform direction on the unit sphere of the planted subspace.
    double n = 0.0;
    do {
      for (double& c : coef) c = gauss(rng);
      n = norm(coef);
    } while (n == 0.0);
    for (std::size_t j = 0; j < cfg.planted_rank; ++j) {
      const double scale = cfg.direction_scales.empty() ? 1.0 : cfg.direction_scales[j];
      const double a = cfg.signal * scale * coef[j] / n;
      for (std::size_t i = 0; i < cfg.dim; ++i) row[i] += a * planted(i, j);
    }
  }
  return out;
}

}  // namespace

PlantedMixture generate_mixture(const MixtureConfig& cfg) {
  validate(cfg);
  return generate_mixture(cfg, random_orthonormal(cfg.dim, cfg.planted_rank,
                                                  derive_seed(cfg.seed, "planted_directions")));
}

PlantedMixture generate_mixture(const MixtureConfig& cfg, const Matrix& planted) {
  return generate(cfg, planted, nullptr);
}

PlantedMixture generate_mixture(const MixtureConfig& cfg, const Matrix& planted, const Vector& center) {
  return generate(cfg, planted, &center);
}

TopKEigen brute_force_top_k(const Matrix& embeddings, std::size_t k) {
  const std::size_t n = embeddings.rows();
  const std::size_t d = embeddings.cols();
  if (k < 1 || k > d) throw Error(ErrorKind::kOutOfRange, "k outside [1, d]");

  // Centered Gram matrix C = sum_r (x_r - mu)(x_r - mu)^T, built directly.
  Vector mu(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < d; ++i) mu[i] += embeddings(r, i);
  for (double& m : mu) m /= static_cast<double>(n);
  Matrix c(d, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        c(i, j) += (embeddings(r, i) - mu[i]) * (embeddings(r, j) - mu[j]);

  constexpr int kMaxIterations = 10000;
  constexpr double kTol = 1e-12;
  std::mt19937_64 rng(0x5EED);
  std::normal_distribution<double> gauss(0.0, 1.0);

  TopKEigen out{Matrix(d, k), Vector(k), Vector(k)};
  Vector v(d), w(d);
  for (std::size_t j = 0; j < k; ++j) {
    for (double& x : v) x = gauss(rng);
    double nv = norm(v);
    for (double& x : v) x /= nv;
    for (int it = 0; it < kMaxIterations; ++it) {
      for (std::size_t a = 0; a < d; ++a) {
        double s = 0.0;
        for (std::size_t b = 0; b < d; ++b) s += c(a, b) * v[b];
        w[a] = s;
      }
      const double nw = norm(w);
      if (nw == 0.0) break;
      double delta = 0.0;
      for (std::size_t a = 0; a < d; ++a) {
        const double next = w[a] / nw;
        delta += (next - v[a]) * (next - v[a]);
        v[a] = next;
      }
      if (std::sqrt(delta) < kTol) break;
    }
    double lambda = 0.0;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) lambda += v[a] * c(a, b) * v[b];
    out.eigenvalues[j] = lambda;
    out.singular_values[j] = std::sqrt(std::max(lambda, 0.0));
    for (std::size_t a = 0; a < d; ++a) out.directions(a, j) = v[a];
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) c(a, b) -= lambda * v[a] * v[b];
  }
  return out;
}

double subspace_recovery_error(const Matrix& fitted, const Matrix& planted) {
  if (fitted.rows() != planted.rows()) {
    throw Error(ErrorKind::kShapeMismatch, "subspaces live in different dimensions");
  }
  const Matrix a = projector(fitted);
  const Matrix b = projector(planted);
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
  return std::sqrt(s);
}

double subspace_recovery_error(const SubspaceModel& fitted, const Matrix& planted) {
  return subspace_recovery_error(fitted.directions, planted);
}

MixtureSplits split_mixture(const PlantedMixture& mixture, double unlabeled_fraction,
                            double validation_fraction, std::uint64_t seed) {
  if (!(unlabeled_fraction > 0.0 && validation_fraction > 0.0 &&
        unlabeled_fraction + validation_fraction < 1.0)) {
    throw Error(ErrorKind::kOutOfRange, "split fractions must be positive and sum below 1");
  }
  const std::size_t n = mixture.embeddings.rows();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, "split"));
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_unl = static_cast<std::size_t>(std::llround(unlabeled_fraction * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(n)));
  if (n_unl + n_val >= n) throw Error(ErrorKind::kOutOfRange, "too few samples to split");
  std::span<const std::size_t> all(idx);
  return {take(mixture, all.subspan(0, n_unl)), take(mixture, all.subspan(n_unl, n_val)),
          take(mixture, all.subspan(n_unl + n_val))};
}

std::filesystem::path write_labeled_split(const LabeledSplit& split, const std::filesystem::path& dir,
                                          const std::string& name, int layer_index) {
  std::filesystem::create_directories(dir);
  const auto manifest_path = dir / (name + ".json");
  write_tensor(split.embeddings, embedding_tensor_path(manifest_path));

  std::vector<GenerationRecord> records;
  records.reserve(split.labels.size());
  Matrix similarity(split.labels.size(), 1);
  for (std::size_t i = 0; i < split.labels.size(); ++i) {
    records.push_back({"synthetic sample " + std::to_string(i),
                       split.labels[i] == 1 ? "truthful" : "hallucinated", {},
                       static_cast<double>(split.labels[i])});
    similarity(i, 0) = split.labels[i];
  }
  write_generations(records, dir / (name + ".generations.jsonl"));
  write_tensor(similarity, dir / (name + ".similarity.hse"));

  EmbeddingManifest m;
  m.dataset_name = name;
  m.model_name = kPlantedModelName;
  m.layer_index = layer_index;
  m.record_count = split.labels.size();
  m.generation_file = name + ".generations.jsonl";
  m.similarity_file = name + ".similarity.hse";
  save_manifest(m, manifest_path);
  return manifest_path;
}

}  // namespace haloscope
