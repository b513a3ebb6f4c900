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

#include "haloscope/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>

#include "haloscope/error.hpp"
#include "haloscope/jacobi.hpp"
#include "haloscope/tensor_io.hpp"
#include "json.hpp"

namespace haloscope {
namespace {

void normalize_sign(Matrix& directions, std::size_t col) {
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < directions.rows(); ++i) {
    const double a = std::abs(directions(i, col));
    if (a > best_abs + 1e-12) {
      best_abs = a;
      best = i;
    }
  }
  if (directions(best, col) < 0.0) {
    for (std::size_t i = 0; i < directions.rows(); ++i) directions(i, col) = -directions(i, col);
  }
}

// Modified Gram-Schmidt on the leading k columns.
void orthonormalize_columns(Matrix& m, std::size_t k) {
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t p = 0; p < j; ++p) {
      double proj = 0.0;
      for (std::size_t i = 0; i < m.rows(); ++i) proj += m(i, j) * m(i, p);
      for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) -= proj * m(i, p);
    }
    double n = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) n += m(i, j) * m(i, j);
    n = std::sqrt(n);
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) /= n;
  }
}

double weight(const SubspaceModel& model, std::size_t j) {
  return model.weighted ? model.singular_values[j] : 1.0;
}

void check_dim(const SubspaceModel& model, std::size_t got) {
  if (got != model.dim()) {
    throw Error(ErrorKind::kShapeMismatch, "embedding has dimension " + std::to_string(got) +
                                               ", subspace expects " +
                                               std::to_string(model.dim()));
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const char* suffix) {
  return std::filesystem::path(prefix.string() + suffix);
}

}  // namespace

SubspaceModel SubspaceModel::truncated(std::size_t new_k) const {
  if (new_k < 1 || new_k > k) {
    throw Error(ErrorKind::kOutOfRange,
                "cannot truncate a k=" + std::to_string(k) + " subspace to " + std::to_string(new_k));
  }
  SubspaceModel out;
  out.mean = mean;
  out.k = new_k;
  out.weighted = weighted;
  out.sign_convention_version = sign_convention_version;
  out.singular_values.assign(singular_values.begin(), singular_values.begin() + new_k);
  out.directions = Matrix(directions.rows(), new_k);
  for (std::size_t i = 0; i < directions.rows(); ++i)
    for (std::size_t j = 0; j < new_k; ++j) out.directions(i, j) = directions(i, j);
  return out;
}

SubspaceModel SubspaceModel::with_weighting(bool use_weights) const {
  SubspaceModel out = *this;
  out.weighted = use_weights;
  return out;
}

SubspaceModel fit_subspace(const Matrix& embeddings, std::size_t k, bool weighted) {
  const std::size_t n = embeddings.rows();
  const std::size_t d = embeddings.cols();
  if (n < 2) throw Error(ErrorKind::kOutOfRange, "need at least 2 samples, got " + std::to_string(n));
  if (k < 1 || k > std::min(n, d)) {
    throw Error(ErrorKind::kOutOfRange, "k=" + std::to_string(k) + " outside [1, " +
                                            std::to_string(std::min(n, d)) + "]");
  }

  SubspaceModel model;
  model.k = k;
  model.weighted = weighted;
  model.mean = column_means(embeddings);
  const Matrix centered = center_rows(embeddings, model.mean);

  Vector sigma;
  Matrix v(d, k);
  if (d <= n) {
    const SymmetricEigen eig = jacobi_eigen(gram(centered));
    sigma.resize(d);
    for (std::size_t j = 0; j < d; ++j) sigma[j] = std::sqrt(std::max(eig.values[j], 0.0));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < k; ++j) v(i, j) = eig.vectors(i, j);
  } else {
    // N x N Gram; recover right vectors as X^T u / sigma.
    const Matrix ct = centered.transposed();
    const SymmetricEigen eig = jacobi_eigen(gram(ct));
    sigma.resize(n);
    for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(std::max(eig.values[j], 0.0));
    for (std::size_t j = 0; j < k; ++j) {
      if (sigma[j] == 0.0) break;
      for (std::size_t r = 0; r < n; ++r) {
        const double u = eig.vectors(r, j);
        auto x = centered.row(r);
        for (std::size_t i = 0; i < d; ++i) v(i, j) += x[i] * u;
      }
      for (std::size_t i = 0; i < d; ++i) v(i, j) /= sigma[j];
    }
  }

  // sigma_j below this is indistinguishable from zero after squaring in the
  // Gram matrix.
  const double tol = sigma.empty() ? 0.0
                                   : 1e-7 * std::sqrt(static_cast<double>(std::max(n, d))) *
                                         sigma.front();
  std::size_t rank = 0;
  for (double s : sigma) {
    if (s > tol) ++rank;
  }
  if (rank < k) {
    throw Error(ErrorKind::kRankDeficient, "requested k=" + std::to_string(k) +
                                               " but centered data has rank " +
                                               std::to_string(rank) + "; achievable k <= " +
                                               std::to_string(rank));
  }

  orthonormalize_columns(v, k);
  for (std::size_t j = 0; j < k; ++j) normalize_sign(v, j);
  model.directions = std::move(v);
  model.singular_values.assign(sigma.begin(), sigma.begin() + k);
  return model;
}

double membership_score(const SubspaceModel& model, std::span<const double> f) {
  check_dim(model, f.size());
  const std::size_t d = model.dim();
  double total = 0.0;
  for (std::size_t j = 0; j < model.k; ++j) {
    double proj = 0.0;
    for (std::size_t i = 0; i < d; ++i) proj += (f[i] - model.mean[i]) * model.directions(i, j);
    total += weight(model, j) * proj * proj;
  }
  return total / static_cast<double>(model.k);
}

Vector score_batch(const SubspaceModel& model, const Matrix& embeddings, std::size_t threads) {
  check_dim(model, embeddings.cols());
  const std::size_t m = embeddings.rows();
  Vector out(m);
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(m, 1));
  if (threads == 1) {
    for (std::size_t r = 0; r < m; ++r) out[r] = membership_score(model, embeddings.row(r));
    return out;
  }
  std::vector<std::jthread> workers;
  const std::size_t chunk = (m + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(m, begin + chunk);
    if (begin >= end) break;
    workers.emplace_back([&, begin, end] {
      for (std::size_t r = begin; r < end; ++r) out[r] = membership_score(model, embeddings.row(r));
    });
  }
  return out;
}

double single_direction_score(const SubspaceModel& model, std::span<const double> f) {
  check_dim(model, f.size());
  double proj = 0.0;
  for (std::size_t i = 0; i < model.dim(); ++i) proj += (f[i] - model.mean[i]) * model.directions(i, 0);
  return proj * proj;
}

double layerwise_sum_score(std::span<const SubspaceModel> models,
                           std::span<const std::vector<double>> per_layer_f) {
  if (models.size() != per_layer_f.size()) {
    throw Error(ErrorKind::kShapeMismatch, "one embedding per layer model is required");
  }
  double total = 0.0;
  for (std::size_t l = 0; l < models.size(); ++l) total += membership_score(models[l], per_layer_f[l]);
  return total;
}

Vector layerwise_sum_batch(std::span<const SubspaceModel> models,
                           std::span<const Matrix> per_layer_embeddings) {
  if (models.size() != per_layer_embeddings.size() || models.empty()) {
    throw Error(ErrorKind::kShapeMismatch, "one embedding matrix per layer model is required");
  }
  const std::size_t m = per_layer_embeddings.front().rows();
  Vector total(m, 0.0);
  for (std::size_t l = 0; l < models.size(); ++l) {
    if (per_layer_embeddings[l].rows() != m) {
      throw Error(ErrorKind::kRowCountMismatch, "layers disagree on sample count");
    }
    const Vector s = score_batch(models[l], per_layer_embeddings[l]);
    for (std::size_t i = 0; i < m; ++i) total[i] += s[i];
  }
  return total;
}

MembershipPartition split_unlabeled(std::span<const double> scores, double threshold) {
  MembershipPartition p;
  p.scores.assign(scores.begin(), scores.end());
  p.threshold = threshold;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (scores[i] > threshold ? p.hallucinated_idx : p.truthful_idx).push_back(i);
  }
  return p;
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw Error(ErrorKind::kInvalidArgument, "percentile of empty set");
  if (!(p >= 0.0 && p <= 100.0)) throw Error(ErrorKind::kOutOfRange, "percentile outside [0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> default_threshold_percentiles() {
  std::vector<double> out;
  for (int p = 50; p <= 95; p += 5) out.push_back(p);
  return out;
}

ThresholdSelection select_threshold(std::span<const double> scores,
                                    std::span<const double> candidate_percentiles,
                                    const ThresholdObjective& objective) {
  std::vector<double> pcts(candidate_percentiles.begin(), candidate_percentiles.end());
  std::sort(pcts.begin(), pcts.end());
  pcts.erase(std::unique(pcts.begin(), pcts.end()), pcts.end());

  ThresholdSelection sel;
  bool found = false;
  for (double pct : pcts) {
    ThresholdCandidate c;
    c.percentile = pct;
    c.threshold = percentile(scores, pct);
    const MembershipPartition part = split_unlabeled(scores, c.threshold);
    c.feasible = !part.hallucinated_idx.empty() && !part.truthful_idx.empty();
    if (c.feasible) {
      c.value = objective(part);
      // Ascending scan with >= sends ties to the larger percentile.
      if (!std::isnan(c.value) && (!found || c.value >= sel.value)) {
        sel.threshold = c.threshold;
        sel.percentile = c.percentile;
        sel.value = c.value;
        found = true;
      }
    }
    sel.candidates.push_back(c);
  }
  if (!found) {
    throw Error(ErrorKind::kNoFeasibleThreshold,
                "every candidate threshold leaves one side of the partition empty");
  }
  return sel;
}

void save_subspace(const SubspaceModel& model, const std::filesystem::path& prefix) {
  const auto mean_path = with_suffix(prefix, ".mean.hse");
  const auto dir_path = with_suffix(prefix, ".directions.hse");
  const auto sigma_path = with_suffix(prefix, ".sigma.hse");
  write_tensor(Matrix(1, model.mean.size(), model.mean), mean_path);
  write_tensor(model.directions, dir_path);
  write_tensor(Matrix(1, model.singular_values.size(), model.singular_values), sigma_path);

  nlohmann::json j = {
      {"k", model.k},
      {"weighted", model.weighted},
      {"sign_convention_version", model.sign_convention_version},
      {"dim", model.dim()},
      {"mean_file", mean_path.filename().string()},
      {"directions_file", dir_path.filename().string()},
      {"singular_values_file", sigma_path.filename().string()},
  };
  std::ofstream out(with_suffix(prefix, ".json"), std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + prefix.string() + ".json");
  out << j.dump(2) << '\n';
}

SubspaceModel load_subspace(const std::filesystem::path& prefix) {
  const auto header_path = with_suffix(prefix, ".json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(header_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, header_path.string() + ": " + e.what());
  }
  const auto dir = header_path.parent_path();
  SubspaceModel model;
  model.k = j.at("k").get<std::size_t>();
  model.weighted = j.at("weighted").get<bool>();
  model.sign_convention_version = j.at("sign_convention_version").get<int>();
  if (model.sign_convention_version != kSignConventionVersion) {
    throw Error(ErrorKind::kVersionMismatch, "unsupported sign convention version");
  }
  const Matrix mean = read_matrix(dir / j.at("mean_file").get<std::string>());
  model.directions = read_matrix(dir / j.at("directions_file").get<std::string>());
  const Matrix sigma = read_matrix(dir / j.at("singular_values_file").get<std::string>());
  model.mean.assign(mean.data().begin(), mean.data().end());
  model.singular_values.assign(sigma.data().begin(), sigma.data().end());
  if (model.directions.rows() != model.mean.size() || model.directions.cols() != model.k ||
      model.singular_values.size() != model.k) {
    throw Error(ErrorKind::kShapeMismatch, "subspace tensors disagree with header in " +
                                               header_path.string());
  }
  return model;
}

}  // namespace haloscope
