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

#include "haloscope/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "haloscope/error.hpp"
#include "haloscope/rng.hpp"
#include "haloscope/tensor_io.hpp"
#include "json.hpp"

namespace haloscope {
namespace {

double sigmoid(double g) {
  if (g >= 0.0) return 1.0 / (1.0 + std::exp(-g));
  const double e = std::exp(g);
  return e / (1.0 + e);
}

// log(1 + e^g) without overflow.
double softplus(double g) { return std::max(g, 0.0) + std::log1p(std::exp(-std::abs(g))); }

MlpParams zeros_like(const MlpParams& p) {
  return MlpParams{Matrix(p.hidden(), p.dim()), Vector(p.hidden(), 0.0), Matrix(1, p.hidden()), 0.0};
}

// Adds the per-sample gradients of rows[...] into grad (unnormalized) and
// returns the summed weighted loss. hidden_buf must hold hidden() doubles.
double accumulate(const MlpParams& p, const Matrix& x, std::span<const std::size_t> rows,
                  std::span<const int> labels, std::span<const double> weights, MlpParams& grad,
                  std::vector<double>& hidden_buf) {
  const std::size_t hidden = p.hidden();
  const std::size_t d = p.dim();
  double loss_sum = 0.0;
  for (std::size_t idx : rows) {
    auto f = x.row(idx);
    double g = p.b2;
    for (std::size_t h = 0; h < hidden; ++h) {
      const double* w = p.w1.row(h).data();
      double a = p.b1[h];
      for (std::size_t i = 0; i < d; ++i) a += w[i] * f[i];
      hidden_buf[h] = a;
      if (a > 0.0) g += p.w2(0, h) * a;
    }
    const double y = labels[idx];
    const double sw = weights.empty() ? 1.0 : weights[idx];
    loss_sum += sw * (softplus(g) - y * g);
    const double dg = sw * (sigmoid(g) - y);

    grad.b2 += dg;
    for (std::size_t h = 0; h < hidden; ++h) {
      const double a = hidden_buf[h];
      if (a <= 0.0) continue;
      grad.w2(0, h) += dg * a;
      const double da = dg * p.w2(0, h);
      grad.b1[h] += da;
      double* gw = grad.w1.row(h).data();
      for (std::size_t i = 0; i < d; ++i) gw[i] += da * f[i];
    }
  }
  return loss_sum;
}

void scale_and_decay(MlpParams& grad, const MlpParams& p, double scale, double weight_decay) {
  auto gw1 = grad.w1.data();
  auto pw1 = p.w1.data();
  for (std::size_t i = 0; i < gw1.size(); ++i) gw1[i] = gw1[i] * scale + weight_decay * pw1[i];
  for (std::size_t h = 0; h < grad.b1.size(); ++h) {
    grad.b1[h] = grad.b1[h] * scale + weight_decay * p.b1[h];
    grad.w2(0, h) = grad.w2(0, h) * scale + weight_decay * p.w2(0, h);
  }
  grad.b2 = grad.b2 * scale + weight_decay * p.b2;
}

double squared_norm(const MlpParams& p) {
  const auto flat = flatten(p);
  return dot(flat, flat);
}

void check_labels(const Matrix& x, std::span<const int> labels) {
  if (labels.size() != x.rows()) {
    throw Error(ErrorKind::kShapeMismatch, std::to_string(labels.size()) + " labels for " +
                                               std::to_string(x.rows()) + " samples");
  }
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorKind::kInvalidArgument, "labels must be 0 or 1");
    pos += static_cast<std::size_t>(y);
  }
  if (pos == 0 || pos == labels.size()) {
    throw Error(ErrorKind::kEmptyClass, "training needs both classes; got " + std::to_string(pos) +
                                            " positives of " + std::to_string(labels.size()));
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

std::size_t param_count(const MlpParams& p) { return p.hidden() * p.dim() + 2 * p.hidden() + 1; }

std::vector<double> flatten(const MlpParams& p) {
  std::vector<double> out;
  out.reserve(param_count(p));
  out.insert(out.end(), p.w1.data().begin(), p.w1.data().end());
  out.insert(out.end(), p.b1.begin(), p.b1.end());
  out.insert(out.end(), p.w2.data().begin(), p.w2.data().end());
  out.push_back(p.b2);
  return out;
}

MlpParams unflatten(std::span<const double> flat, std::size_t d, std::size_t hidden) {
  if (flat.size() != hidden * d + 2 * hidden + 1) {
    throw Error(ErrorKind::kShapeMismatch, "flat parameter vector has wrong length");
  }
  MlpParams p{Matrix(hidden, d), Vector(hidden), Matrix(1, hidden), 0.0};
  auto it = flat.begin();
  std::copy_n(it, hidden * d, p.w1.data().begin());
  it += static_cast<std::ptrdiff_t>(hidden * d);
  std::copy_n(it, hidden, p.b1.begin());
  it += static_cast<std::ptrdiff_t>(hidden);
  std::copy_n(it, hidden, p.w2.data().begin());
  it += static_cast<std::ptrdiff_t>(hidden);
  p.b2 = *it;
  return p;
}

void validate(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw Error(ErrorKind::kInvalidArgument, "epochs must be >= 1");
  if (cfg.batch_size < 1) throw Error(ErrorKind::kInvalidArgument, "batch_size must be >= 1");
  if (cfg.hidden < 1) throw Error(ErrorKind::kInvalidArgument, "hidden must be >= 1");
  if (!(cfg.lr0 > 0.0)) throw Error(ErrorKind::kInvalidArgument, "lr0 must be > 0");
  if (!(cfg.weight_decay >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "weight_decay must be >= 0");
}

std::string config_hash(const TrainConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "hidden=" << cfg.hidden << ";epochs=" << cfg.epochs << ";lr0=" << cfg.lr0
     << ";batch=" << cfg.batch_size << ";wd=" << cfg.weight_decay << ";seed=" << cfg.seed
     << ";reweight=" << cfg.reweight_classes << ";optimizer=sgd;schedule=cosine";
  std::ostringstream hex;
  hex << std::hex << fnv1a(os.str());
  return hex.str();
}

double cosine_lr(double lr0, std::size_t step, std::size_t total_steps) {
  if (total_steps == 0) return lr0;
  const double t = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr0 * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

MlpParams init_params(std::size_t d, std::size_t hidden, std::uint64_t seed) {
  if (d == 0 || hidden == 0) throw Error(ErrorKind::kInvalidArgument, "d and hidden must be >= 1");
  std::mt19937_64 rng(derive_seed(seed, "init"));
  MlpParams p{Matrix(hidden, d), Vector(hidden, 0.0), Matrix(1, hidden), 0.0};
  const double b1 = 1.0 / std::sqrt(static_cast<double>(d));
  std::uniform_real_distribution<double> u1(-b1, b1);
  for (double& w : p.w1.data()) w = u1(rng);
  const double b2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> u2(-b2, b2);
  for (double& w : p.w2.data()) w = u2(rng);
  return p;
}

double forward(const MlpParams& p, std::span<const double> f) {
  if (f.size() != p.dim()) {
    throw Error(ErrorKind::kShapeMismatch, "input dimension " + std::to_string(f.size()) +
                                               ", classifier expects " + std::to_string(p.dim()));
  }
  double g = p.b2;
  for (std::size_t h = 0; h < p.hidden(); ++h) {
    const double a = p.b1[h] + dot(p.w1.row(h), f);
    if (a > 0.0) g += p.w2(0, h) * a;
  }
  return g;
}

Vector forward_batch(const MlpParams& p, const Matrix& x) {
  Vector out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = forward(p, x.row(r));
  return out;
}

LossAndGradient loss_and_gradient(const MlpParams& p, const Matrix& x, std::span<const int> labels,
                                  std::span<const double> sample_weights, double weight_decay) {
  if (x.cols() != p.dim() || labels.size() != x.rows() ||
      (!sample_weights.empty() && sample_weights.size() != x.rows())) {
    throw Error(ErrorKind::kShapeMismatch, "loss_and_gradient inputs disagree in shape");
  }
  LossAndGradient out{0.0, zeros_like(p)};
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<double> buf(p.hidden());
  const double n = static_cast<double>(x.rows());
  const double loss_sum = accumulate(p, x, rows, labels, sample_weights, out.gradient, buf);
  scale_and_decay(out.gradient, p, 1.0 / n, weight_decay);
  out.loss = loss_sum / n + 0.5 * weight_decay * squared_norm(p);
  return out;
}

TrainResult train_supervised(const Matrix& x, std::span<const int> labels, const TrainConfig& cfg) {
  validate(cfg);
  check_labels(x, labels);

  const std::size_t n = x.rows();
  std::vector<double> weights;
  if (cfg.reweight_classes) {
    const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    const double neg = static_cast<double>(n) - pos;
    weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      weights[i] = static_cast<double>(n) / (2.0 * (labels[i] == 1 ? pos : neg));
    }
  }

  TrainResult result{init_params(x.cols(), cfg.hidden, cfg.seed), {}};
  MlpParams& p = result.params;
  MlpParams grad = zeros_like(p);
  std::vector<double> buf(p.hidden());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, "shuffle"));

  const std::size_t batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = cfg.epochs * batches;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches; ++b, ++step) {
      const std::size_t begin = b * cfg.batch_size;
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      std::span<const std::size_t> rows(order.data() + begin, end - begin);
      const double lr = cosine_lr(cfg.lr0, step, total_steps);

      grad = zeros_like(p);
      const double batch_loss = accumulate(p, x, rows, labels, weights, grad, buf);
      if (!std::isfinite(batch_loss)) {
        throw Error(ErrorKind::kTrainingDiverged,
                    "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(b) + ", lr " + std::to_string(lr));
      }
      epoch_loss += batch_loss;
      scale_and_decay(grad, p, 1.0 / static_cast<double>(rows.size()), cfg.weight_decay);

      auto pw = p.w1.data();
      auto gw = grad.w1.data();
      for (std::size_t i = 0; i < pw.size(); ++i) pw[i] -= lr * gw[i];
      for (std::size_t h = 0; h < p.hidden(); ++h) {
        p.b1[h] -= lr * grad.b1[h];
        p.w2(0, h) -= lr * grad.w2(0, h);
      }
      p.b2 -= lr * grad.b2;
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

std::vector<int> partition_labels(const MembershipPartition& partition) {
  std::vector<int> labels(partition.scores.size(), 1);
  for (std::size_t i : partition.hallucinated_idx) labels[i] = 0;
  return labels;
}

TrainResult train(const Matrix& x, const MembershipPartition& partition, const TrainConfig& cfg) {
  if (partition.scores.size() != x.rows()) {
    throw Error(ErrorKind::kShapeMismatch, "partition does not match embedding rows");
  }
  if (partition.hallucinated_idx.empty() || partition.truthful_idx.empty()) {
    throw Error(ErrorKind::kEmptyClass, "partition has an empty side (|H|=" +
                                            std::to_string(partition.hallucinated_idx.size()) +
                                            ", |T|=" +
                                            std::to_string(partition.truthful_idx.size()) + ")");
  }
  const auto labels = partition_labels(partition);
  return train_supervised(x, labels, cfg);
}

double logistic(double g) {
  constexpr double kLow = std::numeric_limits<double>::denorm_min();
  const double kHigh = std::nextafter(1.0, 0.0);
  return std::clamp(sigmoid(g), kLow, kHigh);
}

double truthfulness_score(const MlpParams& p, std::span<const double> f) {
  return logistic(forward(p, f));
}

Vector truthfulness_scores(const MlpParams& p, const Matrix& x) {
  Vector out = forward_batch(p, x);
  for (double& v : out) v = logistic(v);
  return out;
}

int detect(const MlpParams& p, std::span<const double> f, const DetectorConfig& cfg) {
  if (!(cfg.lambda > 0.0 && cfg.lambda < 1.0)) {
    throw Error(ErrorKind::kOutOfRange, "lambda must lie in (0, 1)");
  }
  return truthfulness_score(p, f) >= cfg.lambda ? 1 : 0;
}

void save_classifier(const MlpParams& p, const ClassifierMetadata& meta,
                     const std::filesystem::path& prefix) {
  const auto w1 = with_suffix(prefix, ".w1.hse");
  const auto b1 = with_suffix(prefix, ".b1.hse");
  const auto w2 = with_suffix(prefix, ".w2.hse");
  const auto b2 = with_suffix(prefix, ".b2.hse");
  write_tensor(p.w1, w1);
  write_tensor(Matrix(1, p.hidden(), p.b1), b1);
  write_tensor(p.w2, w2);
  write_tensor(Matrix(1, 1, {p.b2}), b2);
  nlohmann::json j = {
      {"d", p.dim()},
      {"hidden", p.hidden()},
      {"seed", meta.seed},
      {"config_hash", meta.config_hash},
      {"w1_file", w1.filename().string()},
      {"b1_file", b1.filename().string()},
      {"w2_file", w2.filename().string()},
      {"b2_file", b2.filename().string()},
  };
  std::ofstream out(with_suffix(prefix, ".json"), std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + prefix.string() + ".json");
  out << j.dump(2) << '\n';
}

MlpParams load_classifier(const std::filesystem::path& prefix, ClassifierMetadata* meta) {
  const auto header = with_suffix(prefix, ".json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(header));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, header.string() + ": " + e.what());
  }
  const auto dir = header.parent_path();
  const auto d = j.at("d").get<std::size_t>();
  const auto hidden = j.at("hidden").get<std::size_t>();
  MlpParams p;
  p.w1 = read_matrix(dir / j.at("w1_file").get<std::string>());
  const Matrix b1 = read_matrix(dir / j.at("b1_file").get<std::string>());
  p.w2 = read_matrix(dir / j.at("w2_file").get<std::string>());
  const Matrix b2 = read_matrix(dir / j.at("b2_file").get<std::string>());
  if (p.w1.rows() != hidden || p.w1.cols() != d || b1.rows() * b1.cols() != hidden ||
      p.w2.rows() != 1 || p.w2.cols() != hidden || b2.rows() * b2.cols() != 1) {
    throw Error(ErrorKind::kShapeMismatch, "classifier tensors disagree with " + header.string());
  }
  p.b1.assign(b1.data().begin(), b1.data().end());
  p.b2 = b2(0, 0);
  if (meta) {
    meta->seed = j.at("seed").get<std::uint64_t>();
    meta->config_hash = j.at("config_hash").get<std::string>();
  }
  return p;
}

}  // namespace haloscope
