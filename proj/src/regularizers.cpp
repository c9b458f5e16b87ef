// Copyright 2026 The ZSTCI Lab Authors. All Rights Reserved.
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

#include "zstci/regularizers.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "zstci/error.hpp"

namespace zstci {

std::string to_string(ImportanceEstimator e) {
  return e == ImportanceEstimator::kFisher ? "fisher" : "mas";
}

ImportanceEstimator parse_importance_estimator(std::string_view name) {
  if (name == "fisher") return ImportanceEstimator::kFisher;
  if (name == "mas") return ImportanceEstimator::kMas;
  throw FormatError("unknown importance estimator '" + std::string(name) + "'");
}

ad::Var lwf_penalty(ad::Tape& t, ad::Var cur_embeddings, const Tensor& prev_embeddings) {
  return ad::frobenius_norm(t, ad::sub(t, cur_embeddings, t.constant(prev_embeddings)));
}

double lwf_penalty(const EmbeddingModel& cur, const EmbeddingModel& prev, const Tensor& batch) {
  if (!(cur.arch == prev.arch) || !cur.params.same_layout(prev.params) ||
      cur.normalize_output != prev.normalize_output) {
    throw ProtocolError("lwf_penalty: models do not share an architecture");
  }
  ad::Tape t;
  const Tensor z_prev = embed(prev, batch);
  return t.value(lwf_penalty(t, t.constant(embed(cur, batch)), z_prev)).item();
}

namespace {

void check_triple(const ParamSet& cur, const ParamSet& prev, const ImportanceMap& importance) {
  if (!cur.same_layout(prev) || !cur.same_layout(importance.weights)) {
    throw ProtocolError("quadratic_penalty: parameter, snapshot and importance layouts differ");
  }
}

}  // namespace

double quadratic_penalty(const ParamSet& cur, const ParamSet& prev, const ImportanceMap& importance) {
  check_triple(cur, prev, importance);
  double s = 0.0;
  for (std::size_t i = 0; i < cur.size(); ++i) {
    const auto a = cur.tensor(i).data();
    const auto b = prev.tensor(i).data();
    const auto w = importance.weights.tensor(i).data();
    for (std::size_t j = 0; j < a.size(); ++j) s += w[j] * (a[j] - b[j]) * (a[j] - b[j]);
  }
  return 0.5 * s;
}

ad::Var quadratic_penalty(ad::Tape& t, std::span<const ad::Var> cur, const ParamSet& prev,
                          const ImportanceMap& importance) {
  if (cur.size() != prev.size() || !prev.same_layout(importance.weights)) {
    throw ProtocolError("quadratic_penalty: parameter, snapshot and importance layouts differ");
  }
  ad::Var total = ad::weighted_sq_diff(t, cur[0], prev.tensor(0), importance.weights.tensor(0));
  for (std::size_t i = 1; i < cur.size(); ++i) {
    total = ad::add(t, total,
                    ad::weighted_sq_diff(t, cur[i], prev.tensor(i), importance.weights.tensor(i)));
  }
  return total;
}

namespace {

// Index batches drawn from a seeded permutation, reshuffling on wrap-around.
std::vector<std::vector<std::size_t>> sample_batches(std::size_t n, const ImportanceConfig& cfg,
                                                     Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (cfg.num_batches == 0) return {order};
  if (cfg.batch_size == 0) throw ConfigError("importance batch_size must be >= 1");
  std::vector<std::vector<std::size_t>> batches;
  std::size_t pos = n;
  for (std::size_t b = 0; b < cfg.num_batches; ++b) {
    std::vector<std::size_t> batch;
    while (batch.size() < std::min(cfg.batch_size, n)) {
      if (pos == n) {
        rng.shuffle(std::span<std::size_t>(order));
        pos = 0;
      }
      batch.push_back(order[pos++]);
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

void add_transformed(ParamSet& acc, const ParamSet& grads, bool square) {
  for (std::size_t i = 0; i < acc.size(); ++i) {
    auto dst = acc.values(i);
    const auto src = grads.tensor(i).data();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += square ? src[j] * src[j] : std::abs(src[j]);
  }
}

void divide(ParamSet& acc, double n) {
  for (std::size_t i = 0; i < acc.size(); ++i) {
    for (double& v : acc.values(i)) v /= n;
  }
}

}  // namespace

ImportanceMap estimate_fisher(const EmbeddingModel& model, const TaskDataset& task,
                              const ImportanceConfig& cfg, Rng& rng) {
  ImportanceMap out{model.params.zeros_like(), ImportanceEstimator::kFisher};
  std::size_t used = 0;
  for (const auto& idx : sample_batches(task.train.size(), cfg, rng)) {
    const LabeledSet batch = task.train.subset(idx);
    const auto triplets = mine_triplets(batch.labels, cfg.mining, &rng);
    if (triplets.empty()) continue;
    const ad::LossFn loss = [&](ad::Tape& t, std::span<const ad::Var> p) {
      return triplet_loss(t, embed(t, p, t.constant(batch.features), model), triplets, cfg.margin);
    };
    add_transformed(out.weights, ad::grad(loss, model.params).grads, /*square=*/true);
    ++used;
  }
  if (used == 0) throw DataError("Fisher estimation found no valid triplet in the task data");
  divide(out.weights, static_cast<double>(used));
  return out;
}

ImportanceMap estimate_mas(const EmbeddingModel& model, const TaskDataset& task,
                           const ImportanceConfig& cfg, Rng& rng) {
  ImportanceMap out{model.params.zeros_like(), ImportanceEstimator::kMas};
  EmbeddingModel raw = model;
  raw.normalize_output = false;
  std::size_t used = 0;
  for (const auto& idx : sample_batches(task.train.size(), cfg, rng)) {
    for (std::size_t i : idx) {
      const Tensor x({1, task.train.features.cols()},
                     std::vector<double>(task.train.features.row(i).begin(),
                                         task.train.features.row(i).end()));
      const ad::LossFn loss = [&](ad::Tape& t, std::span<const ad::Var> p) {
        return ad::sum_squares(t, embed(t, p, t.constant(x), raw));
      };
      add_transformed(out.weights, ad::grad(loss, model.params).grads, /*square=*/false);
      ++used;
    }
  }
  if (used == 0) throw DataError("MAS estimation found no samples in the task data");
  divide(out.weights, static_cast<double>(used));
  return out;
}

ImportanceMap accumulate(const ImportanceMap& a, const ImportanceMap& b) {
  if (a.estimator != b.estimator || !a.weights.same_layout(b.weights)) {
    throw ProtocolError("cannot accumulate importance maps of different kinds or layouts");
  }
  ImportanceMap out = a;
  for (std::size_t i = 0; i < out.weights.size(); ++i) {
    auto dst = out.weights.values(i);
    const auto src = b.weights.tensor(i).data();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
  return out;
}

}  // namespace zstci
