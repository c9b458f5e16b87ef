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

#include "zstci/embedding.hpp"

#include <algorithm>
#include <numeric>

#include <spdlog/spdlog.h>

#include "zstci/adam.hpp"
#include "zstci/error.hpp"
#include "zstci/regularizers.hpp"

namespace zstci {

EmbeddingModel make_embedding_model(const MlpArch& arch, bool normalize_output, Rng& rng) {
  return EmbeddingModel{init_mlp(arch, rng), arch, normalize_output};
}

ad::Var embed(ad::Tape& t, std::span<const ad::Var> params, ad::Var batch,
              const EmbeddingModel& model) {
  ad::Var z = mlp_forward(t, params, batch, model.arch);
  return model.normalize_output ? ad::normalize_rows(t, z) : z;
}

Tensor embed(const EmbeddingModel& model, const Tensor& batch) {
  check_mlp(model.params, model.arch);
  ad::Tape t;
  const auto vars = ad::place(t, model.params, /*trainable=*/false);
  return t.value(embed(t, vars, t.constant(batch), model));
}

MiningPolicy parse_mining_policy(std::string_view name) {
  if (name == "all-valid") return MiningPolicy::kAllValid;
  if (name == "random-per-anchor") return MiningPolicy::kRandomPerAnchor;
  throw ConfigError("unknown mining policy '" + std::string(name) + "'");
}

std::string to_string(MiningPolicy policy) {
  return policy == MiningPolicy::kAllValid ? "all-valid" : "random-per-anchor";
}

std::vector<Triplet> mine_triplets(std::span<const int> labels, MiningPolicy policy, Rng* rng) {
  std::vector<Triplet> out;
  const std::size_t n = labels.size();
  if (policy == MiningPolicy::kAllValid) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t p = 0; p < n; ++p) {
        if (p == a || labels[p] != labels[a]) continue;
        for (std::size_t q = 0; q < n; ++q) {
          if (labels[q] != labels[a]) out.push_back({a, p, q});
        }
      }
    }
    return out;
  }
  if (rng == nullptr) throw ProtocolError("random-per-anchor mining needs a generator");
  std::vector<std::size_t> positives, negatives;
  for (std::size_t a = 0; a < n; ++a) {
    positives.clear();
    negatives.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == a) continue;
      (labels[j] == labels[a] ? positives : negatives).push_back(j);
    }
    if (positives.empty() || negatives.empty()) continue;
    const std::size_t p = positives[rng->below(positives.size())];
    const std::size_t q = negatives[rng->below(negatives.size())];
    out.push_back({a, p, q});
  }
  return out;
}

ad::Var triplet_loss(ad::Tape& t, ad::Var embeddings, std::span<const Triplet> triplets,
                     double margin) {
  if (triplets.empty()) {
    spdlog::warn("triplet_loss: empty triplet list, loss is 0");
    return t.constant(Tensor::scalar(0.0));
  }
  const ad::Var d = ad::pairwise_sq_dist(t, embeddings, embeddings);
  return ad::triplet_hinge(t, d, d, triplets, margin);
}

double triplet_loss(const Tensor& embeddings, std::span<const Triplet> triplets, double margin) {
  if (!(margin > 0.0)) throw ConfigError("triplet margin must be positive");
  ad::Tape t;
  return t.value(triplet_loss(t, t.constant(embeddings), triplets, margin)).item();
}

Regularizer parse_regularizer(std::string_view name) {
  if (name == "none" || name == "ft") return Regularizer::kNone;
  if (name == "lwf") return Regularizer::kLwf;
  if (name == "ewc") return Regularizer::kEwc;
  if (name == "mas") return Regularizer::kMas;
  throw ConfigError("unknown regularizer '" + std::string(name) + "'");
}

std::string to_string(Regularizer reg) {
  switch (reg) {
    case Regularizer::kNone: return "none";
    case Regularizer::kLwf: return "lwf";
    case Regularizer::kEwc: return "ewc";
    case Regularizer::kMas: return "mas";
  }
  return "?";
}

void validate(const TrainConfig& cfg) {
  if (!(cfg.margin > 0.0)) throw ConfigError("embedding margin must be > 0");
  if (!(cfg.reg_weight >= 0.0)) throw ConfigError("regularizer weight must be >= 0");
  if (cfg.batch_size < 2) throw ConfigError("embedding batch_size must be >= 2");
  if (!(cfg.lr >= 0.0)) throw ConfigError("embedding learning rate must be >= 0");
}

EmbeddingModel train_task(EmbeddingModel model, const TaskDataset& task, const TrainConfig& cfg,
                          const EmbeddingModel* prev, const ImportanceMap* importance, Rng& rng) {
  validate(cfg);
  const bool needs_prev = cfg.regularizer != Regularizer::kNone;
  const bool needs_importance =
      cfg.regularizer == Regularizer::kEwc || cfg.regularizer == Regularizer::kMas;
  if (needs_prev && prev == nullptr) {
    throw ProtocolError(to_string(cfg.regularizer) + " regularizer needs the previous model");
  }
  if (needs_importance && importance == nullptr) {
    throw ProtocolError(to_string(cfg.regularizer) + " regularizer needs an importance map");
  }
  if (prev && !(prev->arch == model.arch && prev->params.same_layout(model.params))) {
    throw ProtocolError("previous model architecture differs from the current one");
  }
  if (task.train.size() == 0) throw DataError("task has no train samples");

  AdamState state = make_adam_state(model.params);
  const AdamConfig adam{cfg.lr};
  std::vector<std::size_t> order(task.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const LabeledSet batch = task.train.subset(idx);
      const auto triplets = mine_triplets(batch.labels, cfg.mining, &rng);
      if (triplets.empty()) continue;

      Tensor prev_z;
      if (cfg.regularizer == Regularizer::kLwf) prev_z = embed(*prev, batch.features);

      const ad::LossFn loss = [&](ad::Tape& t, std::span<const ad::Var> p) {
        const ad::Var z = embed(t, p, t.constant(batch.features), model);
        ad::Var total = triplet_loss(t, z, triplets, cfg.margin);
        if (cfg.regularizer == Regularizer::kNone) return total;
        const ad::Var penalty = cfg.regularizer == Regularizer::kLwf
                                    ? lwf_penalty(t, z, prev_z)
                                    : quadratic_penalty(t, p, prev->params, *importance);
        return ad::add(t, total, ad::scale(t, penalty, cfg.reg_weight));
      };
      const GradRecord g = ad::grad(loss, model.params);
      adam_step(model.params, g, state, adam);
    }
  }
  return model;
}

}  // namespace zstci
