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

// Embedding network training with a triplet objective.
//
// The extractor is an MLP whose output is optionally L2-normalized per row.
// The triplet loss uses squared Euclidean distances between embeddings and
// averages max(0, d+ - d- + margin) over the mined triplets. A regularizer
// penalty (LwF / EWC / MAS) may be added with weight reg_weight.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zstci/autodiff.hpp"
#include "zstci/mlp.hpp"
#include "zstci/param_set.hpp"
#include "zstci/rng.hpp"
#include "zstci/task_stream.hpp"
#include "zstci/triplet.hpp"

namespace zstci {

struct ImportanceMap;

struct EmbeddingModel {
  ParamSet params;
  MlpArch arch;
  bool normalize_output = true;

  std::size_t input_dim() const { return arch.input_dim(); }
  std::size_t embed_dim() const { return arch.output_dim(); }
};

EmbeddingModel make_embedding_model(const MlpArch& arch, bool normalize_output, Rng& rng);

// z = F(x) for a batch of rows, unit-normalized when the model says so.
Tensor embed(const EmbeddingModel& model, const Tensor& batch);
ad::Var embed(ad::Tape& t, std::span<const ad::Var> params, ad::Var batch,
              const EmbeddingModel& model);

enum class MiningPolicy { kAllValid, kRandomPerAnchor };
MiningPolicy parse_mining_policy(std::string_view name);
std::string to_string(MiningPolicy policy);

// all-valid: every (a, p, n) with label[a] == label[p], a != p and
// label[n] != label[a], ordered by anchor, then positive, then negative.
// random-per-anchor: for each anchor with at least one positive and one
// negative, one uniformly drawn positive and one uniformly drawn negative.
std::vector<Triplet> mine_triplets(std::span<const int> labels, MiningPolicy policy,
                                   Rng* rng = nullptr);

// Mean over triplets of max(0, d+ - d- + margin) with squared Euclidean d.
// Returns 0 (and logs a warning) for an empty triplet list.
double triplet_loss(const Tensor& embeddings, std::span<const Triplet> triplets, double margin);
ad::Var triplet_loss(ad::Tape& t, ad::Var embeddings, std::span<const Triplet> triplets,
                     double margin);

enum class Regularizer { kNone, kLwf, kEwc, kMas };
Regularizer parse_regularizer(std::string_view name);
std::string to_string(Regularizer reg);

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  double margin = 0.3;
  Regularizer regularizer = Regularizer::kNone;
  double reg_weight = 0.0;
  MiningPolicy mining = MiningPolicy::kAllValid;
};

void validate(const TrainConfig& cfg);

// Adam over seeded shuffled minibatches of task.train for cfg.epochs. The loss
// per batch is triplet_loss + reg_weight * penalty. LwF needs prev; EWC and
// MAS need prev and importance. Batches without a valid triplet are skipped.
EmbeddingModel train_task(EmbeddingModel model, const TaskDataset& task, const TrainConfig& cfg,
                          const EmbeddingModel* prev, const ImportanceMap* importance, Rng& rng);

}  // namespace zstci
