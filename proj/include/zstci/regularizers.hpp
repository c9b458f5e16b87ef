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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "zstci/autodiff.hpp"
#include "zstci/embedding.hpp"
#include "zstci/param_set.hpp"
#include "zstci/rng.hpp"
#include "zstci/task_stream.hpp"

namespace zstci {

enum class ImportanceEstimator { kFisher, kMas };
std::string to_string(ImportanceEstimator e);
ImportanceEstimator parse_importance_estimator(std::string_view name);

// Non-negative weight per scalar parameter.
struct ImportanceMap {
  ParamSet weights;
  ImportanceEstimator estimator = ImportanceEstimator::kFisher;
};

// || Z_cur - Z_prev ||_F over one batch.
double lwf_penalty(const EmbeddingModel& cur, const EmbeddingModel& prev, const Tensor& batch);
// Tape form: gradients reach only the current embeddings.
ad::Var lwf_penalty(ad::Tape& t, ad::Var cur_embeddings, const Tensor& prev_embeddings);

// 0.5 * sum_p w_p (cur_p - prev_p)^2.
double quadratic_penalty(const ParamSet& cur, const ParamSet& prev, const ImportanceMap& importance);
ad::Var quadratic_penalty(ad::Tape& t, std::span<const ad::Var> cur, const ParamSet& prev,
                          const ImportanceMap& importance);

struct ImportanceConfig {
  // 0 means one batch holding the whole train split.
  std::size_t num_batches = 0;
  std::size_t batch_size = 32;
  double margin = 0.3;
  MiningPolicy mining = MiningPolicy::kAllValid;
};

// Diagonal Fisher: mean over batches of the squared triplet-loss gradient.
// Throws DataError when no sampled batch yields a triplet.
ImportanceMap estimate_fisher(const EmbeddingModel& model, const TaskDataset& task,
                              const ImportanceConfig& cfg, Rng& rng);

// MAS: mean over samples of |d ||F(x)||^2 / d theta|, taking F before the
// output normalization.
ImportanceMap estimate_mas(const EmbeddingModel& model, const TaskDataset& task,
                           const ImportanceConfig& cfg, Rng& rng);

// Elementwise sum of two maps with the same estimator and layout.
ImportanceMap accumulate(const ImportanceMap& a, const ImportanceMap& b);

}  // namespace zstci
