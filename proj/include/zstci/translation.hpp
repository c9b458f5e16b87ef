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

// Prototype memory and zero-shot translation between adjacent tasks.
//
// After task t is learned, two residual maps are trained on task-t data only:
//   m~ = z~ + g_old(z~)   with z~ = F_{t-1}(x)   (previous network)
//   m  = z  + g_cur(z)    with z  = F_t(x)       (current network)
// The objective is an L1 alignment between m~ and m plus three weighted
// triplet terms against translated old prototypes. Old prototypes are then
// moved with g_old and the new classes' prototypes with g_cur, so the whole
// memory lives in the common space where queries (mapped through g_cur) are
// classified.

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zstci/autodiff.hpp"
#include "zstci/embedding.hpp"
#include "zstci/mlp.hpp"
#include "zstci/param_set.hpp"
#include "zstci/rng.hpp"
#include "zstci/task_stream.hpp"

namespace zstci {

struct PrototypeEntry {
  std::vector<double> vector;
  std::size_t origin_task = 0;

  bool operator==(const PrototypeEntry&) const = default;
};

// One entry per class seen so far. Iteration is in ascending class id; the
// insertion log keeps arrival order.
class PrototypeMemory {
 public:
  // Throws ProtocolError on a duplicate class and DimensionError when the
  // vector length differs from earlier entries.
  void insert(int class_id, std::vector<double> vector, std::size_t origin_task);

  bool contains(int class_id) const { return entries_.count(class_id) != 0; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t dim() const { return dim_; }

  const PrototypeEntry& at(int class_id) const;
  const std::map<int, PrototypeEntry>& entries() const { return entries_; }
  const std::vector<int>& insertion_log() const { return log_; }
  std::vector<int> classes() const;

  // Prototype vectors stacked in ascending class order.
  Tensor matrix() const;

  bool operator==(const PrototypeMemory& other) const {
    return entries_ == other.entries_ && log_ == other.log_;
  }

 private:
  std::map<int, PrototypeEntry> entries_;
  std::vector<int> log_;
  std::size_t dim_ = 0;
};

struct ClassPrototype {
  int class_id = 0;
  std::vector<double> vector;
};

// Per-class mean of the embedded train samples, in task.classes order. The
// mean is not re-normalized.
std::vector<ClassPrototype> compute_prototypes(const EmbeddingModel& model, const TaskDataset& task);

// How stored prototypes enter g_old at the next transition.
//   identify: stored vectors are fed to g_old directly.
//   invert:   stored vectors are first pulled back through the previous g_cur
//             residual map (fixed-point inverse), then fed to g_old.
enum class ChainMode { kIdentify, kInvert };
ChainMode parse_chain_mode(std::string_view name);
std::string to_string(ChainMode mode);

struct TransitionConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  double lr = 0.002;
  std::size_t hidden_dim = 1024;
  Activation activation = Activation::kRelu;
  double tri_weight = 1000.0;  // anchor: current translated features
  double beta = 100.0;         // anchor: previous-network translated features
  double delta = 100.0;        // anchor: translated old prototypes
  double align_weight = 1.0;
  double margin = 0.3;
  ChainMode chain = ChainMode::kIdentify;
  // Zero output layers make both maps start as the exact identity.
  bool zero_init = true;
};

void validate(const TransitionConfig& cfg);

struct TranslationPair {
  MlpArch arch;
  ParamSet old_map;
  ParamSet cur_map;

  // Both maps in one set, names prefixed "old." and "cur.".
  ParamSet joined() const;
  static TranslationPair split(const MlpArch& arch, const ParamSet& joined);
};

// embed_dim -> hidden -> embed_dim residual maps whose output layers start at
// zero, so both begin as the exact identity.
TranslationPair make_translation_pair(std::size_t embed_dim, const TransitionConfig& cfg, Rng& rng);

// v + g(v), row-wise.
Tensor translate(const ParamSet& g, const MlpArch& arch, const Tensor& v);
ad::Var translate(ad::Tape& t, std::span<const ad::Var> g, ad::Var v, const MlpArch& arch);

// Solves v + g(v) = y by fixed-point iteration.
Tensor inverse_translate(const ParamSet& g, const MlpArch& arch, const Tensor& y,
                         std::size_t max_iterations = 200, double tolerance = 1e-12);

// (1/n) sum_i || (z~_i + g_old(z~_i)) - (z_i + g_cur(z_i)) ||_1
double align_loss(const Tensor& old_feats, const Tensor& cur_feats, const TranslationPair& pair);
ad::Var align_loss(ad::Tape& t, ad::Var translated_old, ad::Var translated_cur);

// Weighted sum of three triplet terms in the common space:
//   tri_weight: anchor m_i, positive same-class m_j (j != i), negative the
//               prototype prototype_choice[i];
//   beta:       the same with m~ in place of m;
//   delta:      anchor prototype prototype_choice[i] with d+ = 0, negative
//               m_i, i.e. max(0, margin - d(u~, m_i)).
// Each term is a mean over its triplets. prototypes holds the translated old
// prototypes row-wise. Throws ProtocolError when there are no prototypes.
double unified_triplet_loss(const Tensor& translated_cur, const Tensor& translated_old,
                            std::span<const int> labels, const Tensor& prototypes,
                            std::span<const std::size_t> prototype_choice,
                            const TransitionConfig& cfg);
ad::Var unified_triplet_loss(ad::Tape& t, ad::Var translated_cur, ad::Var translated_old,
                             std::span<const int> labels, ad::Var prototypes,
                             std::span<const std::size_t> prototype_choice,
                             const TransitionConfig& cfg);

// Stored prototypes as g_old inputs under the configured chain mode.
Tensor prototype_inputs(const PrototypeMemory& memory, const TransitionConfig& cfg,
                        const TranslationPair* previous_pair);

// Trains (g_old, g_cur) with Adam on align_weight * L_align plus the unified
// triplet loss over minibatches of task.train. Both embedding networks stay
// frozen. Throws ProtocolError for the first task.
TranslationPair train_transition(const EmbeddingModel& prev_model, const EmbeddingModel& cur_model,
                                 const TaskDataset& task, const PrototypeMemory& memory,
                                 const TransitionConfig& cfg, Rng& rng,
                                 const TranslationPair* previous_pair = nullptr);

// Moves every stored prototype with g_old, inserts the new ones through g_cur
// and swaps the result into `memory` in one assignment.
void update_memory(PrototypeMemory& memory, const TranslationPair& pair,
                   std::span<const ClassPrototype> new_prototypes, std::size_t origin_task,
                   const TransitionConfig& cfg = {}, const TranslationPair* previous_pair = nullptr);

}  // namespace zstci
