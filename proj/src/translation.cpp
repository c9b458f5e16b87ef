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

#include "zstci/translation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zstci/adam.hpp"
#include "zstci/error.hpp"

namespace zstci {

void PrototypeMemory::insert(int class_id, std::vector<double> vector, std::size_t origin_task) {
  if (contains(class_id)) {
    throw ProtocolError("class " + std::to_string(class_id) + " is already in prototype memory");
  }
  if (vector.empty()) throw DimensionError("prototype vector is empty");
  if (!entries_.empty() && vector.size() != dim_) {
    throw DimensionError("prototype dimension " + std::to_string(vector.size()) +
                         " differs from memory dimension " + std::to_string(dim_));
  }
  for (double v : vector) {
    if (!std::isfinite(v)) throw NumericError("non-finite prototype for class " + std::to_string(class_id));
  }
  dim_ = vector.size();
  entries_.emplace(class_id, PrototypeEntry{std::move(vector), origin_task});
  log_.push_back(class_id);
}

const PrototypeEntry& PrototypeMemory::at(int class_id) const {
  auto it = entries_.find(class_id);
  if (it == entries_.end()) throw ProtocolError("class " + std::to_string(class_id) + " not in memory");
  return it->second;
}

std::vector<int> PrototypeMemory::classes() const {
  std::vector<int> out;
  out.reserve(entries_.size());
  for (const auto& [c, e] : entries_) out.push_back(c);
  return out;
}

Tensor PrototypeMemory::matrix() const {
  if (entries_.empty()) throw ProtocolError("prototype memory is empty");
  Tensor out = Tensor::matrix(entries_.size(), dim_);
  std::size_t r = 0;
  for (const auto& [c, e] : entries_) {
    std::copy(e.vector.begin(), e.vector.end(), out.row(r++).begin());
  }
  return out;
}

std::vector<ClassPrototype> compute_prototypes(const EmbeddingModel& model, const TaskDataset& task) {
  std::vector<ClassPrototype> out;
  if (task.train.size() == 0) throw DataError("task has no train samples");
  const Tensor z = embed(model, task.train.features);
  for (int c : task.classes) {
    const auto idx = task.train.indices_of(c);
    if (idx.empty()) throw DataError("class " + std::to_string(c) + " has no train samples");
    std::vector<double> mean(z.cols(), 0.0);
    for (std::size_t i : idx) {
      auto r = z.row(i);
      for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += r[k];
    }
    for (double& v : mean) v /= static_cast<double>(idx.size());
    out.push_back({c, std::move(mean)});
  }
  return out;
}

ChainMode parse_chain_mode(std::string_view name) {
  if (name == "identify") return ChainMode::kIdentify;
  if (name == "invert") return ChainMode::kInvert;
  throw ConfigError("unknown chain mode '" + std::string(name) + "'");
}

std::string to_string(ChainMode mode) { return mode == ChainMode::kIdentify ? "identify" : "invert"; }

void validate(const TransitionConfig& cfg) {
  if (cfg.tri_weight < 0 || cfg.beta < 0 || cfg.delta < 0 || cfg.align_weight < 0) {
    throw ConfigError("transition loss weights must be >= 0");
  }
  if (!(cfg.margin > 0.0)) throw ConfigError("transition margin must be > 0");
  if (!(cfg.lr > 0.0)) throw ConfigError("transition learning rate must be > 0");
  if (cfg.batch_size < 1) throw ConfigError("transition batch_size must be >= 1");
  if (cfg.hidden_dim < 1) throw ConfigError("transition hidden_dim must be >= 1");
}

ParamSet TranslationPair::joined() const {
  ParamSet out;
  for (std::size_t i = 0; i < old_map.size(); ++i) out.add("old." + old_map.name(i), old_map.tensor(i));
  for (std::size_t i = 0; i < cur_map.size(); ++i) out.add("cur." + cur_map.name(i), cur_map.tensor(i));
  return out;
}

TranslationPair TranslationPair::split(const MlpArch& arch, const ParamSet& joined) {
  TranslationPair pair{arch, joined.slice("old."), joined.slice("cur.")};
  check_mlp(pair.old_map, arch);
  check_mlp(pair.cur_map, arch);
  return pair;
}

TranslationPair make_translation_pair(std::size_t embed_dim, const TransitionConfig& cfg, Rng& rng) {
  const MlpArch arch{{embed_dim, cfg.hidden_dim, embed_dim}, cfg.activation};
  TranslationPair pair;
  pair.arch = arch;
  pair.old_map = init_mlp(arch, rng, cfg.zero_init);
  pair.cur_map = init_mlp(arch, rng, cfg.zero_init);
  return pair;
}

ad::Var translate(ad::Tape& t, std::span<const ad::Var> g, ad::Var v, const MlpArch& arch) {
  return ad::add(t, v, mlp_forward(t, g, v, arch));
}

Tensor translate(const ParamSet& g, const MlpArch& arch, const Tensor& v) {
  if (arch.input_dim() != arch.output_dim()) {
    throw DimensionError("residual map must preserve dimension");
  }
  check_mlp(g, arch);
  ad::Tape t;
  const auto vars = ad::place(t, g, /*trainable=*/false);
  return t.value(translate(t, vars, t.constant(v), arch));
}

Tensor inverse_translate(const ParamSet& g, const MlpArch& arch, const Tensor& y,
                         std::size_t max_iterations, double tolerance) {
  Tensor v = y;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const Tensor gv = mlp_forward(g, v, arch);
    double change = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double next = y[i] - gv[i];
      change = std::max(change, std::abs(next - v[i]));
      v[i] = next;
    }
    if (!v.all_finite()) throw NumericError("inverse_translate diverged");
    if (change <= tolerance) break;
  }
  return v;
}

ad::Var align_loss(ad::Tape& t, ad::Var translated_old, ad::Var translated_cur) {
  const double n = static_cast<double>(t.value(translated_old).rows());
  return ad::scale(t, ad::abs_sum(t, ad::sub(t, translated_old, translated_cur)), 1.0 / n);
}

double align_loss(const Tensor& old_feats, const Tensor& cur_feats, const TranslationPair& pair) {
  if (!old_feats.same_shape(cur_feats)) {
    throw ProtocolError("align_loss: feature batches differ in shape " +
                        shape_string(old_feats.shape()) + " vs " + shape_string(cur_feats.shape()));
  }
  ad::Tape t;
  const ad::Var m_old = t.constant(translate(pair.old_map, pair.arch, old_feats));
  const ad::Var m_cur = t.constant(translate(pair.cur_map, pair.arch, cur_feats));
  return t.value(align_loss(t, m_old, m_cur)).item();
}

ad::Var unified_triplet_loss(ad::Tape& t, ad::Var translated_cur, ad::Var translated_old,
                             std::span<const int> labels, ad::Var prototypes,
                             std::span<const std::size_t> prototype_choice,
                             const TransitionConfig& cfg) {
  const Tensor& P = t.value(prototypes);
  if (P.empty()) {
    throw ProtocolError("unified triplet loss needs old prototypes; skip translation for the first task");
  }
  const std::size_t n = labels.size();
  if (t.value(translated_cur).rows() != n || t.value(translated_old).rows() != n ||
      prototype_choice.size() != n) {
    throw DimensionError("unified_triplet_loss: batch, label and choice counts differ");
  }
  for (std::size_t c : prototype_choice) {
    if (c >= P.rows()) throw DimensionError("unified_triplet_loss: prototype choice out of range");
  }

  std::vector<Triplet> feature_triplets;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t p = 0; p < n; ++p) {
      if (p != a && labels[p] == labels[a]) feature_triplets.push_back({a, p, prototype_choice[a]});
    }
  }
  std::vector<Triplet> prototype_triplets;
  for (std::size_t i = 0; i < n; ++i) prototype_triplets.push_back({prototype_choice[i], 0, i});

  ad::Var total = t.constant(Tensor::scalar(0.0));
  auto add_term = [&](double weight, ad::Var term) {
    total = ad::add(t, total, ad::scale(t, term, weight));
  };
  if (cfg.tri_weight > 0.0) {
    const ad::Var pos = ad::pairwise_sq_dist(t, translated_cur, translated_cur);
    const ad::Var neg = ad::pairwise_sq_dist(t, translated_cur, prototypes);
    add_term(cfg.tri_weight, ad::triplet_hinge(t, pos, neg, feature_triplets, cfg.margin));
  }
  if (cfg.beta > 0.0) {
    const ad::Var pos = ad::pairwise_sq_dist(t, translated_old, translated_old);
    const ad::Var neg = ad::pairwise_sq_dist(t, translated_old, prototypes);
    add_term(cfg.beta, ad::triplet_hinge(t, pos, neg, feature_triplets, cfg.margin));
  }
  if (cfg.delta > 0.0) {
    const ad::Var neg = ad::pairwise_sq_dist(t, prototypes, translated_cur);
    add_term(cfg.delta, ad::triplet_hinge(t, std::nullopt, neg, prototype_triplets, cfg.margin));
  }
  return total;
}

double unified_triplet_loss(const Tensor& translated_cur, const Tensor& translated_old,
                            std::span<const int> labels, const Tensor& prototypes,
                            std::span<const std::size_t> prototype_choice,
                            const TransitionConfig& cfg) {
  ad::Tape t;
  return t
      .value(unified_triplet_loss(t, t.constant(translated_cur), t.constant(translated_old), labels,
                                  t.constant(prototypes), prototype_choice, cfg))
      .item();
}

Tensor prototype_inputs(const PrototypeMemory& memory, const TransitionConfig& cfg,
                        const TranslationPair* previous_pair) {
  Tensor stored = memory.matrix();
  if (cfg.chain == ChainMode::kInvert && previous_pair != nullptr) {
    return inverse_translate(previous_pair->cur_map, previous_pair->arch, stored);
  }
  return stored;
}

TranslationPair train_transition(const EmbeddingModel& prev_model, const EmbeddingModel& cur_model,
                                 const TaskDataset& task, const PrototypeMemory& memory,
                                 const TransitionConfig& cfg, Rng& rng,
                                 const TranslationPair* previous_pair) {
  validate(cfg);
  if (task.index == 0) throw ProtocolError("no transition exists before the first task");
  if (prev_model.embed_dim() != cur_model.embed_dim()) {
    throw ProtocolError("previous and current embedding dimensions differ");
  }
  const bool unified = cfg.tri_weight > 0.0 || cfg.beta > 0.0 || cfg.delta > 0.0;
  if (unified && memory.empty()) {
    throw ProtocolError("transition needs old prototypes in memory");
  }

  TranslationPair pair = make_translation_pair(cur_model.embed_dim(), cfg, rng);
  if (cfg.epochs == 0) return pair;

  const Tensor z_old = embed(prev_model, task.train.features);
  const Tensor z_cur = embed(cur_model, task.train.features);
  const Tensor protos = memory.empty() ? Tensor() : prototype_inputs(memory, cfg, previous_pair);
  const std::size_t num_layers = 2 * pair.arch.num_layers();

  ParamSet params = pair.joined();
  AdamState state = make_adam_state(params);
  const AdamConfig adam{cfg.lr};
  std::vector<std::size_t> order(task.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Tensor batch_old = gather_rows(z_old, idx);
      const Tensor batch_cur = gather_rows(z_cur, idx);
      std::vector<int> labels;
      for (std::size_t i : idx) labels.push_back(task.train.labels[i]);
      std::vector<std::size_t> choice(idx.size());
      if (unified) {
        for (auto& c : choice) c = static_cast<std::size_t>(rng.below(protos.rows()));
      }

      const ad::LossFn loss = [&](ad::Tape& t, std::span<const ad::Var> p) {
        const auto g_old = p.subspan(0, num_layers);
        const auto g_cur = p.subspan(num_layers, num_layers);
        const ad::Var m_old = translate(t, g_old, t.constant(batch_old), pair.arch);
        const ad::Var m_cur = translate(t, g_cur, t.constant(batch_cur), pair.arch);
        ad::Var total = ad::scale(t, align_loss(t, m_old, m_cur), cfg.align_weight);
        if (unified) {
          const ad::Var u = translate(t, g_old, t.constant(protos), pair.arch);
          total = ad::add(t, total, unified_triplet_loss(t, m_cur, m_old, labels, u, choice, cfg));
        }
        return total;
      };
      const GradRecord g = ad::grad(loss, params);
      adam_step(params, g, state, adam);
    }
  }
  return TranslationPair::split(pair.arch, params);
}

void update_memory(PrototypeMemory& memory, const TranslationPair& pair,
                   std::span<const ClassPrototype> new_prototypes, std::size_t origin_task,
                   const TransitionConfig& cfg, const TranslationPair* previous_pair) {
  for (const auto& p : new_prototypes) {
    if (memory.contains(p.class_id)) {
      throw ProtocolError("class " + std::to_string(p.class_id) + " is already in prototype memory");
    }
  }
  PrototypeMemory next;
  if (!memory.empty()) {
    const Tensor moved = translate(pair.old_map, pair.arch, prototype_inputs(memory, cfg, previous_pair));
    const std::vector<int> ordered = memory.classes();
    for (int c : memory.insertion_log()) {
      const auto r = static_cast<std::size_t>(
          std::lower_bound(ordered.begin(), ordered.end(), c) - ordered.begin());
      auto row = moved.row(r);
      next.insert(c, {row.begin(), row.end()}, memory.at(c).origin_task);
    }
  }
  if (!new_prototypes.empty()) {
    std::vector<std::vector<double>> rows;
    for (const auto& p : new_prototypes) rows.push_back(p.vector);
    const Tensor moved = translate(pair.cur_map, pair.arch, Tensor::from_rows(rows));
    for (std::size_t i = 0; i < new_prototypes.size(); ++i) {
      auto row = moved.row(i);
      next.insert(new_prototypes[i].class_id, {row.begin(), row.end()}, origin_task);
    }
  }
  memory = std::move(next);
}

}  // namespace zstci
