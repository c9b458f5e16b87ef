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

#include <cmath>

#include "doctest.h"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "zstci/error.hpp"
#include "zstci/translation.hpp"

using namespace zstci;
using zstci::testing::random_tensor;

namespace {

TranslationPair random_pair(std::size_t dim, std::size_t hidden, Rng& rng, double scale = 0.3) {
  const MlpArch arch{{dim, hidden, dim}, Activation::kTanh};
  TranslationPair p{arch, init_mlp(arch, rng), init_mlp(arch, rng)};
  for (ParamSet* g : {&p.old_map, &p.cur_map})
    for (std::size_t i = 0; i < g->size(); ++i)
      for (double& v : g->values(i)) v *= scale;
  return p;
}

Tensor col(std::initializer_list<double> v) {
  std::vector<std::vector<double>> rows;
  for (double x : v) rows.push_back({x});
  return Tensor::from_rows(rows);
}

TransitionConfig small_transition() {
  TransitionConfig cfg;
  cfg.hidden_dim = 16;
  cfg.epochs = 20;
  cfg.batch_size = 16;
  cfg.lr = 0.01;
  return cfg;
}

struct TwoTasks {
  TaskStream stream;
  EmbeddingModel prev;
  EmbeddingModel cur;
};

TwoTasks drifted_models() {
  SyntheticStreamConfig sc;
  sc.num_tasks = 2;
  sc.classes_per_task = 3;
  sc.samples_per_class = 15;
  sc.input_dim = 6;
  sc.seed = 41;
  TwoTasks out{make_synthetic_stream(sc), {}, {}};
  Rng init(1);
  const EmbeddingModel m0 = make_embedding_model(MlpArch{{6, 16, 4}, Activation::kTanh}, false, init);
  TrainConfig tc;
  tc.epochs = 10;
  tc.batch_size = 12;
  tc.lr = 0.01;
  Rng r0(2), r1(3);
  out.prev = train_task(m0, out.stream.tasks[0], tc, nullptr, nullptr, r0);
  out.cur = train_task(out.prev, out.stream.tasks[1], tc, nullptr, nullptr, r1);
  return out;
}

}  // namespace

TEST_CASE("prototype memory bookkeeping") {
  PrototypeMemory m;
  CHECK(m.empty());
  CHECK_THROWS_AS(m.matrix(), ProtocolError);
  m.insert(7, {1.0, 2.0}, 0);
  m.insert(3, {3.0, 4.0}, 1);
  CHECK(m.size() == 2);
  CHECK(m.dim() == 2);
  CHECK(m.classes() == std::vector<int>{3, 7});
  CHECK(m.insertion_log() == std::vector<int>{7, 3});
  CHECK(m.matrix() == Tensor::from_rows({{3.0, 4.0}, {1.0, 2.0}}));
  CHECK(m.at(3).origin_task == 1);
  CHECK_THROWS_AS(m.insert(7, {0.0, 0.0}, 2), ProtocolError);
  CHECK_THROWS_AS(m.insert(9, {0.0}, 2), DimensionError);
  CHECK_THROWS_AS(m.insert(9, {NAN, 0.0}, 2), NumericError);
  CHECK_THROWS_AS(m.at(42), ProtocolError);
}

TEST_CASE("prototypes: single sample, symmetric pair, loop oracle") {
  Rng rng(1);
  EmbeddingModel id = make_embedding_model(MlpArch{{2, 2}, Activation::kIdentity}, false, rng);
  id.params.assign(0, Tensor::from_rows({{1, 0}, {0, 1}}));
  id.params.assign(1, Tensor({2}, {0.0, 0.0}));

  TaskDataset t;
  t.classes = {4, 9};
  t.train.features = Tensor::from_rows({{0.5, -1.0}, {1.0, 2.0}, {-1.0, -2.0}});
  t.train.labels = {4, 9, 9};
  const auto p = compute_prototypes(id, t);
  REQUIRE(p.size() == 2);
  CHECK(p[0].class_id == 4);
  CHECK(p[0].vector == std::vector<double>{0.5, -1.0});
  CHECK(p[1].vector == std::vector<double>{0.0, 0.0});

  for (int trial = 0; trial < 20; ++trial) {
    const EmbeddingModel m = make_embedding_model(MlpArch{{3, 5, 2}, Activation::kRelu}, trial % 2 == 0, rng);
    TaskDataset task;
    task.classes = {0, 1, 2};
    task.train.features = random_tensor({12, 3}, rng);
    for (std::size_t i = 0; i < 12; ++i) task.train.labels.push_back(static_cast<int>(i % 3));
    const Tensor z = embed(m, task.train.features);
    zstci::testing::Matrix rows;
    for (std::size_t r = 0; r < z.rows(); ++r) rows.emplace_back(z.row(r).begin(), z.row(r).end());
    const auto oracle = zstci::testing::oracle_class_means(rows, task.train.labels);
    for (const auto& cp : compute_prototypes(m, task)) {
      for (std::size_t k = 0; k < cp.vector.size(); ++k)
        CHECK(cp.vector[k] == doctest::Approx(oracle.at(cp.class_id)[k]).epsilon(1e-14));
    }
  }
  t.classes.push_back(11);
  CHECK_THROWS_AS(compute_prototypes(id, t), DataError);
}

TEST_CASE("translate: zero output layer is the identity") {
  Rng rng(2);
  TransitionConfig cfg;
  cfg.hidden_dim = 8;
  const TranslationPair p = make_translation_pair(3, cfg, rng);
  const Tensor v = random_tensor({4, 3}, rng);
  CHECK(translate(p.old_map, p.arch, v) == v);
  CHECK(translate(p.cur_map, p.arch, v) == v);
  CHECK_FALSE(p.old_map == p.cur_map);  // hidden layers are drawn separately
}

TEST_CASE("translate: g(v) = -v cancels the input") {
  const MlpArch arch{{2, 2, 2}, Activation::kIdentity};
  ParamSet g;
  g.add("0.weight", Tensor::from_rows({{1, 0}, {0, 1}}));
  g.add("0.bias", Tensor({2}));
  g.add("1.weight", Tensor::from_rows({{-1, 0}, {0, -1}}));
  g.add("1.bias", Tensor({2}));
  const Tensor out = translate(g, arch, Tensor::from_rows({{0.3, -2.0}, {5.0, 1.5}}));
  for (double v : out.data()) CHECK(v == 0.0);
}

TEST_CASE("translate equals mlp_forward plus the input") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const TranslationPair p = random_pair(3, 5, rng, 1.0);
    const Tensor v = random_tensor({4, 3}, rng);
    const Tensor f = mlp_forward(p.old_map, v, p.arch);
    const Tensor out = translate(p.old_map, p.arch, v);
    for (std::size_t k = 0; k < v.size(); ++k) CHECK(out[k] == doctest::Approx(f[k] + v[k]).epsilon(1e-15));
  }
}

TEST_CASE("inverse_translate undoes a contractive residual") {
  Rng rng(4);
  const TranslationPair p = random_pair(3, 5, rng, 0.2);
  const Tensor y = random_tensor({6, 3}, rng);
  const Tensor v = inverse_translate(p.cur_map, p.arch, y);
  const Tensor back = translate(p.cur_map, p.arch, v);
  for (std::size_t k = 0; k < y.size(); ++k) CHECK(back[k] == doctest::Approx(y[k]).epsilon(1e-10));
}

TEST_CASE("align loss arithmetic and oracle") {
  Rng rng(5);
  TransitionConfig cfg;
  cfg.hidden_dim = 4;
  const TranslationPair id = make_translation_pair(2, cfg, rng);
  CHECK(align_loss(Tensor::from_rows({{1.0, 0.0}}), Tensor::from_rows({{0.0, 1.0}}), id) == 2.0);
  const Tensor z = random_tensor({5, 2}, rng);
  TranslationPair same = random_pair(2, 4, rng);
  same.cur_map = same.old_map;
  CHECK(align_loss(z, z, same) == 0.0);

  for (int trial = 0; trial < 20; ++trial) {
    const TranslationPair p = random_pair(3, 4, rng);
    const Tensor a = random_tensor({6, 3}, rng), b = random_tensor({6, 3}, rng);
    const Tensor ma = translate(p.old_map, p.arch, a), mb = translate(p.cur_map, p.arch, b);
    double s = 0.0;
    for (std::size_t k = 0; k < ma.size(); ++k) s += std::abs(ma[k] - mb[k]);
    CHECK(align_loss(a, b, p) == doctest::Approx(s / 6.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(align_loss(random_tensor({2, 3}, rng), random_tensor({3, 3}, rng), random_pair(3, 4, rng)),
                  ProtocolError);
}

TEST_CASE("unified triplet loss: zero weights and slack hinges give zero") {
  const Tensor cur = col({0.0, 0.1, 5.0, 5.1});
  const std::vector<int> labels{0, 0, 1, 1};
  const std::vector<std::size_t> choice{0, 0, 0, 0};
  TransitionConfig cfg;
  cfg.tri_weight = cfg.beta = cfg.delta = 0.0;
  CHECK(unified_triplet_loss(cur, cur, labels, col({50.0}), choice, cfg) == 0.0);
  cfg = {};
  CHECK(unified_triplet_loss(cur, cur, labels, col({50.0}), choice, cfg) == 0.0);
  CHECK_THROWS_AS(unified_triplet_loss(cur, cur, labels, Tensor(), choice, cfg), ProtocolError);
  const std::vector<std::size_t> bad{0, 0, 0, 3};
  CHECK_THROWS_AS(unified_triplet_loss(cur, cur, labels, col({50.0}), bad, cfg), DimensionError);
}

TEST_CASE("unified triplet loss on a hand-enumerated instance") {
  // One-dimensional points, prototype at 2, margin 1.
  //   tri  (m = 0, 1.5, 2.5, 4): hinges 0, 3, 3, 0     -> mean 1.5
  //   beta (m~ = 0.5, 1, 3, 3.5): hinges 0, .25, .25, 0 -> mean 0.125
  //   delta (1 - d(u, m_i)): 0, .75, .75, 0             -> mean 0.375
  const Tensor cur = col({0.0, 1.5, 2.5, 4.0});
  const Tensor old = col({0.5, 1.0, 3.0, 3.5});
  const std::vector<int> labels{0, 0, 1, 1};
  const std::vector<std::size_t> choice{0, 0, 0, 0};
  TransitionConfig cfg;
  cfg.margin = 1.0;
  CHECK(unified_triplet_loss(cur, old, labels, col({2.0}), choice, cfg) ==
        doctest::Approx(1000 * 1.5 + 100 * 0.125 + 100 * 0.375).epsilon(1e-12));
  cfg.tri_weight = 0.0;
  cfg.beta = 0.0;
  CHECK(unified_triplet_loss(cur, old, labels, col({2.0}), choice, cfg) ==
        doctest::Approx(100 * 0.375).epsilon(1e-12));
}

TEST_CASE("transition loss gradients") {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const TranslationPair p = random_pair(3, 4, rng);
    const Tensor a = random_tensor({5, 3}, rng), b = random_tensor({5, 3}, rng);
    const Tensor protos = random_tensor({2, 3}, rng);
    const std::vector<int> labels{0, 0, 1, 1, 1};
    std::vector<std::size_t> choice;
    for (int i = 0; i < 5; ++i) choice.push_back(rng.below(2));
    TransitionConfig cfg;
    cfg.margin = 2.0;
    const std::size_t nl = 2 * p.arch.num_layers();
    const ad::LossFn loss = [&](ad::Tape& t, std::span<const ad::Var> v) {
      const ad::Var mo = translate(t, v.subspan(0, nl), t.constant(a), p.arch);
      const ad::Var mc = translate(t, v.subspan(nl, nl), t.constant(b), p.arch);
      const ad::Var u = translate(t, v.subspan(0, nl), t.constant(protos), p.arch);
      return ad::add(t, align_loss(t, mo, mc), unified_triplet_loss(t, mc, mo, labels, u, choice, cfg));
    };
    CHECK(zstci::testing::check_gradient(loss, p.joined()).relative_error <= 1e-4);
  }
}

TEST_CASE("train_transition: zero epochs return the identity pair") {
  const TwoTasks tt = drifted_models();
  PrototypeMemory mem;
  for (const auto& cp : compute_prototypes(tt.prev, tt.stream.tasks[0])) mem.insert(cp.class_id, cp.vector, 0);
  TransitionConfig cfg = small_transition();
  cfg.epochs = 0;
  Rng rng(1);
  const TranslationPair p = train_transition(tt.prev, tt.cur, tt.stream.tasks[1], mem, cfg, rng);
  PrototypeMemory after = mem;
  update_memory(after, p, {}, 1, cfg);
  CHECK(after == mem);
}

TEST_CASE("train_transition: identical networks keep or lower the alignment") {
  const TwoTasks tt = drifted_models();
  PrototypeMemory mem;
  for (const auto& cp : compute_prototypes(tt.prev, tt.stream.tasks[0])) mem.insert(cp.class_id, cp.vector, 0);
  const TaskDataset& task = tt.stream.tasks[1];
  const Tensor z = embed(tt.cur, task.train.features);

  // Alignment term alone: zero is feasible and is where the identity pair starts.
  TransitionConfig cfg = small_transition();
  cfg.tri_weight = cfg.beta = cfg.delta = 0.0;
  Rng r1(1);
  const TranslationPair zero = train_transition(tt.cur, tt.cur, task, mem, cfg, r1);
  CHECK(align_loss(z, z, zero) == 0.0);

  cfg.zero_init = false;
  Rng r2(2), r3(2);
  const TranslationPair start = make_translation_pair(tt.cur.embed_dim(), cfg, r2);
  const TranslationPair end = train_transition(tt.cur, tt.cur, task, mem, cfg, r3);
  CHECK(align_loss(z, z, end) <= align_loss(z, z, start));
}

TEST_CASE("train_transition lowers held-out alignment across real drift") {
  const TwoTasks tt = drifted_models();
  PrototypeMemory mem;
  for (const auto& cp : compute_prototypes(tt.prev, tt.stream.tasks[0])) mem.insert(cp.class_id, cp.vector, 0);
  const TaskDataset& task = tt.stream.tasks[1];
  TransitionConfig cfg = small_transition();
  cfg.epochs = 60;
  Rng rng(4);
  const TranslationPair p = train_transition(tt.prev, tt.cur, task, mem, cfg, rng);
  Rng r0(0);
  TransitionConfig id_cfg = cfg;
  const TranslationPair id = make_translation_pair(tt.cur.embed_dim(), id_cfg, r0);
  const Tensor zo = embed(tt.prev, task.test.features), zc = embed(tt.cur, task.test.features);
  CHECK(align_loss(zo, zc, p) < align_loss(zo, zc, id));
}

TEST_CASE("train_transition preconditions") {
  const TwoTasks tt = drifted_models();
  PrototypeMemory empty;
  Rng rng(1);
  CHECK_THROWS_AS(train_transition(tt.prev, tt.cur, tt.stream.tasks[0], empty, small_transition(), rng),
                  ProtocolError);
  CHECK_THROWS_AS(train_transition(tt.prev, tt.cur, tt.stream.tasks[1], empty, small_transition(), rng),
                  ProtocolError);
  TransitionConfig bad = small_transition();
  bad.margin = 0.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  CHECK_THROWS_AS(parse_chain_mode("compose"), ConfigError);
}

TEST_CASE("update_memory: identity pair, empty memory, fixed-pair oracle") {
  Rng rng(7);
  TransitionConfig cfg;
  cfg.hidden_dim = 4;
  const TranslationPair id = make_translation_pair(2, cfg, rng);

  PrototypeMemory m;
  const std::vector<ClassPrototype> first{{0, {1.0, 2.0}}, {1, {-1.0, 0.5}}, {2, {0.0, 3.0}}};
  update_memory(m, id, first, 0);
  CHECK(m.size() == 3);
  CHECK(m.at(1).vector == std::vector<double>{-1.0, 0.5});

  PrototypeMemory same = m;
  update_memory(same, id, {}, 1);
  CHECK(same == m);

  const TranslationPair p = random_pair(2, 4, rng, 1.0);
  const std::vector<ClassPrototype> fresh{{5, {0.2, 0.2}}, {3, {-0.4, 1.0}}};
  PrototypeMemory moved = m;
  update_memory(moved, p, fresh, 1);
  CHECK(moved.size() == 5);
  CHECK(moved.insertion_log() == std::vector<int>{0, 1, 2, 5, 3});
  auto check_row = [&](int c, const std::vector<double>& v, const ParamSet& g, std::size_t origin) {
    const Tensor x({1, 2}, v);
    const Tensor f = mlp_forward(g, x, p.arch);
    CHECK(moved.at(c).origin_task == origin);
    for (std::size_t k = 0; k < 2; ++k) CHECK(moved.at(c).vector[k] == doctest::Approx(v[k] + f[k]).epsilon(1e-14));
  };
  for (const auto& cp : first) check_row(cp.class_id, cp.vector, p.old_map, 0);
  for (const auto& cp : fresh) check_row(cp.class_id, cp.vector, p.cur_map, 1);

  PrototypeMemory dup = m;
  CHECK_THROWS_AS(update_memory(dup, p, first, 1), ProtocolError);
  CHECK(dup == m);  // untouched on failure
}
