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
#include <cstdint>
#include <filesystem>
#include <vector>

#include "zstci/tensor.hpp"

namespace zstci {

struct Sample {
  std::vector<double> features;
  int label = 0;
};

// Features stacked row-wise with one label per row.
struct LabeledSet {
  Tensor features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  Sample at(std::size_t i) const;
  // Rows whose label equals `label`, in order.
  std::vector<std::size_t> indices_of(int label) const;
  LabeledSet subset(std::span<const std::size_t> indices) const;
};

struct TaskDataset {
  std::size_t index = 0;  // 0-based position in the stream
  std::vector<int> classes;
  LabeledSet train;
  LabeledSet test;

  std::size_t train_count() const { return train.size(); }
  std::size_t class_count() const { return classes.size(); }
};

// Ordered class-disjoint tasks.
struct TaskStream {
  std::vector<TaskDataset> tasks;
  std::vector<int> classes;  // union over tasks, in task order
  std::uint64_t seed = 0;
  std::size_t input_dim = 0;

  std::size_t num_tasks() const { return tasks.size(); }
};

struct SyntheticStreamConfig {
  std::size_t num_tasks = 5;
  std::size_t classes_per_task = 4;
  std::size_t samples_per_class = 50;
  std::size_t input_dim = 16;
  double cluster_spread = 0.15;
  std::uint64_t seed = 0;
};

// Isotropic Gaussian clusters. Class ids run 0..T*C-1, task t owning
// [t*C, (t+1)*C). Means are uniform in [-1, 1]^d and are redrawn (at most 100
// times) while closer than 4 * spread to an earlier mean. Per class the first
// n - floor(n/5) samples are train, the rest test.
TaskStream make_synthetic_stream(const SyntheticStreamConfig& cfg);

struct CsvOptions {
  bool has_header = false;
};

// Rows are `label, f_1, ..., f_d`. Class ids are sorted, shuffled with the
// seeded generator and split into num_tasks contiguous groups; when the count
// does not divide evenly the earlier tasks take one extra class. Within a
// class, file order is kept and the last floor(n/5) rows become test data.
TaskStream load_feature_csv(const std::filesystem::path& path, std::size_t num_tasks,
                            std::uint64_t seed, const CsvOptions& options = {});

// Class order produced by the split shuffle; exposed for golden-file checks.
std::vector<std::vector<int>> partition_classes(std::vector<int> classes, std::size_t num_tasks,
                                                std::uint64_t seed);

// Throws DataError unless every class has >= 2 train samples, every task has
// >= 2 classes and task class sets are pairwise disjoint.
void validate_stream(const TaskStream& stream);

}  // namespace zstci
