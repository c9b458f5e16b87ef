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
#include <optional>
#include <vector>

#include "zstci/embedding.hpp"
#include "zstci/task_stream.hpp"
#include "zstci/translation.hpp"

namespace zstci {

// Nearest class mean under squared Euclidean distance over every stored
// class; ties go to the smallest class id.
std::vector<int> ncm_classify(const Tensor& queries, const PrototypeMemory& memory);

// Lower-triangular a_{k,j}: accuracy on task j after training k tasks.
// Indices are 1-based, matching the usual notation.
class AccuracyMatrix {
 public:
  AccuracyMatrix() = default;
  explicit AccuracyMatrix(std::size_t num_tasks) : rows_(num_tasks) {}

  std::size_t num_tasks() const { return rows_.size(); }

  // Row k must have exactly k entries in [0, 1].
  void set_row(std::size_t k, std::vector<double> row);
  bool populated(std::size_t k) const;
  const std::vector<double>& row(std::size_t k) const;
  double at(std::size_t k, std::size_t j) const;

  // Number of leading populated rows.
  std::size_t completed() const;

  bool operator==(const AccuracyMatrix&) const = default;

 private:
  std::vector<std::vector<double>> rows_;
};

// A_k = (1/k) sum_{j<=k} a_{k,j}.
double average_incremental_accuracy(const AccuracyMatrix& matrix, std::size_t k);

// F_k = (1/(k-1)) sum_{j<k} max_{l<k} (a_{l,j} - a_{k,j}); may be negative.
double average_forgetting(const AccuracyMatrix& matrix, std::size_t k);

// Accuracy on the test split of tasks 1..k: samples are embedded with the
// current model, mapped through pair->cur_map when a pair is given, and
// classified against the whole memory. Task identity is never used.
std::vector<double> evaluate_after_task(std::size_t k, const TaskStream& stream,
                                        const EmbeddingModel& model, const TranslationPair* pair,
                                        const PrototypeMemory& memory);

}  // namespace zstci
