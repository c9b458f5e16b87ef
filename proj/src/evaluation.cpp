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

#include "zstci/evaluation.hpp"

#include <algorithm>
#include <limits>

#include "zstci/error.hpp"

namespace zstci {

std::vector<int> ncm_classify(const Tensor& queries, const PrototypeMemory& memory) {
  if (memory.empty()) throw ProtocolError("ncm_classify: prototype memory is empty");
  if (queries.cols() != memory.dim()) {
    throw DimensionError("ncm_classify: query dimension " + std::to_string(queries.cols()) +
                         " vs prototype dimension " + std::to_string(memory.dim()));
  }
  std::vector<int> out;
  out.reserve(queries.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    const auto q = queries.row(i);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    // Ascending class order with a strict comparison keeps the smallest id on ties.
    for (const auto& [c, e] : memory.entries()) {
      const double d = squared_distance(q, e.vector);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    out.push_back(best);
  }
  return out;
}

void AccuracyMatrix::set_row(std::size_t k, std::vector<double> row) {
  if (k < 1 || k > rows_.size()) throw ProtocolError("accuracy row " + std::to_string(k) + " out of range");
  if (row.size() != k) {
    throw DimensionError("accuracy row " + std::to_string(k) + " needs " + std::to_string(k) +
                         " entries, got " + std::to_string(row.size()));
  }
  for (double a : row) {
    if (!(a >= 0.0 && a <= 1.0)) throw NumericError("accuracy outside [0, 1]");
  }
  rows_[k - 1] = std::move(row);
}

bool AccuracyMatrix::populated(std::size_t k) const {
  return k >= 1 && k <= rows_.size() && rows_[k - 1].size() == k;
}

const std::vector<double>& AccuracyMatrix::row(std::size_t k) const {
  if (!populated(k)) throw ProtocolError("accuracy row " + std::to_string(k) + " is not populated");
  return rows_[k - 1];
}

double AccuracyMatrix::at(std::size_t k, std::size_t j) const {
  if (j < 1 || j > k) throw ProtocolError("a_{k,j} needs 1 <= j <= k");
  return row(k)[j - 1];
}

std::size_t AccuracyMatrix::completed() const {
  std::size_t k = 0;
  while (k < rows_.size() && populated(k + 1)) ++k;
  return k;
}

double average_incremental_accuracy(const AccuracyMatrix& matrix, std::size_t k) {
  const auto& r = matrix.row(k);
  double s = 0.0;
  for (double a : r) s += a;
  return s / static_cast<double>(k);
}

double average_forgetting(const AccuracyMatrix& matrix, std::size_t k) {
  if (k < 2) throw ProtocolError("average forgetting needs k >= 2");
  double s = 0.0;
  for (std::size_t j = 1; j < k; ++j) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t l = j; l < k; ++l) worst = std::max(worst, matrix.at(l, j) - matrix.at(k, j));
    s += worst;
  }
  return s / static_cast<double>(k - 1);
}

std::vector<double> evaluate_after_task(std::size_t k, const TaskStream& stream,
                                        const EmbeddingModel& model, const TranslationPair* pair,
                                        const PrototypeMemory& memory) {
  if (k < 1 || k > stream.num_tasks()) throw ProtocolError("evaluate_after_task: k out of range");
  std::vector<double> row;
  for (std::size_t j = 0; j < k; ++j) {
    const TaskDataset& task = stream.tasks[j];
    if (task.test.size() == 0) {
      throw DataError("task " + std::to_string(j + 1) + " has no test split");
    }
    Tensor z = embed(model, task.test.features);
    if (pair != nullptr) z = translate(pair->cur_map, pair->arch, z);
    const auto predicted = ncm_classify(z, memory);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == task.test.labels[i];
    row.push_back(static_cast<double>(correct) / static_cast<double>(predicted.size()));
  }
  return row;
}

}  // namespace zstci
