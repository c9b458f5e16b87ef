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

// Cross-seed aggregation and table / series emission.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "zstci/experiment.hpp"

namespace zstci {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single seed
};

MeanStd mean_std(const std::vector<double>& values);

struct MethodSummary {
  std::string label;
  std::size_t seeds = 0;
  std::vector<MeanStd> accuracy;    // index k-1
  std::vector<MeanStd> forgetting;  // index k-2, from task 2 on
};

// Groups successful results by label in order of first appearance. Throws
// AggregationError when the inputs are empty or mix stream specs or lengths.
std::vector<MethodSummary> aggregate(const std::vector<RunResult>& results);

// Writes accuracy_table.csv, accuracy_table.txt and forgetting_series.csv
// into `dir` and returns the summaries they were built from.
std::vector<MethodSummary> emit_report(const std::vector<RunResult>& results,
                                       const std::filesystem::path& dir);

std::string render_accuracy_table(const std::vector<MethodSummary>& summaries);

}  // namespace zstci
