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

// Sequential task protocol and results persistence.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zstci/config.hpp"
#include "zstci/error.hpp"
#include "zstci/evaluation.hpp"
#include "zstci/task_stream.hpp"

namespace zstci {

// Wall-clock seconds spent in each phase of one task.
struct PhaseTimings {
  double embedding = 0.0;
  double prototypes = 0.0;
  double transition = 0.0;
  double importance = 0.0;
  double evaluation = 0.0;
};

struct RunResult {
  std::string config_hash;
  std::string stream_hash;
  std::string label;
  Method method = Method::kFt;
  ZstciMode zstci = ZstciMode::kOff;
  std::uint64_t seed = 0;
  std::size_t num_tasks = 0;

  AccuracyMatrix matrix;
  std::vector<double> accuracy;                  // A_k for each completed row
  std::vector<std::optional<double>> forgetting;  // F_k; empty for k = 1

  bool ok = true;
  std::string error;
  std::optional<ErrorCategory> error_category;

  std::vector<PhaseTimings> timings;  // not persisted in results.jsonl
};

// Builds the task stream a run with `seed` trains on.
TaskStream build_stream(const ExperimentConfig& cfg, std::uint64_t seed);

// One full pass over the stream. Library errors raised mid-run are caught and
// returned as a failed result holding the rows completed so far. When
// `snapshot_dir` is given, models, importance maps and memories are written
// there after every task.
RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed,
                     const std::optional<std::filesystem::path>& snapshot_dir = std::nullopt);

// Runs every (config, seed) job on up to `jobs` worker threads; results keep
// the job order.
std::vector<RunResult> run_jobs(const std::vector<std::pair<ExperimentConfig, std::uint64_t>>& jobs,
                                std::size_t workers,
                                const std::optional<std::filesystem::path>& snapshot_root = std::nullopt);

// All seeds of one config, without touching the filesystem.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg);

// One JSON line per result; timings are left out so replays compare equal.
std::string result_record(const RunResult& result);
RunResult parse_result_record(const std::string& line);
std::vector<RunResult> read_results(const std::filesystem::path& jsonl);

// Writes results.jsonl, timings.jsonl, summary.txt and config.ini into `dir`.
void write_run_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                       const std::vector<RunResult>& results);

// The run verb: validates, runs every seed, writes outputs into
// cfg.output_dir and returns the results.
std::vector<RunResult> run_and_write(const ExperimentConfig& cfg);

}  // namespace zstci
