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

#include "zstci/experiment.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "zstci/embedding.hpp"
#include "zstci/regularizers.hpp"
#include "zstci/rng.hpp"
#include "zstci/snapshot.hpp"
#include "zstci/translation.hpp"

namespace zstci {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Regularizer regularizer_for(Method m) {
  switch (m) {
    case Method::kFt: return Regularizer::kNone;
    case Method::kLwf: return Regularizer::kLwf;
    case Method::kEwc: return Regularizer::kEwc;
    case Method::kMas: return Regularizer::kMas;
  }
  return Regularizer::kNone;
}

double weight_for(const ExperimentConfig& cfg) {
  switch (cfg.method) {
    case Method::kFt: return 0.0;
    case Method::kLwf: return cfg.lwf_weight;
    case Method::kEwc: return cfg.ewc_weight;
    case Method::kMas: return cfg.mas_weight;
  }
  return 0.0;
}

TransitionConfig transition_for(const ExperimentConfig& cfg) {
  TransitionConfig t = cfg.transition;
  if (cfg.zstci == ZstciMode::kZsOnly) {
    t.tri_weight = 0.0;
    t.beta = 0.0;
    t.delta = 0.0;
  } else if (cfg.zstci == ZstciMode::kUrOnly) {
    t.align_weight = 0.0;
  }
  return t;
}

void fill_series(RunResult& r) {
  r.accuracy.clear();
  r.forgetting.clear();
  const std::size_t done = r.matrix.completed();
  for (std::size_t k = 1; k <= done; ++k) {
    r.accuracy.push_back(average_incremental_accuracy(r.matrix, k));
    r.forgetting.push_back(k >= 2 ? std::optional<double>(average_forgetting(r.matrix, k)) : std::nullopt);
  }
}

template <typename Writer, typename Value>
void write_snapshot(const std::filesystem::path& path, Writer writer, const Value& value) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  writer(out, value);
}

}  // namespace

TaskStream build_stream(const ExperimentConfig& cfg, std::uint64_t seed) {
  const std::uint64_t split_seed = cfg.stream.split_seed.value_or(derive_seed(seed, Stream::kSplit));
  TaskStream stream;
  if (cfg.stream.kind == StreamKind::kSynthetic) {
    SyntheticStreamConfig s = cfg.stream.synthetic;
    s.seed = split_seed;
    stream = make_synthetic_stream(s);
  } else {
    stream = load_feature_csv(cfg.stream.csv_path, cfg.stream.synthetic.num_tasks, split_seed,
                              CsvOptions{cfg.stream.csv_header});
  }
  validate_stream(stream);
  return stream;
}

RunResult run_single(const ExperimentConfig& cfg, std::uint64_t seed,
                     const std::optional<std::filesystem::path>& snapshot_dir) {
  RunResult r;
  r.config_hash = config_hash(cfg);
  r.stream_hash = stream_hash(cfg);
  r.label = method_label(cfg.method, cfg.zstci);
  r.method = cfg.method;
  r.zstci = cfg.zstci;
  r.seed = seed;
  r.num_tasks = cfg.stream.synthetic.num_tasks;
  r.matrix = AccuracyMatrix(r.num_tasks);

  try {
    validate(cfg);
    const TaskStream stream = build_stream(cfg, seed);
    r.num_tasks = stream.num_tasks();
    r.matrix = AccuracyMatrix(r.num_tasks);
    if (snapshot_dir) std::filesystem::create_directories(*snapshot_dir);

    MlpArch arch;
    arch.layers.push_back(stream.input_dim);
    for (std::size_t h : cfg.hidden_dims) arch.layers.push_back(h);
    arch.layers.push_back(cfg.embed_dim);
    arch.activation = cfg.activation;
    Rng init_rng(derive_seed(seed, Stream::kInit));
    EmbeddingModel model = make_embedding_model(arch, cfg.normalize_output, init_rng);

    const TransitionConfig tcfg = transition_for(cfg);
    ImportanceConfig icfg = cfg.importance;
    icfg.margin = cfg.train.margin;
    icfg.mining = cfg.train.mining;

    PrototypeMemory memory;
    std::optional<TranslationPair> pair;
    std::optional<ImportanceMap> importance;

    for (std::size_t t = 0; t < stream.num_tasks(); ++t) {
      const TaskDataset& task = stream.tasks[t];
      PhaseTimings timing;
      spdlog::debug("{} seed {}: task {}/{}", r.label, seed, t + 1, stream.num_tasks());

      auto start = Clock::now();
      const EmbeddingModel prev = model;
      TrainConfig train = cfg.train;
      const bool regularize = t > 0 && cfg.method != Method::kFt;
      train.regularizer = regularize ? regularizer_for(cfg.method) : Regularizer::kNone;
      train.reg_weight = regularize ? weight_for(cfg) : 0.0;
      Rng batch_rng(derive_seed(seed, Stream::kBatching, t));
      model = train_task(std::move(model), task, train, regularize ? &prev : nullptr,
                         regularize && importance ? &*importance : nullptr, batch_rng);
      timing.embedding = seconds_since(start);

      start = Clock::now();
      const std::vector<ClassPrototype> protos = compute_prototypes(model, task);
      timing.prototypes = seconds_since(start);

      start = Clock::now();
      if (cfg.zstci != ZstciMode::kOff && t > 0) {
        Rng trans_rng(derive_seed(seed, Stream::kTranslationInit, t));
        const TranslationPair* previous = pair ? &*pair : nullptr;
        TranslationPair next = train_transition(prev, model, task, memory, tcfg, trans_rng, previous);
        update_memory(memory, next, protos, t, tcfg, previous);
        pair = std::move(next);
      } else {
        for (const auto& p : protos) memory.insert(p.class_id, p.vector, t);
      }
      timing.transition = seconds_since(start);

      start = Clock::now();
      if ((cfg.method == Method::kEwc || cfg.method == Method::kMas) && t + 1 < stream.num_tasks()) {
        Rng imp_rng(derive_seed(seed, Stream::kImportance, t));
        ImportanceMap fresh = cfg.method == Method::kEwc ? estimate_fisher(model, task, icfg, imp_rng)
                                                         : estimate_mas(model, task, icfg, imp_rng);
        importance = (cfg.accumulate_importance && importance) ? accumulate(*importance, fresh)
                                                               : std::move(fresh);
      }
      timing.importance = seconds_since(start);

      if (snapshot_dir) {
        const std::string stem = "task" + std::to_string(t + 1);
        write_snapshot(*snapshot_dir / (stem + ".model"), write_model, model);
        write_snapshot(*snapshot_dir / (stem + ".memory"), write_memory, memory);
        if (importance) write_snapshot(*snapshot_dir / (stem + ".importance"), write_importance, *importance);
      }

      start = Clock::now();
      r.matrix.set_row(t + 1, evaluate_after_task(t + 1, stream, model, pair ? &*pair : nullptr, memory));
      timing.evaluation = seconds_since(start);
      r.timings.push_back(timing);
    }
  } catch (const Error& e) {
    r.ok = false;
    r.error = e.what();
    r.error_category = e.category();
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  if (!r.ok) spdlog::error("{} seed {} failed: {}", r.label, seed, r.error);
  fill_series(r);
  return r;
}

std::vector<RunResult> run_jobs(const std::vector<std::pair<ExperimentConfig, std::uint64_t>>& jobs,
                                std::size_t workers,
                                const std::optional<std::filesystem::path>& snapshot_root) {
  std::vector<RunResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& [cfg, seed] = jobs[i];
      std::optional<std::filesystem::path> dir;
      if (snapshot_root) {
        dir = *snapshot_root / (method_label(cfg.method, cfg.zstci) + "-seed" + std::to_string(seed));
      }
      results[i] = run_single(cfg, seed, dir);
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, jobs.size()));
  if (n == 1) {
    work();
    return results;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < n; ++w) pool.emplace_back(work);
  pool.clear();
  return results;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<std::pair<ExperimentConfig, std::uint64_t>> jobs;
  for (std::uint64_t s : cfg.seeds) jobs.emplace_back(cfg, s);
  return run_jobs(jobs, cfg.jobs);
}

std::string result_record(const RunResult& r) {
  json j;
  j["config_hash"] = r.config_hash;
  j["stream_hash"] = r.stream_hash;
  j["label"] = r.label;
  j["method"] = to_string(r.method);
  j["zstci"] = to_string(r.zstci);
  j["seed"] = r.seed;
  j["num_tasks"] = r.num_tasks;
  j["status"] = r.ok ? "ok" : "failed";
  if (!r.ok) {
    j["error"] = r.error;
    j["error_category"] = r.error_category ? to_string(*r.error_category) : "internal";
  }
  json rows = json::array();
  for (std::size_t k = 1; k <= r.matrix.completed(); ++k) rows.push_back(r.matrix.row(k));
  j["accuracy_matrix"] = rows;
  j["A"] = r.accuracy;
  json f = json::array();
  for (const auto& v : r.forgetting) f.push_back(v ? json(*v) : json(nullptr));
  j["F"] = f;
  return j.dump();
}

RunResult parse_result_record(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(std::string("results: ") + e.what());
  }
  try {
    RunResult r;
    r.config_hash = j.at("config_hash").get<std::string>();
    r.stream_hash = j.at("stream_hash").get<std::string>();
    r.label = j.at("label").get<std::string>();
    r.method = parse_method(j.at("method").get<std::string>());
    r.zstci = parse_zstci_mode(j.at("zstci").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.num_tasks = j.at("num_tasks").get<std::size_t>();
    r.ok = j.at("status").get<std::string>() == "ok";
    if (!r.ok) {
      r.error = j.value("error", std::string());
      const std::string cat = j.value("error_category", std::string());
      for (auto c : {ErrorCategory::kDimension, ErrorCategory::kNumeric, ErrorCategory::kConfig,
                     ErrorCategory::kFormat, ErrorCategory::kData, ErrorCategory::kProtocol,
                     ErrorCategory::kAggregation}) {
        if (cat == to_string(c)) r.error_category = c;
      }
    }
    r.matrix = AccuracyMatrix(r.num_tasks);
    const auto rows = j.at("accuracy_matrix").get<std::vector<std::vector<double>>>();
    for (std::size_t k = 0; k < rows.size(); ++k) r.matrix.set_row(k + 1, rows[k]);
    fill_series(r);
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("results: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("results: ") + e.what());
  }
}

std::vector<RunResult> read_results(const std::filesystem::path& jsonl) {
  std::ifstream in(jsonl);
  if (!in) throw DataError("cannot read " + jsonl.string());
  std::vector<RunResult> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(parse_result_record(line));
  }
  return out;
}

void write_run_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                       const std::vector<RunResult>& results) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    return out;
  };

  auto records = open("results.jsonl");
  for (const auto& r : results) records << result_record(r) << '\n';

  auto timings = open("timings.jsonl");
  for (const auto& r : results) {
    json phases = json::array();
    for (const auto& t : r.timings) {
      phases.push_back({{"embedding", t.embedding},
                        {"prototypes", t.prototypes},
                        {"transition", t.transition},
                        {"importance", t.importance},
                        {"evaluation", t.evaluation}});
    }
    timings << json{{"label", r.label}, {"seed", r.seed}, {"tasks", phases}}.dump() << '\n';
  }

  auto ini = open("config.ini");
  ini << "# effective configuration, config hash " << config_hash(cfg) << "\n\n" << render_config(cfg);

  auto summary = open("summary.txt");
  summary << std::fixed << std::setprecision(4);
  for (const auto& r : results) {
    summary << r.label << "  seed " << r.seed << "  " << (r.ok ? "ok" : "FAILED: " + r.error) << '\n';
    summary << "  task        A_k        F_k\n";
    for (std::size_t k = 0; k < r.accuracy.size(); ++k) {
      summary << "  " << std::setw(4) << k + 1 << "  " << std::setw(9) << r.accuracy[k] << "  ";
      if (r.forgetting[k]) summary << std::setw(9) << *r.forgetting[k];
      else summary << std::setw(9) << "-";
      summary << '\n';
    }
    summary << '\n';
  }
}

std::vector<RunResult> run_and_write(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<std::pair<ExperimentConfig, std::uint64_t>> jobs;
  for (std::uint64_t s : cfg.seeds) jobs.emplace_back(cfg, s);
  const std::filesystem::path out = cfg.output_dir;
  std::optional<std::filesystem::path> snaps;
  if (cfg.save_snapshots) snaps = out / "snapshots";
  auto results = run_jobs(jobs, cfg.jobs, snaps);
  write_run_outputs(out, cfg, results);
  return results;
}

}  // namespace zstci
