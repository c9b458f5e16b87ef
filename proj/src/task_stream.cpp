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

#include "zstci/task_stream.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "zstci/error.hpp"
#include "zstci/rng.hpp"

namespace zstci {

Sample LabeledSet::at(std::size_t i) const {
  auto r = features.row(i);
  return Sample{{r.begin(), r.end()}, labels.at(i)};
}

std::vector<std::size_t> LabeledSet::indices_of(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) out.push_back(i);
  }
  return out;
}

LabeledSet LabeledSet::subset(std::span<const std::size_t> indices) const {
  LabeledSet out;
  out.features = gather_rows(features, indices);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(labels.at(i));
  return out;
}

namespace {

std::size_t test_count(std::size_t n) { return n / 5; }

// Builds a LabeledSet from per-class row lists.
LabeledSet stack(const std::vector<std::pair<int, std::vector<double>>>& rows, std::size_t dim) {
  LabeledSet set;
  if (rows.empty()) return set;
  std::vector<double> data;
  data.reserve(rows.size() * dim);
  for (const auto& [label, f] : rows) {
    data.insert(data.end(), f.begin(), f.end());
    set.labels.push_back(label);
  }
  set.features = Tensor({rows.size(), dim}, std::move(data));
  return set;
}

}  // namespace

TaskStream make_synthetic_stream(const SyntheticStreamConfig& cfg) {
  if (cfg.num_tasks < 1 || cfg.samples_per_class < 1 || cfg.input_dim < 1) {
    throw ConfigError("synthetic stream counts must be >= 1");
  }
  if (cfg.classes_per_task < 2) {
    throw ConfigError("classes_per_task must be >= 2 so triplets have negatives");
  }
  if (cfg.samples_per_class < 2) {
    throw ConfigError("samples_per_class must be >= 2 so triplets have positives");
  }
  if (!(cfg.cluster_spread >= 0.0) || !std::isfinite(cfg.cluster_spread)) {
    throw ConfigError("cluster_spread must be finite and >= 0");
  }

  Rng rng(cfg.seed);
  const std::size_t d = cfg.input_dim;
  const double min_sep = 4.0 * cfg.cluster_spread;
  std::vector<std::vector<double>> means;

  TaskStream stream;
  stream.seed = cfg.seed;
  stream.input_dim = d;
  int next_class = 0;
  for (std::size_t t = 0; t < cfg.num_tasks; ++t) {
    TaskDataset task;
    task.index = t;
    std::vector<std::pair<int, std::vector<double>>> train_rows, test_rows;
    for (std::size_t c = 0; c < cfg.classes_per_task; ++c) {
      const int label = next_class++;
      std::vector<double> mean(d);
      for (int attempt = 0; attempt <= 100; ++attempt) {
        for (double& v : mean) v = rng.uniform(-1.0, 1.0);
        const bool too_close = std::any_of(means.begin(), means.end(), [&](const auto& other) {
          return std::sqrt(squared_distance(mean, other)) < min_sep;
        });
        if (!too_close) break;
      }
      means.push_back(mean);
      task.classes.push_back(label);
      stream.classes.push_back(label);

      const std::size_t n_train = cfg.samples_per_class - test_count(cfg.samples_per_class);
      for (std::size_t s = 0; s < cfg.samples_per_class; ++s) {
        std::vector<double> x(d);
        for (std::size_t k = 0; k < d; ++k) {
          x[k] = cfg.cluster_spread == 0.0 ? mean[k] : mean[k] + cfg.cluster_spread * rng.normal();
        }
        (s < n_train ? train_rows : test_rows).emplace_back(label, std::move(x));
      }
    }
    task.train = stack(train_rows, d);
    task.test = stack(test_rows, d);
    stream.tasks.push_back(std::move(task));
  }
  validate_stream(stream);
  return stream;
}

std::vector<std::vector<int>> partition_classes(std::vector<int> classes, std::size_t num_tasks,
                                                std::uint64_t seed) {
  if (num_tasks < 1) throw ConfigError("num_tasks must be >= 1");
  if (classes.size() < num_tasks) {
    throw ConfigError("cannot split " + std::to_string(classes.size()) + " classes into " +
                      std::to_string(num_tasks) + " tasks");
  }
  std::sort(classes.begin(), classes.end());
  Rng rng(seed);
  rng.shuffle(std::span<int>(classes));
  const std::size_t base = classes.size() / num_tasks;
  const std::size_t extra = classes.size() % num_tasks;
  std::vector<std::vector<int>> groups;
  std::size_t pos = 0;
  for (std::size_t t = 0; t < num_tasks; ++t) {
    const std::size_t n = base + (t < extra ? 1 : 0);
    groups.emplace_back(classes.begin() + static_cast<std::ptrdiff_t>(pos),
                        classes.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
  }
  return groups;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw FormatError("line " + std::to_string(line) + ": invalid number '" + field + "'");
  }
  return v;
}

int parse_label(const std::string& field, std::size_t line) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || v < 0) {
    throw FormatError("line " + std::to_string(line) + ": invalid class label '" + field + "'");
  }
  return v;
}

}  // namespace

TaskStream load_feature_csv(const std::filesystem::path& path, std::size_t num_tasks,
                            std::uint64_t seed, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feature file " + path.string());

  std::map<int, std::vector<std::vector<double>>> by_class;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && options.has_header) continue;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() < 2) {
      throw FormatError("line " + std::to_string(line_no) + ": expected label and features");
    }
    if (dim == 0) dim = fields.size() - 1;
    if (fields.size() - 1 != dim) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                        " features, got " + std::to_string(fields.size() - 1));
    }
    const int label = parse_label(fields[0], line_no);
    std::vector<double> x(dim);
    for (std::size_t k = 0; k < dim; ++k) x[k] = parse_double(fields[k + 1], line_no);
    by_class[label].push_back(std::move(x));
  }
  if (by_class.empty()) throw DataError("feature file " + path.string() + " has no rows");

  std::vector<int> classes;
  for (const auto& [label, rows] : by_class) classes.push_back(label);
  const auto groups = partition_classes(classes, num_tasks, seed);

  TaskStream stream;
  stream.seed = seed;
  stream.input_dim = dim;
  for (std::size_t t = 0; t < groups.size(); ++t) {
    TaskDataset task;
    task.index = t;
    std::vector<std::pair<int, std::vector<double>>> train_rows, test_rows;
    for (int label : groups[t]) {
      const auto& rows = by_class.at(label);
      const std::size_t n_train = rows.size() - test_count(rows.size());
      if (n_train < 2) {
        throw DataError("class " + std::to_string(label) + " has fewer than 2 train samples");
      }
      for (std::size_t i = 0; i < rows.size(); ++i) {
        (i < n_train ? train_rows : test_rows).emplace_back(label, rows[i]);
      }
      task.classes.push_back(label);
      stream.classes.push_back(label);
    }
    task.train = stack(train_rows, dim);
    task.test = stack(test_rows, dim);
    stream.tasks.push_back(std::move(task));
  }
  validate_stream(stream);
  return stream;
}

void validate_stream(const TaskStream& stream) {
  std::set<int> seen;
  for (const auto& task : stream.tasks) {
    if (task.classes.size() < 2) {
      throw DataError("task " + std::to_string(task.index) + " has fewer than 2 classes");
    }
    for (int c : task.classes) {
      if (!seen.insert(c).second) {
        throw DataError("class " + std::to_string(c) + " appears in more than one task");
      }
      if (task.train.indices_of(c).size() < 2) {
        throw DataError("class " + std::to_string(c) + " has fewer than 2 train samples");
      }
    }
    for (int label : task.train.labels) {
      if (std::find(task.classes.begin(), task.classes.end(), label) == task.classes.end()) {
        throw DataError("train label " + std::to_string(label) + " outside its task's classes");
      }
    }
  }
}

}  // namespace zstci
