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

#include "zstci/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "zstci/error.hpp"

namespace zstci {

namespace {

std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string percent(const MeanStd& m) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.1f+-%.1f", 100.0 * m.mean, 100.0 * m.std);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) throw AggregationError("cannot summarize an empty series");
  double sum = 0.0;
  for (double v : values) sum += v;
  MeanStd out;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return out;
}

std::vector<MethodSummary> aggregate(const std::vector<RunResult>& results) {
  std::vector<const RunResult*> usable;
  for (const auto& r : results) {
    if (r.ok) usable.push_back(&r);
    else spdlog::warn("skipping failed run {} seed {}", r.label, r.seed);
  }
  if (usable.empty()) throw AggregationError("no successful results to aggregate");

  const std::string& stream = usable.front()->stream_hash;
  const std::size_t tasks = usable.front()->num_tasks;
  std::vector<std::string> order;
  std::vector<std::vector<const RunResult*>> groups;
  for (const RunResult* r : usable) {
    if (r->stream_hash != stream) {
      throw AggregationError("results mix stream specs (" + stream + " vs " + r->stream_hash + ")");
    }
    if (r->num_tasks != tasks || r->accuracy.size() != tasks) {
      throw AggregationError("results mix task counts");
    }
    auto it = std::find(order.begin(), order.end(), r->label);
    if (it == order.end()) {
      order.push_back(r->label);
      groups.emplace_back();
      it = order.end() - 1;
    }
    groups[static_cast<std::size_t>(it - order.begin())].push_back(r);
  }

  std::vector<MethodSummary> out;
  for (std::size_t g = 0; g < order.size(); ++g) {
    MethodSummary s;
    s.label = order[g];
    s.seeds = groups[g].size();
    for (std::size_t k = 0; k < tasks; ++k) {
      std::vector<double> a, f;
      for (const RunResult* r : groups[g]) {
        a.push_back(r->accuracy[k]);
        if (r->forgetting[k]) f.push_back(*r->forgetting[k]);
      }
      s.accuracy.push_back(mean_std(a));
      if (k > 0) s.forgetting.push_back(mean_std(f));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_accuracy_table(const std::vector<MethodSummary>& summaries) {
  std::size_t width = 6;
  for (const auto& s : summaries) width = std::max(width, s.label.size());
  std::ostringstream out;
  out << "Average incremental accuracy A_k (%), mean+-std over seeds\n\n";
  out << std::string(width, ' ');
  const std::size_t tasks = summaries.empty() ? 0 : summaries.front().accuracy.size();
  for (std::size_t k = 1; k <= tasks; ++k) {
    char head[16];
    std::snprintf(head, sizeof(head), "%13s", ("T" + std::to_string(k)).c_str());
    out << head;
  }
  out << '\n';
  for (const auto& s : summaries) {
    out << s.label << std::string(width - s.label.size(), ' ');
    for (const auto& m : s.accuracy) {
      char cell[32];
      std::snprintf(cell, sizeof(cell), "%13s", percent(m).c_str());
      out << cell;
    }
    out << '\n';
  }
  return out.str();
}

std::vector<MethodSummary> emit_report(const std::vector<RunResult>& results,
                                       const std::filesystem::path& dir) {
  const auto summaries = aggregate(results);
  std::filesystem::create_directories(dir);

  auto csv = open_out(dir / "accuracy_table.csv");
  csv << "method,seeds";
  const std::size_t tasks = summaries.front().accuracy.size();
  for (std::size_t k = 1; k <= tasks; ++k) csv << ",A" << k << "_mean,A" << k << "_std";
  csv << '\n';
  for (const auto& s : summaries) {
    csv << s.label << ',' << s.seeds;
    for (const auto& m : s.accuracy) csv << ',' << num(m.mean) << ',' << num(m.std);
    csv << '\n';
  }

  auto txt = open_out(dir / "accuracy_table.txt");
  txt << render_accuracy_table(summaries);

  auto series = open_out(dir / "forgetting_series.csv");
  series << "method,task,F_mean,F_std\n";
  for (const auto& s : summaries) {
    for (std::size_t i = 0; i < s.forgetting.size(); ++i) {
      series << s.label << ',' << i + 2 << ',' << num(s.forgetting[i].mean) << ','
             << num(s.forgetting[i].std) << '\n';
    }
  }
  return summaries;
}

}  // namespace zstci
