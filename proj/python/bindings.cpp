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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zstci/config.hpp"
#include "zstci/embedding.hpp"
#include "zstci/error.hpp"
#include "zstci/evaluation.hpp"
#include "zstci/experiment.hpp"
#include "zstci/report.hpp"
#include "zstci/translation.hpp"

namespace py = pybind11;
using namespace zstci;

namespace {

ExperimentConfig make_config(const std::optional<std::string>& path,
                             const std::map<std::string, std::string>& overrides) {
  ExperimentConfig cfg = path ? load_config(*path) : default_config();
  for (const auto& [key, value] : overrides) set_config_value(cfg, key, value);
  validate(cfg);
  return cfg;
}

PrototypeMemory memory_from(const std::map<int, std::vector<double>>& prototypes) {
  PrototypeMemory memory;
  for (const auto& [id, vec] : prototypes) memory.insert(id, vec, 1);
  return memory;
}

AccuracyMatrix matrix_from(const std::vector<std::vector<double>>& rows) {
  AccuracyMatrix m(rows.size());
  for (std::size_t k = 1; k <= rows.size(); ++k) m.set_row(k, rows[k - 1]);
  return m;
}

}  // namespace

PYBIND11_MODULE(_zstci, m) {
  m.doc() = "Zero-shot translation for class-incremental embedding networks";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&]() { return py::exception<Error>(m, "ZstciError"); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // The category name leads the message, e.g. "config: unknown key".
      py::set_error(error_type.get_stored(),
                    (std::string(to_string(e.category())) + ": " + e.what()).c_str());
    }
  });

  m.def(
      "render_config",
      [](std::optional<std::string> path, std::map<std::string, std::string> overrides) {
        return render_config(make_config(path, overrides));
      },
      py::arg("path") = py::none(), py::arg("overrides") = std::map<std::string, std::string>{});

  m.def(
      "config_hash",
      [](std::optional<std::string> path, std::map<std::string, std::string> overrides) {
        return config_hash(make_config(path, overrides));
      },
      py::arg("path") = py::none(), py::arg("overrides") = std::map<std::string, std::string>{});

  m.def(
      "method_label",
      [](const std::string& method, const std::string& mode) {
        return method_label(parse_method(method), parse_zstci_mode(mode));
      },
      py::arg("method"), py::arg("zstci") = "off");

  // Runs every seed and returns one JSON record per run, same as results.jsonl.
  m.def(
      "run",
      [](std::optional<std::string> path, std::map<std::string, std::string> overrides,
         std::optional<std::vector<std::uint64_t>> seeds) {
        ExperimentConfig cfg = make_config(path, overrides);
        if (seeds) cfg.seeds = *seeds;
        validate(cfg);
        std::vector<RunResult> results;
        {
          py::gil_scoped_release release;
          results = run_experiment(cfg);
        }
        std::vector<std::string> records;
        for (const auto& r : results) records.push_back(result_record(r));
        return records;
      },
      py::arg("path") = py::none(), py::arg("overrides") = std::map<std::string, std::string>{},
      py::arg("seeds") = py::none());

  m.def(
      "ncm_classify",
      [](const std::vector<std::vector<double>>& queries,
         const std::map<int, std::vector<double>>& prototypes) {
        return ncm_classify(Tensor::from_rows(queries), memory_from(prototypes));
      },
      py::arg("queries"), py::arg("prototypes"));

  m.def(
      "average_incremental_accuracy",
      [](const std::vector<std::vector<double>>& rows, std::size_t k) {
        return average_incremental_accuracy(matrix_from(rows), k);
      },
      py::arg("rows"), py::arg("k"));

  m.def(
      "average_forgetting",
      [](const std::vector<std::vector<double>>& rows, std::size_t k) {
        return average_forgetting(matrix_from(rows), k);
      },
      py::arg("rows"), py::arg("k"));

  m.def(
      "mine_triplets",
      [](const std::vector<int>& labels) {
        std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> out;
        for (const Triplet& t : mine_triplets(labels, MiningPolicy::kAllValid))
          out.emplace_back(t.anchor, t.positive, t.negative);
        return out;
      },
      py::arg("labels"));

  m.def(
      "triplet_loss",
      [](const std::vector<std::vector<double>>& embeddings, const std::vector<int>& labels,
         double margin) {
        const auto triplets = mine_triplets(labels, MiningPolicy::kAllValid);
        return triplet_loss(Tensor::from_rows(embeddings), triplets, margin);
      },
      py::arg("embeddings"), py::arg("labels"), py::arg("margin"));

  m.def(
      "summarize",
      [](const std::vector<std::string>& records) {
        std::vector<RunResult> results;
        for (const auto& line : records) results.push_back(parse_result_record(line));
        py::list out;
        for (const MethodSummary& s : aggregate(results)) {
          py::dict d;
          d["label"] = s.label;
          d["seeds"] = s.seeds;
          py::list acc, fgt;
          for (const auto& v : s.accuracy) acc.append(py::make_tuple(v.mean, v.std));
          for (const auto& v : s.forgetting) fgt.append(py::make_tuple(v.mean, v.std));
          d["accuracy"] = acc;
          d["forgetting"] = fgt;
          out.append(d);
        }
        return out;
      },
      py::arg("records"));
}
