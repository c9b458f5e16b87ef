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
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "zstci/error.hpp"
#include "zstci/report.hpp"

using namespace zstci;
namespace fs = std::filesystem;

namespace {

RunResult crafted(const std::string& label, std::uint64_t seed,
                  const std::vector<std::vector<double>>& rows, const std::string& stream = "s") {
  RunResult r;
  r.label = label;
  r.seed = seed;
  r.stream_hash = stream;
  r.num_tasks = rows.size();
  r.matrix = AccuracyMatrix(rows.size());
  for (std::size_t k = 1; k <= rows.size(); ++k) {
    r.matrix.set_row(k, rows[k - 1]);
    r.accuracy.push_back(average_incremental_accuracy(r.matrix, k));
    r.forgetting.push_back(k >= 2 ? std::optional<double>(average_forgetting(r.matrix, k)) : std::nullopt);
  }
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("mean_std uses the sample deviation") {
  CHECK(mean_std({0.5}).mean == 0.5);
  CHECK(mean_std({0.5}).std == 0.0);
  const MeanStd m = mean_std({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == 2.5);
  CHECK(m.std == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
  CHECK_THROWS_AS(mean_std({}), AggregationError);
}

TEST_CASE("a single run reports its own series") {
  const RunResult r = crafted("E-FT", 1, {{1.0}, {0.5, 1.0}, {0.25, 0.5, 1.0}});
  const auto s = aggregate({r});
  REQUIRE(s.size() == 1);
  CHECK(s[0].seeds == 1);
  REQUIRE(s[0].accuracy.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(s[0].accuracy[k].mean == r.accuracy[k]);
    CHECK(s[0].accuracy[k].std == 0.0);
  }
  REQUIRE(s[0].forgetting.size() == 2);
  CHECK(s[0].forgetting[1].mean == *r.forgetting[2]);
}

TEST_CASE("identical seeds have zero spread") {
  const auto s = aggregate({crafted("E-FT", 1, {{0.75}, {0.5, 0.25}}), crafted("E-FT", 2, {{0.75}, {0.5, 0.25}})});
  CHECK(s[0].accuracy[1].std == 0.0);
  CHECK(s[0].forgetting[0].std == 0.0);
}

TEST_CASE("three crafted results against hand-computed means") {
  // E-FT seeds: A_2 = 0.5 and 0.75, F_2 = 0.5 and 0.25.
  // E-LwF seed: A_2 = 0.75, F_2 = 0.
  const std::vector<RunResult> runs{
      crafted("E-FT", 1, {{1.0}, {0.5, 0.5}}),
      crafted("E-LwF", 1, {{0.5}, {0.5, 1.0}}),
      crafted("E-FT", 2, {{1.0}, {0.75, 0.75}}),
  };
  const auto s = aggregate(runs);
  REQUIRE(s.size() == 2);
  CHECK(s[0].label == "E-FT");
  CHECK(s[1].label == "E-LwF");
  CHECK(s[0].seeds == 2);
  CHECK(s[0].accuracy[0].mean == 1.0);
  CHECK(s[0].accuracy[1].mean == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(s[0].accuracy[1].std == doctest::Approx(0.125 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(s[0].forgetting[0].mean == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(s[1].accuracy[1].mean == 0.75);
  CHECK(s[1].forgetting[0].mean == 0.0);
}

TEST_CASE("aggregation errors and skipped failures") {
  CHECK_THROWS_AS(aggregate({}), AggregationError);
  CHECK_THROWS_AS(aggregate({crafted("a", 1, {{1.0}}), crafted("a", 2, {{1.0}}, "other")}), AggregationError);
  CHECK_THROWS_AS(aggregate({crafted("a", 1, {{1.0}}), crafted("a", 2, {{1.0}, {1.0, 1.0}})}), AggregationError);
  RunResult failed = crafted("a", 3, {{0.0}}, "different");
  failed.ok = false;
  const auto s = aggregate({crafted("a", 1, {{1.0}}), failed});
  CHECK(s[0].seeds == 1);
  CHECK_THROWS_AS(aggregate({failed}), AggregationError);
}

TEST_CASE("emitted files") {
  const fs::path dir = fs::temp_directory_path() / "zstci_report_test";
  fs::remove_all(dir);
  const std::vector<RunResult> runs{crafted("E-FT", 1, {{1.0}, {0.5, 0.5}}),
                                    crafted("E-FT", 2, {{1.0}, {0.75, 0.75}})};
  emit_report(runs, dir);
  CHECK(slurp(dir / "accuracy_table.csv") ==
        "method,seeds,A1_mean,A1_std,A2_mean,A2_std\n"
        "E-FT,2,1,0,0.625,0.1767766952966369\n");
  CHECK(slurp(dir / "forgetting_series.csv") ==
        "method,task,F_mean,F_std\n"
        "E-FT,2,0.375,0.1767766952966369\n");
  const std::string table = slurp(dir / "accuracy_table.txt");
  CHECK(table.find("E-FT") != std::string::npos);
  CHECK(table.find("62.5+-17.7") != std::string::npos);
  fs::remove_all(dir);
}
