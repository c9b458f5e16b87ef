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

#include <limits>

#include "doctest.h"
#include "zstci/error.hpp"
#include "zstci/tensor.hpp"

using namespace zstci;

TEST_CASE("tensor construction and shape checks") {
  const Tensor t({2, 3}, 1.5);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.size() == 6);
  CHECK(t(1, 2) == 1.5);
  CHECK_THROWS_AS(Tensor(std::vector<std::size_t>{}), DimensionError);
  CHECK_THROWS_AS(Tensor({2, 0}), DimensionError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
}

TEST_CASE("from_rows keeps row-major order") {
  const Tensor t = Tensor::from_rows({{1, 2}, {3, 4}, {5, 6}});
  CHECK(t.shape() == std::vector<std::size_t>{3, 2});
  CHECK(t(2, 0) == 5);
  CHECK(t.row(1)[1] == 4);
  CHECK_THROWS_AS(Tensor::from_rows({{1, 2}, {3}}), DimensionError);
  CHECK_THROWS_AS(Tensor::from_rows({}), DimensionError);
}

TEST_CASE("scalar item and finiteness") {
  CHECK(Tensor::scalar(2.5).item() == 2.5);
  CHECK_THROWS_AS(Tensor({2}).item(), DimensionError);
  Tensor t({2}, 0.0);
  CHECK(t.all_finite());
  t[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(t.all_finite());
}

TEST_CASE("gather_rows and squared_distance") {
  const Tensor t = Tensor::from_rows({{0, 0}, {1, 1}, {3, 4}});
  const std::vector<std::size_t> idx{2, 0, 2};
  const Tensor g = gather_rows(t, idx);
  CHECK(g == Tensor::from_rows({{3, 4}, {0, 0}, {3, 4}}));
  CHECK(squared_distance(t.row(0), t.row(2)) == 25.0);
  const std::vector<std::size_t> bad{3};
  CHECK_THROWS_AS(gather_rows(t, bad), DimensionError);
}
