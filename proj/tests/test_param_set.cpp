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

#include "doctest.h"
#include "zstci/error.hpp"
#include "zstci/param_set.hpp"

using namespace zstci;

TEST_CASE("param set keeps insertion order and unique names") {
  ParamSet p;
  p.add("b", Tensor({2}, 1.0));
  p.add("a", Tensor({1, 3}, 2.0));
  CHECK(p.size() == 2);
  CHECK(p.name(0) == "b");
  CHECK(p.index_of("a") == 1u);
  CHECK(p.scalar_count() == 5);
  CHECK_THROWS_AS(p.add("a", Tensor({1})), ProtocolError);
  CHECK_THROWS_AS(p.at("missing"), ProtocolError);
}

TEST_CASE("assign checks shape; zeros_like keeps layout") {
  ParamSet p;
  p.add("w", Tensor({2, 2}, 1.0));
  CHECK_THROWS_AS(p.assign(0, Tensor({4})), DimensionError);
  p.assign(0, Tensor({2, 2}, 3.0));
  CHECK(p.tensor(0)(1, 1) == 3.0);
  const ParamSet z = p.zeros_like();
  CHECK(z.same_layout(p));
  CHECK(z.tensor(0)(0, 0) == 0.0);
}

TEST_CASE("slice strips the prefix") {
  ParamSet p;
  p.add("old.0.weight", Tensor({1}, 1.0));
  p.add("cur.0.weight", Tensor({1}, 2.0));
  const ParamSet s = p.slice("cur.");
  REQUIRE(s.size() == 1);
  CHECK(s.name(0) == "0.weight");
  CHECK(s.tensor(0)[0] == 2.0);
}
