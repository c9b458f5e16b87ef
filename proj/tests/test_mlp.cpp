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

#include "doctest.h"
#include "gradcheck.hpp"
#include "zstci/error.hpp"
#include "zstci/mlp.hpp"

using namespace zstci;

TEST_CASE("init draws within the fan-in bound and names layers") {
  Rng rng(4);
  const MlpArch arch{{5, 7, 3}, Activation::kRelu};
  const ParamSet p = init_mlp(arch, rng);
  REQUIRE(p.size() == 4);
  CHECK(p.name(0) == "0.weight");
  CHECK(p.name(3) == "1.bias");
  CHECK(p.tensor(0).shape() == std::vector<std::size_t>{5, 7});
  for (double v : p.tensor(0).data()) CHECK(std::abs(v) <= 1.0 / std::sqrt(5.0));
  for (double v : p.tensor(2).data()) CHECK(std::abs(v) <= 1.0 / std::sqrt(7.0));
}

TEST_CASE("zero output layer gives an all-zero output") {
  Rng rng(5);
  const MlpArch arch{{3, 8, 3}, Activation::kRelu};
  const ParamSet p = init_mlp(arch, rng, true);
  const Tensor y = mlp_forward(p, testing::random_tensor({4, 3}, rng), arch);
  CHECK(y == Tensor({4, 3}, 0.0));
}

TEST_CASE("forward matches a hand-written two-layer net") {
  const MlpArch arch{{2, 2, 1}, Activation::kTanh};
  ParamSet p;
  p.add("0.weight", Tensor::from_rows({{1.0, -1.0}, {0.5, 2.0}}));
  p.add("0.bias", Tensor({2}, std::vector<double>{0.1, -0.2}));
  p.add("1.weight", Tensor::from_rows({{3.0}, {-1.0}}));
  p.add("1.bias", Tensor({1}, std::vector<double>{0.5}));
  const Tensor x = Tensor::from_rows({{0.3, -0.4}});
  const double h0 = std::tanh(0.3 * 1.0 + -0.4 * 0.5 + 0.1);
  const double h1 = std::tanh(0.3 * -1.0 + -0.4 * 2.0 - 0.2);
  CHECK(mlp_forward(p, x, arch)(0, 0) == doctest::Approx(3.0 * h0 - h1 + 0.5).epsilon(1e-14));
  // Rank-1 input is treated as one row.
  CHECK(mlp_forward(p, Tensor({2}, std::vector<double>{0.3, -0.4}), arch) == mlp_forward(p, x, arch));
}

TEST_CASE("architecture mismatches name the layer") {
  Rng rng(6);
  const MlpArch arch{{3, 4, 2}, Activation::kRelu};
  ParamSet p = init_mlp(arch, rng);
  CHECK_NOTHROW(check_mlp(p, arch));
  const MlpArch other{{3, 5, 2}, Activation::kRelu};
  CHECK_THROWS_WITH_AS(check_mlp(p, other), doctest::Contains("layer 0"), DimensionError);
  CHECK_THROWS_AS(mlp_forward(p, Tensor({2, 4}, 0.0), arch), DimensionError);
  CHECK_THROWS_AS(parse_activation("gelu"), ConfigError);
  CHECK(parse_activation("none") == Activation::kIdentity);
}

TEST_CASE("mlp parameters pass gradient checks") {
  Rng rng(7);
  for (auto act : {Activation::kRelu, Activation::kTanh}) {
    const MlpArch arch{{3, 6, 2}, act};
    const ParamSet p = init_mlp(arch, rng);
    const Tensor x = testing::random_tensor({5, 3}, rng);
    const ad::LossFn f = [&](ad::Tape& t, std::span<const ad::Var> v) {
      return ad::sum_squares(t, mlp_forward(t, v, t.constant(x), arch));
    };
    CHECK(testing::check_gradient(f, p).relative_error < 1e-4);
  }
}
