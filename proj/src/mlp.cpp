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

#include "zstci/mlp.hpp"

#include <cmath>

#include "zstci/error.hpp"

namespace zstci {

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity" || name == "none") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

std::string to_string(Activation act) {
  switch (act) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "?";
}

namespace {

void check_arch(const MlpArch& arch) {
  if (arch.layers.size() < 2) throw DimensionError("mlp needs at least input and output sizes");
  for (std::size_t d : arch.layers) {
    if (d == 0) throw DimensionError("mlp layer sizes must be positive");
  }
}

}  // namespace

ParamSet init_mlp(const MlpArch& arch, Rng& rng, bool zero_output_layer) {
  check_arch(arch);
  ParamSet params;
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    const std::size_t in = arch.layers[l], out = arch.layers[l + 1];
    const bool zero = zero_output_layer && l + 1 == arch.num_layers();
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Tensor w({in, out});
    Tensor b({out});
    if (!zero) {
      for (double& v : w.data()) v = rng.uniform(-bound, bound);
      for (double& v : b.data()) v = rng.uniform(-bound, bound);
    }
    params.add(std::to_string(l) + ".weight", std::move(w));
    params.add(std::to_string(l) + ".bias", std::move(b));
  }
  return params;
}

void check_mlp(const ParamSet& params, const MlpArch& arch) {
  check_arch(arch);
  if (params.size() != 2 * arch.num_layers()) {
    throw DimensionError("mlp expects " + std::to_string(2 * arch.num_layers()) +
                         " parameter tensors, got " + std::to_string(params.size()));
  }
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    const std::vector<std::size_t> w_shape{arch.layers[l], arch.layers[l + 1]};
    const std::vector<std::size_t> b_shape{arch.layers[l + 1]};
    if (params.tensor(2 * l).shape() != w_shape || params.tensor(2 * l + 1).shape() != b_shape) {
      throw DimensionError("mlp layer " + std::to_string(l) + " ('" + params.name(2 * l) +
                           "') expects weight " + shape_string(w_shape) + ", got " +
                           shape_string(params.tensor(2 * l).shape()));
    }
  }
}

ad::Var mlp_forward(ad::Tape& t, std::span<const ad::Var> vars, ad::Var input,
                    const MlpArch& arch) {
  if (vars.size() != 2 * arch.num_layers()) {
    throw DimensionError("mlp_forward: parameter count does not match architecture");
  }
  if (t.value(input).cols() != arch.input_dim()) {
    throw DimensionError("mlp layer 0 expects input dimension " + std::to_string(arch.input_dim()) +
                         ", got " + std::to_string(t.value(input).cols()));
  }
  ad::Var h = input;
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    if (t.value(vars[2 * l]).rows() != t.value(h).cols()) {
      throw DimensionError("mlp layer " + std::to_string(l) + " input dimension mismatch");
    }
    h = ad::add_bias(t, ad::matmul(t, h, vars[2 * l]), vars[2 * l + 1]);
    if (l + 1 < arch.num_layers()) h = ad::activate(t, h, arch.activation);
  }
  return h;
}

Tensor mlp_forward(const ParamSet& params, const Tensor& input, const MlpArch& arch) {
  check_mlp(params, arch);
  ad::Tape t;
  const auto vars = ad::place(t, params, /*trainable=*/false);
  const ad::Var x = t.constant(input.rank() == 1 ? Tensor({1, input.size()}, {input.data().begin(), input.data().end()}) : input);
  return t.value(mlp_forward(t, vars, x, arch));
}

}  // namespace zstci
