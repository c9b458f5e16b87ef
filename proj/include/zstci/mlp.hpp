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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zstci/autodiff.hpp"
#include "zstci/param_set.hpp"
#include "zstci/rng.hpp"
#include "zstci/tensor.hpp"

namespace zstci {

using ad::Activation;

Activation parse_activation(std::string_view name);
std::string to_string(Activation act);

// Fully connected network: layers = {in, hidden..., out}. The activation is
// applied after every layer except the last, which stays linear.
//
// Parameters are stored as "<i>.weight" with shape {in_i, out_i} and
// "<i>.bias" with shape {out_i}, two per layer, in layer order.
struct MlpArch {
  std::vector<std::size_t> layers;
  Activation activation = Activation::kRelu;

  std::size_t input_dim() const { return layers.front(); }
  std::size_t output_dim() const { return layers.back(); }
  std::size_t num_layers() const { return layers.size() - 1; }
  bool operator==(const MlpArch&) const = default;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases. With
// zero_output_layer the last layer starts at exactly zero.
ParamSet init_mlp(const MlpArch& arch, Rng& rng, bool zero_output_layer = false);

// Throws DimensionError naming the first layer whose parameters do not match.
void check_mlp(const ParamSet& params, const MlpArch& arch);

// Batch forward pass: (n x in) -> (n x out).
Tensor mlp_forward(const ParamSet& params, const Tensor& input, const MlpArch& arch);

// Same computation recorded on a tape; `vars` are the network's parameters in
// ParamSet order.
ad::Var mlp_forward(ad::Tape& t, std::span<const ad::Var> vars, ad::Var input,
                    const MlpArch& arch);

}  // namespace zstci
