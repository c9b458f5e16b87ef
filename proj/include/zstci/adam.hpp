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

#include <cstdint>

#include "zstci/param_set.hpp"

namespace zstci {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First and second moment buffers, shaped like the parameters they track.
struct AdamState {
  ParamSet first;
  ParamSet second;
  std::uint64_t step = 0;
};

AdamState make_adam_state(const ParamSet& params);

// One bias-corrected Adam update applied in place.
void adam_step(ParamSet& params, const GradRecord& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace zstci
