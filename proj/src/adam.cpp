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

#include "zstci/adam.hpp"

#include <cmath>

#include "zstci/error.hpp"

namespace zstci {

AdamState make_adam_state(const ParamSet& params) {
  return AdamState{params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(ParamSet& params, const GradRecord& grads, AdamState& state, const AdamConfig& cfg) {
  if (!(cfg.lr >= 0.0)) throw ConfigError("adam learning rate must be >= 0");
  if (!params.same_layout(grads.grads)) throw DimensionError("adam_step: gradient layout mismatch");
  if (!params.same_layout(state.first) || !params.same_layout(state.second)) {
    throw DimensionError("adam_step: optimizer state layout mismatch");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params.values(i);
    auto m = state.first.values(i);
    auto v = state.second.values(i);
    const auto g = grads.grads.tensor(i).data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      p[j] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

}  // namespace zstci
