// Central finite-difference oracle shared by the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>

#include "zstci/autodiff.hpp"
#include "zstci/param_set.hpp"
#include "zstci/rng.hpp"

namespace zstci::testing {

struct GradCheck {
  double relative_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||, floor)
  double analytic_norm = 0.0;
  double numeric_norm = 0.0;
};

inline GradCheck check_gradient(const ad::LossFn& loss, const ParamSet& params, double step = 1e-5,
                                double floor = 1e-8) {
  const GradRecord analytic = ad::grad(loss, params);
  ParamSet probe = params;
  double diff = 0.0, an = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    auto values = probe.values(i);
    const auto g = analytic.grads.tensor(i).data();
    for (std::size_t k = 0; k < values.size(); ++k) {
      const double keep = values[k];
      values[k] = keep + step;
      const double up = ad::evaluate(loss, probe);
      values[k] = keep - step;
      const double down = ad::evaluate(loss, probe);
      values[k] = keep;
      const double numeric = (up - down) / (2.0 * step);
      diff += (numeric - g[k]) * (numeric - g[k]);
      an += g[k] * g[k];
      nn += numeric * numeric;
    }
  }
  GradCheck out;
  out.analytic_norm = std::sqrt(an);
  out.numeric_norm = std::sqrt(nn);
  out.relative_error = std::sqrt(diff) / std::max({out.analytic_norm, out.numeric_norm, floor});
  return out;
}

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = scale * rng.uniform(-1.0, 1.0);
  return t;
}

}  // namespace zstci::testing
