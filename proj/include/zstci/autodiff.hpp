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

// Reverse-mode gradients over a fixed operator set.
//
// A Tape records values produced by the operators below, each with its own
// hand-written backward rule. There is no tracing of arbitrary code: every
// loss in the library is composed from matmul, bias add, elementwise
// activations, row normalization, pairwise squared distances, triplet
// hinges, L1/L2 norms and weighted squared differences.
//
// Conventions:
//   * scalars are one-element tensors of shape {1};
//   * the hinge max(0, x) has subgradient 0 at x == 0, as do |x| at 0 and
//     the Frobenius norm at the zero matrix;
//   * every forward result is checked for finiteness and a NumericError
//     naming the operator is raised otherwise.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "zstci/param_set.hpp"
#include "zstci/tensor.hpp"
#include "zstci/triplet.hpp"

namespace zstci::ad {

struct Var {
  std::size_t id = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& grad_out)>;

  Var constant(Tensor value);
  Var parameter(Tensor value);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  // Gradient accumulated by the last backward(); zeros if v was not reached.
  Tensor gradient(Var v) const;

  // Seeds d(loss)/d(loss) = 1 and runs every recorded backward rule in
  // reverse creation order.
  void backward(Var loss);

  // Operator plumbing.
  Var record(const char* op, Tensor value, bool requires_grad, Backward backward);
  Tensor& grad_buffer(Var v);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

enum class Activation { kRelu, kTanh, kIdentity };

// (n x k) * (k x m).
Var matmul(Tape& t, Var a, Var b);
// Adds a length-m bias to every row of an (n x m) matrix.
Var add_bias(Tape& t, Var x, Var bias);
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double factor);
Var relu(Tape& t, Var x);
Var tanh(Tape& t, Var x);
Var activate(Tape& t, Var x, Activation act);

// Each row divided by max(||row||_2, eps).
Var normalize_rows(Tape& t, Var x, double eps = 1e-12);

// D[i][j] = ||a_i - b_j||^2 for (n x d) a and (m x d) b.
Var pairwise_sq_dist(Tape& t, Var a, Var b);

// Mean over triplets of max(0, pos[a][p] - neg[a][n] + margin). With no
// positive matrix the positive distance is taken as 0. Empty triplet lists
// give a constant 0.
Var triplet_hinge(Tape& t, std::optional<Var> pos, Var neg, std::span<const Triplet> triplets,
                  double margin);

Var abs_sum(Tape& t, Var x);
Var sum_squares(Tape& t, Var x);
Var frobenius_norm(Tape& t, Var x);

// 0.5 * sum_p w_p (x_p - ref_p)^2 with constant ref and weights.
Var weighted_sq_diff(Tape& t, Var x, const Tensor& ref, const Tensor& weights);

// Loss closure over parameters placed on a tape in ParamSet order.
using LossFn = std::function<Var(Tape&, std::span<const Var>)>;

// Loss value and exact gradients with respect to every entry of params.
GradRecord grad(const LossFn& loss, const ParamSet& params);

// Loss value only.
double evaluate(const LossFn& loss, const ParamSet& params);

// Places every entry of params on the tape as a parameter (or constant).
std::vector<Var> place(Tape& t, const ParamSet& params, bool trainable = true);

}  // namespace zstci::ad
