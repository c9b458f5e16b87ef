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

#include "zstci/autodiff.hpp"

#include <cmath>
#include <string>

#include "zstci/error.hpp"

namespace zstci::ad {

Var Tape::constant(Tensor value) { return record("constant", std::move(value), false, {}); }

Var Tape::parameter(Tensor value) { return record("parameter", std::move(value), true, {}); }

Tensor Tape::gradient(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.has_grad) return n.grad;
  return Tensor(n.value.shape(), 0.0);
}

Var Tape::record(const char* op, Tensor value, bool requires_grad, Backward backward) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op);
  }
  nodes_.push_back({std::move(value), Tensor(), requires_grad, false, std::move(backward)});
  return Var{nodes_.size() - 1};
}

Tensor& Tape::grad_buffer(Var v) {
  Node& n = nodes_.at(v.id);
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape(), 0.0);
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(Var loss) {
  if (value(loss).size() != 1) {
    throw DimensionError("backward() needs a scalar loss, got shape " +
                         shape_string(value(loss).shape()));
  }
  for (auto& n : nodes_) n.has_grad = false;
  grad_buffer(loss)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.requires_grad || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

namespace {

void require(bool ok, const char* op, const std::string& what) {
  if (!ok) throw DimensionError(std::string(op) + ": " + what);
}

bool needs_grad(const Tape& t, Var a) { return t.requires_grad(a); }
bool needs_grad(const Tape& t, Var a, Var b) { return t.requires_grad(a) || t.requires_grad(b); }

}  // namespace

Var matmul(Tape& t, Var a, Var b) {
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
  require(B.rows() == k, "matmul",
          "inner dimensions differ: " + shape_string(A.shape()) + " x " + shape_string(B.shape()));
  Tensor out = Tensor::matrix(n, m);
  const double* pa = A.data().data();
  const double* pb = B.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = pa[i * k + p];
      const double* brow = pb + p * m;
      double* orow = po + i * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += aip * brow[j];
    }
  }
  return t.record("matmul", std::move(out), needs_grad(t, a, b), [a, b](Tape& t, const Tensor& g) {
    const Tensor& A = t.value(a);
    const Tensor& B = t.value(b);
    const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
    const double* pg = g.data().data();
    if (t.requires_grad(a)) {
      double* pga = t.grad_buffer(a).data().data();
      const double* pb = B.data().data();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < m; ++j) s += pg[i * m + j] * pb[p * m + j];
          pga[i * k + p] += s;
        }
      }
    }
    if (t.requires_grad(b)) {
      double* pgb = t.grad_buffer(b).data().data();
      const double* pa = A.data().data();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = pa[i * k + p];
          for (std::size_t j = 0; j < m; ++j) pgb[p * m + j] += aip * pg[i * m + j];
        }
      }
    }
  });
}

Var add_bias(Tape& t, Var x, Var bias) {
  const Tensor& X = t.value(x);
  const Tensor& b = t.value(bias);
  require(b.size() == X.cols(), "add_bias",
          "bias " + shape_string(b.shape()) + " does not fit " + shape_string(X.shape()));
  Tensor out = X;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += b[j];
  }
  return t.record("add_bias", std::move(out), needs_grad(t, x, bias),
                  [x, bias](Tape& t, const Tensor& g) {
                    if (t.requires_grad(x)) {
                      auto gx = t.grad_buffer(x).data();
                      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                    }
                    if (t.requires_grad(bias)) {
                      Tensor& gb = t.grad_buffer(bias);
                      for (std::size_t i = 0; i < g.rows(); ++i) {
                        auto r = g.row(i);
                        for (std::size_t j = 0; j < r.size(); ++j) gb[j] += r[j];
                      }
                    }
                  });
}

namespace {

Var elementwise_sum(Tape& t, Var a, Var b, double sign, const char* op) {
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  require(A.same_shape(B), op, shape_string(A.shape()) + " vs " + shape_string(B.shape()));
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * B[i];
  return t.record(op, std::move(out), needs_grad(t, a, b), [a, b, sign](Tape& t, const Tensor& g) {
    if (t.requires_grad(a)) {
      auto ga = t.grad_buffer(a).data();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (t.requires_grad(b)) {
      auto gb = t.grad_buffer(b).data();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += sign * g[i];
    }
  });
}

}  // namespace

Var add(Tape& t, Var a, Var b) { return elementwise_sum(t, a, b, 1.0, "add"); }

Var sub(Tape& t, Var a, Var b) { return elementwise_sum(t, a, b, -1.0, "sub"); }

Var scale(Tape& t, Var a, double factor) {
  Tensor out = t.value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor;
  return t.record("scale", std::move(out), needs_grad(t, a), [a, factor](Tape& t, const Tensor& g) {
    auto ga = t.grad_buffer(a).data();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
}

Var relu(Tape& t, Var x) {
  Tensor out = t.value(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  return t.record("relu", std::move(out), needs_grad(t, x), [x](Tape& t, const Tensor& g) {
    const Tensor& X = t.value(x);
    auto gx = t.grad_buffer(x).data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (X[i] > 0.0) gx[i] += g[i];
    }
  });
}

Var tanh(Tape& t, Var x) {
  Tensor out = t.value(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  const Var self{t.size()};
  return t.record("tanh", std::move(out), needs_grad(t, x), [x, self](Tape& t, const Tensor& g) {
    const Tensor& Y = t.value(self);
    auto gx = t.grad_buffer(x).data();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0 - Y[i] * Y[i]);
  });
}

Var activate(Tape& t, Var x, Activation act) {
  switch (act) {
    case Activation::kRelu: return relu(t, x);
    case Activation::kTanh: return tanh(t, x);
    case Activation::kIdentity: return x;
  }
  return x;
}

Var normalize_rows(Tape& t, Var x, double eps) {
  const Tensor& X = t.value(x);
  Tensor out = X;
  std::vector<double> denom(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    auto r = out.row(i);
    double s = 0.0;
    for (double v : r) s += v * v;
    denom[i] = std::max(std::sqrt(s), eps);
    for (double& v : r) v /= denom[i];
  }
  const Var y{t.size()};
  return t.record("normalize_rows", std::move(out), needs_grad(t, x),
                  [x, y, eps, denom = std::move(denom)](Tape& t, const Tensor& g) {
                    const Tensor& Y = t.value(y);
                    Tensor& gx = t.grad_buffer(x);
                    for (std::size_t i = 0; i < Y.rows(); ++i) {
                      auto yr = Y.row(i);
                      auto gr = g.row(i);
                      auto out = gx.row(i);
                      if (denom[i] > eps) {
                        double dot = 0.0;
                        for (std::size_t j = 0; j < yr.size(); ++j) dot += yr[j] * gr[j];
                        for (std::size_t j = 0; j < yr.size(); ++j) {
                          out[j] += (gr[j] - yr[j] * dot) / denom[i];
                        }
                      } else {
                        for (std::size_t j = 0; j < yr.size(); ++j) out[j] += gr[j] / eps;
                      }
                    }
                  });
}

Var pairwise_sq_dist(Tape& t, Var a, Var b) {
  const Tensor& A = t.value(a);
  const Tensor& B = t.value(b);
  require(A.cols() == B.cols(), "pairwise_sq_dist",
          shape_string(A.shape()) + " vs " + shape_string(B.shape()));
  Tensor out = Tensor::matrix(A.rows(), B.rows());
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t j = 0; j < B.rows(); ++j) out(i, j) = squared_distance(A.row(i), B.row(j));
  }
  return t.record("pairwise_sq_dist", std::move(out), needs_grad(t, a, b),
                  [a, b](Tape& t, const Tensor& g) {
                    const Tensor& A = t.value(a);
                    const Tensor& B = t.value(b);
                    const std::size_t d = A.cols();
                    const bool ga_needed = t.requires_grad(a);
                    const bool gb_needed = t.requires_grad(b);
                    for (std::size_t i = 0; i < A.rows(); ++i) {
                      for (std::size_t j = 0; j < B.rows(); ++j) {
                        const double gij = g(i, j);
                        if (gij == 0.0) continue;
                        auto ar = A.row(i);
                        auto br = B.row(j);
                        if (ga_needed) {
                          auto out = t.grad_buffer(a).row(i);
                          for (std::size_t c = 0; c < d; ++c) out[c] += 2.0 * gij * (ar[c] - br[c]);
                        }
                        if (gb_needed) {
                          auto out = t.grad_buffer(b).row(j);
                          for (std::size_t c = 0; c < d; ++c) out[c] -= 2.0 * gij * (ar[c] - br[c]);
                        }
                      }
                    }
                  });
}

Var triplet_hinge(Tape& t, std::optional<Var> pos, Var neg, std::span<const Triplet> triplets,
                  double margin) {
  if (triplets.empty()) return t.constant(Tensor::scalar(0.0));
  const Tensor& N = t.value(neg);
  const Tensor* P = pos ? &t.value(*pos) : nullptr;
  std::vector<Triplet> active;
  double sum = 0.0;
  for (const Triplet& tr : triplets) {
    require(tr.anchor < N.rows() && tr.negative < N.cols(), "triplet_hinge", "negative index out of range");
    double dp = 0.0;
    if (P) {
      require(tr.anchor < P->rows() && tr.positive < P->cols(), "triplet_hinge",
              "positive index out of range");
      dp = (*P)(tr.anchor, tr.positive);
    }
    const double h = dp - N(tr.anchor, tr.negative) + margin;
    if (h > 0.0) {
      sum += h;
      active.push_back(tr);
    }
  }
  const double inv = 1.0 / static_cast<double>(triplets.size());
  const bool rg = t.requires_grad(neg) || (pos && t.requires_grad(*pos));
  return t.record("triplet_hinge", Tensor::scalar(sum * inv), rg,
                  [pos, neg, inv, active = std::move(active)](Tape& t, const Tensor& g) {
                    const double w = g[0] * inv;
                    if (pos && t.requires_grad(*pos)) {
                      Tensor& gp = t.grad_buffer(*pos);
                      for (const Triplet& tr : active) gp(tr.anchor, tr.positive) += w;
                    }
                    if (t.requires_grad(neg)) {
                      Tensor& gn = t.grad_buffer(neg);
                      for (const Triplet& tr : active) gn(tr.anchor, tr.negative) -= w;
                    }
                  });
}

Var abs_sum(Tape& t, Var x) {
  double s = 0.0;
  for (double v : t.value(x).data()) s += std::abs(v);
  return t.record("abs_sum", Tensor::scalar(s), needs_grad(t, x), [x](Tape& t, const Tensor& g) {
    const Tensor& X = t.value(x);
    auto gx = t.grad_buffer(x).data();
    for (std::size_t i = 0; i < X.size(); ++i) {
      if (X[i] > 0.0) gx[i] += g[0];
      else if (X[i] < 0.0) gx[i] -= g[0];
    }
  });
}

Var sum_squares(Tape& t, Var x) {
  double s = 0.0;
  for (double v : t.value(x).data()) s += v * v;
  return t.record("sum_squares", Tensor::scalar(s), needs_grad(t, x), [x](Tape& t, const Tensor& g) {
    const Tensor& X = t.value(x);
    auto gx = t.grad_buffer(x).data();
    for (std::size_t i = 0; i < X.size(); ++i) gx[i] += 2.0 * g[0] * X[i];
  });
}

Var frobenius_norm(Tape& t, Var x) {
  double s = 0.0;
  for (double v : t.value(x).data()) s += v * v;
  const double norm = std::sqrt(s);
  return t.record("frobenius_norm", Tensor::scalar(norm), needs_grad(t, x),
                  [x, norm](Tape& t, const Tensor& g) {
                    if (norm == 0.0) return;
                    const Tensor& X = t.value(x);
                    auto gx = t.grad_buffer(x).data();
                    for (std::size_t i = 0; i < X.size(); ++i) gx[i] += g[0] * X[i] / norm;
                  });
}

Var weighted_sq_diff(Tape& t, Var x, const Tensor& ref, const Tensor& weights) {
  const Tensor& X = t.value(x);
  require(X.same_shape(ref) && X.same_shape(weights), "weighted_sq_diff",
          "shapes " + shape_string(X.shape()) + ", " + shape_string(ref.shape()) + ", " +
              shape_string(weights.shape()));
  double s = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double d = X[i] - ref[i];
    s += weights[i] * d * d;
  }
  return t.record("weighted_sq_diff", Tensor::scalar(0.5 * s), needs_grad(t, x),
                  [x, ref, weights](Tape& t, const Tensor& g) {
                    const Tensor& X = t.value(x);
                    auto gx = t.grad_buffer(x).data();
                    for (std::size_t i = 0; i < X.size(); ++i) {
                      gx[i] += g[0] * weights[i] * (X[i] - ref[i]);
                    }
                  });
}

std::vector<Var> place(Tape& t, const ParamSet& params, bool trainable) {
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    vars.push_back(trainable ? t.parameter(params.tensor(i)) : t.constant(params.tensor(i)));
  }
  return vars;
}

GradRecord grad(const LossFn& loss, const ParamSet& params) {
  Tape t;
  const std::vector<Var> vars = place(t, params);
  const Var out = loss(t, vars);
  t.backward(out);
  GradRecord rec;
  rec.loss = t.value(out).item();
  for (std::size_t i = 0; i < params.size(); ++i) rec.grads.add(params.name(i), t.gradient(vars[i]));
  return rec;
}

double evaluate(const LossFn& loss, const ParamSet& params) {
  Tape t;
  const std::vector<Var> vars = place(t, params, /*trainable=*/false);
  return t.value(loss(t, vars)).item();
}

}  // namespace zstci::ad
