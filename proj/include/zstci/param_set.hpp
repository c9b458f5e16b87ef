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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zstci/tensor.hpp"

namespace zstci {

// Ordered, uniquely named collection of tensors. Shapes are fixed once an
// entry is added; only values may change afterwards.
class ParamSet {
 public:
  ParamSet() = default;

  void add(std::string name, Tensor value);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const std::string& name(std::size_t i) const { return entries_.at(i).name; }
  const Tensor& tensor(std::size_t i) const { return entries_.at(i).value; }
  const Tensor& at(std::string_view name) const;
  std::optional<std::size_t> index_of(std::string_view name) const;
  bool contains(std::string_view name) const { return index_of(name).has_value(); }

  std::span<double> values(std::size_t i) { return entries_.at(i).value.data(); }

  // Replace the values of entry i; the new tensor must have the same shape.
  void assign(std::size_t i, Tensor value);

  // Total number of scalars across all entries.
  std::size_t scalar_count() const;

  // Same names and shapes, in the same order.
  bool same_layout(const ParamSet& other) const;

  ParamSet zeros_like() const;

  // Entries whose names start with `prefix`, with the prefix stripped.
  ParamSet slice(std::string_view prefix) const;

  bool operator==(const ParamSet& other) const;

 private:
  struct Entry {
    std::string name;
    Tensor value;
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> entries_;
};

// Gradients of a scalar loss with respect to every entry of a ParamSet.
struct GradRecord {
  double loss = 0.0;
  ParamSet grads;
};

}  // namespace zstci
