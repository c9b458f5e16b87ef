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

#include "zstci/param_set.hpp"

#include "zstci/error.hpp"

namespace zstci {

void ParamSet::add(std::string name, Tensor value) {
  if (contains(name)) throw ProtocolError("duplicate parameter name '" + name + "'");
  entries_.push_back({std::move(name), std::move(value)});
}

const Tensor& ParamSet::at(std::string_view name) const {
  auto i = index_of(name);
  if (!i) throw ProtocolError("no parameter named '" + std::string(name) + "'");
  return entries_[*i].value;
}

std::optional<std::size_t> ParamSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

void ParamSet::assign(std::size_t i, Tensor value) {
  Entry& e = entries_.at(i);
  if (!e.value.same_shape(value)) {
    throw DimensionError("parameter '" + e.name + "' has shape " + shape_string(e.value.shape()) +
                         ", cannot assign " + shape_string(value.shape()));
  }
  e.value = std::move(value);
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name ||
        !entries_[i].value.same_shape(other.entries_[i].value)) {
      return false;
    }
  }
  return true;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& e : entries_) out.add(e.name, Tensor(e.value.shape(), 0.0));
  return out;
}

ParamSet ParamSet::slice(std::string_view prefix) const {
  ParamSet out;
  for (const auto& e : entries_) {
    if (e.name.starts_with(prefix)) out.add(e.name.substr(prefix.size()), e.value);
  }
  return out;
}

bool ParamSet::operator==(const ParamSet& other) const { return entries_ == other.entries_; }

}  // namespace zstci
