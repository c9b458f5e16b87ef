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

// Text snapshot format shared by models, importance maps and prototype
// memories:
//
//   ZSTCI-SNAPSHOT 1
//   kind <model|importance|memory>
//   meta <key> <value>                      (zero or more)
//   tensor <name> <d1,d2,...> <v1> <v2> ...  (model, importance)
//   prototype <class> <origin_task> <v1> ... (memory)
//   end
//
// Values are written in shortest round-trip form so a reload is bit-exact.

#pragma once

#include <filesystem>
#include <iosfwd>

#include "zstci/embedding.hpp"
#include "zstci/regularizers.hpp"
#include "zstci/translation.hpp"

namespace zstci {

inline constexpr const char* kSnapshotMagic = "ZSTCI-SNAPSHOT";
inline constexpr int kSnapshotVersion = 1;

void write_model(std::ostream& out, const EmbeddingModel& model);
EmbeddingModel read_model(std::istream& in);

void write_importance(std::ostream& out, const ImportanceMap& importance);
ImportanceMap read_importance(std::istream& in);

void write_memory(std::ostream& out, const PrototypeMemory& memory);
PrototypeMemory read_memory(std::istream& in);

void save_model(const std::filesystem::path& path, const EmbeddingModel& model);
EmbeddingModel load_model(const std::filesystem::path& path);

}  // namespace zstci
