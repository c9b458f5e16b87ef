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

// Experiment configuration.
//
// Files are flat INI text: `[section]` headers followed by `key = value`
// lines; `;` and `#` start comments. Every key has a default, unknown keys
// are rejected, and the effective configuration is rendered back in a fixed
// order so it can be stored next to the results and hashed.
//
// Environment overrides use ZSTCI_<SECTION>__<KEY>, e.g.
// ZSTCI_EMBEDDING__EPOCHS=5.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zstci/embedding.hpp"
#include "zstci/regularizers.hpp"
#include "zstci/task_stream.hpp"
#include "zstci/translation.hpp"

namespace zstci {

enum class Method { kFt, kLwf, kEwc, kMas };
Method parse_method(std::string_view name);
std::string to_string(Method m);

// Which parts of the translation step are active:
//   off:     no translation (plain embedding baseline);
//   zs-only: alignment loss only;
//   ur-only: unified-representation triplet terms only;
//   full:    both.
enum class ZstciMode { kOff, kZsOnly, kUrOnly, kFull };
ZstciMode parse_zstci_mode(std::string_view name);
std::string to_string(ZstciMode m);

// Display label such as "E-LwF+ZSTCI" or "E-FT+UR".
std::string method_label(Method m, ZstciMode z);

enum class StreamKind { kSynthetic, kCsv };

struct StreamSpec {
  StreamKind kind = StreamKind::kSynthetic;
  SyntheticStreamConfig synthetic;
  std::string csv_path;
  bool csv_header = false;
  // Fixed split seed; when unset it is derived from each run's master seed.
  std::optional<std::uint64_t> split_seed;
};

struct ExperimentConfig {
  StreamSpec stream;

  Method method = Method::kFt;
  ZstciMode zstci = ZstciMode::kOff;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "zstci-out";
  std::size_t jobs = 1;
  bool save_snapshots = false;

  std::vector<std::size_t> hidden_dims{128};
  std::size_t embed_dim = 32;
  Activation activation = Activation::kRelu;
  bool normalize_output = true;
  TrainConfig train;

  double lwf_weight = 1.0;
  double ewc_weight = 1e7;
  double mas_weight = 1e6;
  ImportanceConfig importance;
  bool accumulate_importance = false;

  TransitionConfig transition;
};

ExperimentConfig default_config();

// Sets one key given as "section.key". Throws ConfigError for unknown keys or
// unparsable values.
void set_config_value(ExperimentConfig& cfg, std::string_view dotted_key, const std::string& value);

// Applies INI text on top of cfg.
void apply_config_text(ExperimentConfig& cfg, const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Applies ZSTCI_<SECTION>__<KEY> variables from the process environment.
void apply_env_overrides(ExperimentConfig& cfg);
// Same, from an explicit NAME=VALUE list.
void apply_env_overrides(ExperimentConfig& cfg, const std::vector<std::string>& environment);

// Full INI rendering with every key, in a fixed order.
std::string render_config(const ExperimentConfig& cfg);

// Checks every field; throws ConfigError on the first problem.
void validate(const ExperimentConfig& cfg);

// Hex FNV-1a digests of the rendered configuration (without seeds, output
// directory and job count) and of the [stream] section alone.
std::string config_hash(const ExperimentConfig& cfg);
std::string stream_hash(const ExperimentConfig& cfg);

std::uint64_t fnv1a64(std::string_view text);

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace zstci
