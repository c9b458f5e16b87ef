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

#include "zstci/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "zstci/error.hpp"

extern char** environ;

namespace zstci {

Method parse_method(std::string_view name) {
  if (name == "ft") return Method::kFt;
  if (name == "lwf") return Method::kLwf;
  if (name == "ewc") return Method::kEwc;
  if (name == "mas") return Method::kMas;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected ft, lwf, ewc or mas)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kFt: return "ft";
    case Method::kLwf: return "lwf";
    case Method::kEwc: return "ewc";
    case Method::kMas: return "mas";
  }
  return "?";
}

ZstciMode parse_zstci_mode(std::string_view name) {
  if (name == "off") return ZstciMode::kOff;
  if (name == "zs-only") return ZstciMode::kZsOnly;
  if (name == "ur-only") return ZstciMode::kUrOnly;
  if (name == "full") return ZstciMode::kFull;
  throw ConfigError("unknown zstci mode '" + std::string(name) +
                    "' (expected off, zs-only, ur-only or full)");
}

std::string to_string(ZstciMode m) {
  switch (m) {
    case ZstciMode::kOff: return "off";
    case ZstciMode::kZsOnly: return "zs-only";
    case ZstciMode::kUrOnly: return "ur-only";
    case ZstciMode::kFull: return "full";
  }
  return "?";
}

std::string method_label(Method m, ZstciMode z) {
  std::string base;
  switch (m) {
    case Method::kFt: base = "E-FT"; break;
    case Method::kLwf: base = "E-LwF"; break;
    case Method::kEwc: base = "E-EWC"; break;
    case Method::kMas: base = "E-MAS"; break;
  }
  switch (z) {
    case ZstciMode::kOff: return base;
    case ZstciMode::kZsOnly: return base + "+ZS";
    case ZstciMode::kUrOnly: return base + "+UR";
    case ZstciMode::kFull: return base + "+ZSTCI";
  }
  return base;
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const std::string t = trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const std::string t = trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

std::size_t to_size(const std::string& key, const std::string& s) {
  return static_cast<std::size_t>(to_u64(key, s));
}

bool to_bool(const std::string& key, const std::string& s) {
  std::string t = trim(s);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + s + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

struct Key {
  const char* section;
  const char* name;
  bool hashed;
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define ZSTCI_KEY(SECTION, NAME, HASHED, SETTER, GETTER)                                          \
  Key {                                                                                            \
    SECTION, NAME, HASHED,                                                                         \
        [](ExperimentConfig& c, const std::string& k, const std::string& v) { (void)k; SETTER; }, \
        [](const ExperimentConfig& c) { return GETTER; }                                           \
  }

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = {
      ZSTCI_KEY("stream", "kind", true,
                {
                  const std::string t = trim(v);
                  if (t == "synthetic") c.stream.kind = StreamKind::kSynthetic;
                  else if (t == "csv") c.stream.kind = StreamKind::kCsv;
                  else throw ConfigError(k + ": expected synthetic or csv, got '" + v + "'");
                },
                std::string(c.stream.kind == StreamKind::kSynthetic ? "synthetic" : "csv")),
      ZSTCI_KEY("stream", "num_tasks", true, c.stream.synthetic.num_tasks = to_size(k, v),
                fmt(c.stream.synthetic.num_tasks)),
      ZSTCI_KEY("stream", "classes_per_task", true,
                c.stream.synthetic.classes_per_task = to_size(k, v),
                fmt(c.stream.synthetic.classes_per_task)),
      ZSTCI_KEY("stream", "samples_per_class", true,
                c.stream.synthetic.samples_per_class = to_size(k, v),
                fmt(c.stream.synthetic.samples_per_class)),
      ZSTCI_KEY("stream", "input_dim", true, c.stream.synthetic.input_dim = to_size(k, v),
                fmt(c.stream.synthetic.input_dim)),
      ZSTCI_KEY("stream", "cluster_spread", true,
                c.stream.synthetic.cluster_spread = to_double(k, v),
                fmt(c.stream.synthetic.cluster_spread)),
      ZSTCI_KEY("stream", "csv_path", true, c.stream.csv_path = trim(v), c.stream.csv_path),
      ZSTCI_KEY("stream", "csv_header", true, c.stream.csv_header = to_bool(k, v),
                fmt(c.stream.csv_header)),
      ZSTCI_KEY("stream", "split_seed", true,
                {
                  const std::string t = trim(v);
                  if (t.empty()) c.stream.split_seed.reset();
                  else c.stream.split_seed = to_u64(k, t);
                },
                c.stream.split_seed ? std::to_string(*c.stream.split_seed) : std::string()),

      ZSTCI_KEY("experiment", "method", true, c.method = parse_method(trim(v)), to_string(c.method)),
      ZSTCI_KEY("experiment", "zstci", true, c.zstci = parse_zstci_mode(trim(v)),
                to_string(c.zstci)),
      ZSTCI_KEY("experiment", "seeds", false, c.seeds = parse_seed_list(v), join(c.seeds)),
      ZSTCI_KEY("experiment", "output_dir", false, c.output_dir = trim(v), c.output_dir),
      ZSTCI_KEY("experiment", "jobs", false, c.jobs = to_size(k, v), fmt(c.jobs)),
      ZSTCI_KEY("experiment", "save_snapshots", false, c.save_snapshots = to_bool(k, v),
                fmt(c.save_snapshots)),

      ZSTCI_KEY("embedding", "hidden_dims", true,
                {
                  c.hidden_dims.clear();
                  for (const auto& item : split_list(v)) c.hidden_dims.push_back(to_size(k, item));
                },
                join(c.hidden_dims)),
      ZSTCI_KEY("embedding", "embed_dim", true, c.embed_dim = to_size(k, v), fmt(c.embed_dim)),
      ZSTCI_KEY("embedding", "activation", true, c.activation = parse_activation(trim(v)),
                to_string(c.activation)),
      ZSTCI_KEY("embedding", "normalize_output", true, c.normalize_output = to_bool(k, v),
                fmt(c.normalize_output)),
      ZSTCI_KEY("embedding", "epochs", true, c.train.epochs = to_size(k, v), fmt(c.train.epochs)),
      ZSTCI_KEY("embedding", "batch_size", true, c.train.batch_size = to_size(k, v),
                fmt(c.train.batch_size)),
      ZSTCI_KEY("embedding", "lr", true, c.train.lr = to_double(k, v), fmt(c.train.lr)),
      ZSTCI_KEY("embedding", "margin", true, c.train.margin = to_double(k, v), fmt(c.train.margin)),
      ZSTCI_KEY("embedding", "mining", true, c.train.mining = parse_mining_policy(trim(v)),
                to_string(c.train.mining)),

      ZSTCI_KEY("regularizer", "lwf_weight", true, c.lwf_weight = to_double(k, v), fmt(c.lwf_weight)),
      ZSTCI_KEY("regularizer", "ewc_weight", true, c.ewc_weight = to_double(k, v), fmt(c.ewc_weight)),
      ZSTCI_KEY("regularizer", "mas_weight", true, c.mas_weight = to_double(k, v), fmt(c.mas_weight)),
      ZSTCI_KEY("regularizer", "importance_batches", true,
                c.importance.num_batches = to_size(k, v), fmt(c.importance.num_batches)),
      ZSTCI_KEY("regularizer", "importance_batch_size", true,
                c.importance.batch_size = to_size(k, v), fmt(c.importance.batch_size)),
      ZSTCI_KEY("regularizer", "accumulate", true, c.accumulate_importance = to_bool(k, v),
                fmt(c.accumulate_importance)),

      ZSTCI_KEY("transition", "epochs", true, c.transition.epochs = to_size(k, v),
                fmt(c.transition.epochs)),
      ZSTCI_KEY("transition", "batch_size", true, c.transition.batch_size = to_size(k, v),
                fmt(c.transition.batch_size)),
      ZSTCI_KEY("transition", "lr", true, c.transition.lr = to_double(k, v), fmt(c.transition.lr)),
      ZSTCI_KEY("transition", "hidden_dim", true, c.transition.hidden_dim = to_size(k, v),
                fmt(c.transition.hidden_dim)),
      ZSTCI_KEY("transition", "activation", true,
                c.transition.activation = parse_activation(trim(v)),
                to_string(c.transition.activation)),
      ZSTCI_KEY("transition", "tri_weight", true, c.transition.tri_weight = to_double(k, v),
                fmt(c.transition.tri_weight)),
      ZSTCI_KEY("transition", "beta", true, c.transition.beta = to_double(k, v),
                fmt(c.transition.beta)),
      ZSTCI_KEY("transition", "delta", true, c.transition.delta = to_double(k, v),
                fmt(c.transition.delta)),
      ZSTCI_KEY("transition", "align_weight", true, c.transition.align_weight = to_double(k, v),
                fmt(c.transition.align_weight)),
      ZSTCI_KEY("transition", "margin", true, c.transition.margin = to_double(k, v),
                fmt(c.transition.margin)),
      ZSTCI_KEY("transition", "chain", true, c.transition.chain = parse_chain_mode(trim(v)),
                to_string(c.transition.chain)),
      ZSTCI_KEY("transition", "zero_init", true, c.transition.zero_init = to_bool(k, v),
                fmt(c.transition.zero_init)),
  };
  return keys;
}

#undef ZSTCI_KEY

std::string render(const ExperimentConfig& cfg, bool hashed_only, const char* only_section) {
  std::ostringstream out;
  std::string current;
  for (const Key& key : registry()) {
    if (hashed_only && !key.hashed) continue;
    if (only_section && std::string_view(key.section) != only_section) continue;
    if (current != key.section) {
      if (!current.empty()) out << '\n';
      out << '[' << key.section << "]\n";
      current = key.section;
    }
    out << key.name << " = " << key.get(cfg) << '\n';
  }
  return out.str();
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split_list(text)) seeds.push_back(to_u64("seeds", item));
  if (seeds.empty()) throw ConfigError("seeds: expected at least one seed");
  return seeds;
}

void set_config_value(ExperimentConfig& cfg, std::string_view dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string_view::npos) {
    throw ConfigError("config key '" + std::string(dotted_key) + "' must be section.key");
  }
  const std::string_view section = dotted_key.substr(0, dot);
  const std::string_view name = dotted_key.substr(dot + 1);
  for (const Key& key : registry()) {
    if (section == key.section && name == key.name) {
      key.set(cfg, std::string(dotted_key), value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(dotted_key) + "'");
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
  // Boost's INI reader only knows ';' comments.
  std::istringstream raw(text);
  std::ostringstream cleaned;
  for (std::string line; std::getline(raw, line);) {
    const std::string t = trim(line);
    cleaned << (t.starts_with('#') ? std::string() : line) << '\n';
  }
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(cleaned.str());
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config: " + e.message() + " at line " + std::to_string(e.line()));
  }
  for (const auto& [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty()) {
      throw ConfigError("config key '" + section + "' must sit inside a [section]");
    }
    for (const auto& [name, node] : entries) {
      set_config_value(cfg, section + "." + name, node.data());
    }
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg = default_config();
  apply_config_text(cfg, buf.str());
  return cfg;
}

void apply_env_overrides(ExperimentConfig& cfg, const std::vector<std::string>& environment) {
  constexpr std::string_view kPrefix = "ZSTCI_";
  for (const std::string& entry : environment) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(0, eq);
    if (!name.starts_with(kPrefix)) continue;
    const auto sep = name.find("__", kPrefix.size());
    if (sep == std::string::npos) continue;
    std::string section = name.substr(kPrefix.size(), sep - kPrefix.size());
    std::string key = name.substr(sep + 2);
    for (auto* s : {&section, &key}) {
      std::transform(s->begin(), s->end(), s->begin(), [](unsigned char c) { return std::tolower(c); });
    }
    set_config_value(cfg, section + "." + key, entry.substr(eq + 1));
  }
}

void apply_env_overrides(ExperimentConfig& cfg) {
  std::vector<std::string> env;
  for (char** e = environ; e && *e; ++e) env.emplace_back(*e);
  std::sort(env.begin(), env.end());
  apply_env_overrides(cfg, env);
}

std::string render_config(const ExperimentConfig& cfg) { return render(cfg, false, nullptr); }

void validate(const ExperimentConfig& cfg) {
  const auto& s = cfg.stream;
  if (s.synthetic.num_tasks < 1) throw ConfigError("stream.num_tasks must be >= 1");
  if (s.kind == StreamKind::kSynthetic) {
    if (s.synthetic.classes_per_task < 2) throw ConfigError("stream.classes_per_task must be >= 2");
    if (s.synthetic.samples_per_class < 2) throw ConfigError("stream.samples_per_class must be >= 2");
    if (s.synthetic.input_dim < 1) throw ConfigError("stream.input_dim must be >= 1");
    if (!(s.synthetic.cluster_spread >= 0.0)) throw ConfigError("stream.cluster_spread must be >= 0");
  } else if (s.csv_path.empty()) {
    throw ConfigError("stream.csv_path is required when stream.kind = csv");
  }
  if (cfg.seeds.empty()) throw ConfigError("experiment.seeds must not be empty");
  if (cfg.jobs < 1) throw ConfigError("experiment.jobs must be >= 1");
  if (cfg.output_dir.empty()) throw ConfigError("experiment.output_dir must not be empty");
  if (cfg.embed_dim < 1) throw ConfigError("embedding.embed_dim must be >= 1");
  for (std::size_t h : cfg.hidden_dims) {
    if (h < 1) throw ConfigError("embedding.hidden_dims entries must be >= 1");
  }
  validate(cfg.train);
  if (cfg.lwf_weight < 0 || cfg.ewc_weight < 0 || cfg.mas_weight < 0) {
    throw ConfigError("regularizer weights must be >= 0");
  }
  if (cfg.importance.batch_size < 1) throw ConfigError("regularizer.importance_batch_size must be >= 1");
  validate(cfg.transition);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) { return hex(fnv1a64(render(cfg, true, nullptr))); }

std::string stream_hash(const ExperimentConfig& cfg) {
  return hex(fnv1a64(render(cfg, true, "stream")));
}

}  // namespace zstci
