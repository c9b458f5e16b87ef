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

#include "zstci/snapshot.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "zstci/error.hpp"

namespace zstci {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("snapshot: bad number '" + s + "'");
  return v;
}

std::size_t parse_size(const std::string& s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("snapshot: bad integer '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

void write_header(std::ostream& out, const char* kind) {
  out << kSnapshotMagic << ' ' << kSnapshotVersion << '\n' << "kind " << kind << '\n';
}

void write_tensors(std::ostream& out, const ParamSet& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& t = params.tensor(i);
    out << "tensor " << params.name(i) << ' ';
    for (std::size_t d = 0; d < t.rank(); ++d) out << (d ? "," : "") << t.shape()[d];
    for (double v : t.data()) out << ' ' << format_double(v);
    out << '\n';
  }
}

struct Parsed {
  std::string kind;
  std::map<std::string, std::string> meta;
  ParamSet tensors;
  std::vector<std::vector<std::string>> prototypes;
};

Parsed parse(std::istream& in) {
  Parsed p;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("snapshot: empty input");
  std::istringstream head(line);
  std::string magic;
  int version = 0;
  head >> magic >> version;
  if (magic != kSnapshotMagic) throw FormatError("snapshot: missing magic string");
  if (version != kSnapshotVersion) {
    throw FormatError("snapshot: unsupported version " + std::to_string(version));
  }
  bool ended = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "end") {
      ended = true;
      break;
    }
    std::vector<std::string> fields;
    for (std::string f; ls >> f;) fields.push_back(f);
    if (tag == "kind" && fields.size() == 1) {
      p.kind = fields[0];
    } else if (tag == "meta" && fields.size() == 2) {
      p.meta[fields[0]] = fields[1];
    } else if (tag == "tensor" && fields.size() >= 2) {
      std::vector<std::size_t> shape;
      for (const auto& d : split(fields[1], ',')) shape.push_back(parse_size(d));
      std::vector<double> values;
      for (std::size_t i = 2; i < fields.size(); ++i) values.push_back(parse_double(fields[i]));
      p.tensors.add(fields[0], Tensor(shape, std::move(values)));
    } else if (tag == "prototype" && fields.size() >= 3) {
      p.prototypes.push_back(std::move(fields));
    } else {
      throw FormatError("snapshot: unrecognized line '" + line + "'");
    }
  }
  if (!ended) throw FormatError("snapshot: truncated (no end marker)");
  return p;
}

const std::string& meta(const Parsed& p, const std::string& key) {
  auto it = p.meta.find(key);
  if (it == p.meta.end()) throw FormatError("snapshot: missing meta '" + key + "'");
  return it->second;
}

void expect_kind(const Parsed& p, const char* kind) {
  if (p.kind != kind) throw FormatError("snapshot: expected kind " + std::string(kind) + ", got '" + p.kind + "'");
}

}  // namespace

void write_model(std::ostream& out, const EmbeddingModel& model) {
  write_header(out, "model");
  out << "meta layers ";
  for (std::size_t i = 0; i < model.arch.layers.size(); ++i) out << (i ? "," : "") << model.arch.layers[i];
  out << "\nmeta activation " << to_string(model.arch.activation) << '\n';
  out << "meta normalize_output " << (model.normalize_output ? 1 : 0) << '\n';
  write_tensors(out, model.params);
  out << "end\n";
}

EmbeddingModel read_model(std::istream& in) {
  const Parsed p = parse(in);
  expect_kind(p, "model");
  EmbeddingModel m;
  for (const auto& d : split(meta(p, "layers"), ',')) m.arch.layers.push_back(parse_size(d));
  m.arch.activation = parse_activation(meta(p, "activation"));
  m.normalize_output = meta(p, "normalize_output") == "1";
  m.params = p.tensors;
  check_mlp(m.params, m.arch);
  return m;
}

void write_importance(std::ostream& out, const ImportanceMap& importance) {
  write_header(out, "importance");
  out << "meta estimator " << to_string(importance.estimator) << '\n';
  write_tensors(out, importance.weights);
  out << "end\n";
}

ImportanceMap read_importance(std::istream& in) {
  const Parsed p = parse(in);
  expect_kind(p, "importance");
  ImportanceMap m{p.tensors, parse_importance_estimator(meta(p, "estimator"))};
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    for (double v : m.weights.tensor(i).data()) {
      if (!(v >= 0.0)) throw FormatError("snapshot: negative importance weight");
    }
  }
  return m;
}

void write_memory(std::ostream& out, const PrototypeMemory& memory) {
  write_header(out, "memory");
  for (int c : memory.insertion_log()) {
    const auto& e = memory.at(c);
    out << "prototype " << c << ' ' << e.origin_task;
    for (double v : e.vector) out << ' ' << format_double(v);
    out << '\n';
  }
  out << "end\n";
}

PrototypeMemory read_memory(std::istream& in) {
  const Parsed p = parse(in);
  expect_kind(p, "memory");
  PrototypeMemory m;
  for (const auto& f : p.prototypes) {
    int c = 0;
    auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), c);
    if (ec != std::errc()) throw FormatError("snapshot: bad class id '" + f[0] + "'");
    std::vector<double> v;
    for (std::size_t i = 2; i < f.size(); ++i) v.push_back(parse_double(f[i]));
    m.insert(c, std::move(v), parse_size(f[1]));
  }
  return m;
}

void save_model(const std::filesystem::path& path, const EmbeddingModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_model(out, model);
}

EmbeddingModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  return read_model(in);
}

}  // namespace zstci
