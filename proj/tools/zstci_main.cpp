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

// zstci command-line driver: run, sweep, report, defaults.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "zstci/config.hpp"
#include "zstci/error.hpp"
#include "zstci/experiment.hpp"
#include "zstci/report.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::string seeds;
  std::optional<std::size_t> tasks;
  std::optional<std::size_t> jobs;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seeds", f.seeds, "comma-separated master seeds");
  cmd->add_option("--tasks", f.tasks, "number of tasks in the stream");
  cmd->add_option("--jobs", f.jobs, "parallel worker slots");
  cmd->add_option("--set", f.sets, "override section.key=value (repeatable)");
}

// defaults < file < environment < flags
zstci::ExperimentConfig resolve(const CommonFlags& f) {
  zstci::ExperimentConfig cfg = f.config.empty() ? zstci::default_config() : zstci::load_config(f.config);
  zstci::apply_env_overrides(cfg);
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw zstci::ConfigError("--set expects section.key=value, got '" + s + "'");
    zstci::set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (!f.seeds.empty()) cfg.seeds = zstci::parse_seed_list(f.seeds);
  if (f.tasks) cfg.stream.synthetic.num_tasks = *f.tasks;
  if (f.jobs) cfg.jobs = *f.jobs;
  return cfg;
}

int failure_code(const std::vector<zstci::RunResult>& results) {
  for (const auto& r : results) {
    if (!r.ok) return r.error_category ? zstci::exit_code(*r.error_category) : 1;
  }
  return 0;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot translation for class-incremental embedding networks"};
  app.require_subcommand(1);
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");
  app.add_flag("-q,--quiet", quiet, "errors only");

  CommonFlags run_flags;
  std::string method, zstci_mode;
  auto* run = app.add_subcommand("run", "train every seed of one configuration");
  add_common(run, run_flags);
  run->add_option("--method", method, "ft, lwf, ewc or mas");
  run->add_option("--zstci", zstci_mode, "off, zs-only, ur-only or full");

  CommonFlags sweep_flags;
  std::string methods = "ft,lwf,ewc,mas";
  std::string modes = "off,full";
  auto* sweep = app.add_subcommand("sweep", "methods x zstci modes x seeds");
  add_common(sweep, sweep_flags);
  sweep->add_option("--methods", methods, "comma-separated methods")->capture_default_str();
  sweep->add_option("--zstci-modes", modes, "comma-separated zstci modes")->capture_default_str();

  std::vector<std::string> inputs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "aggregate results into tables and series");
  report->add_option("--in", inputs, "result directories or results.jsonl files")->required();
  report->add_option("--out", report_out, "report directory")->required();

  CommonFlags defaults_flags;
  auto* defaults = app.add_subcommand("defaults", "print the effective configuration");
  add_common(defaults, defaults_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : zstci::exit_code(zstci::ErrorCategory::kConfig);
  }
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::err : spdlog::level::info);

  try {
    if (*run) {
      zstci::ExperimentConfig cfg = resolve(run_flags);
      if (!method.empty()) cfg.method = zstci::parse_method(method);
      if (!zstci_mode.empty()) cfg.zstci = zstci::parse_zstci_mode(zstci_mode);
      zstci::validate(cfg);
      spdlog::info("run {} over {} seed(s) into {}", zstci::method_label(cfg.method, cfg.zstci),
                   cfg.seeds.size(), cfg.output_dir);
      const auto results = zstci::run_and_write(cfg);
      if (std::any_of(results.begin(), results.end(), [](const auto& r) { return r.ok; })) {
        std::cout << zstci::render_accuracy_table(zstci::emit_report(results, cfg.output_dir));
      }
      return failure_code(results);
    }

    if (*sweep) {
      const zstci::ExperimentConfig base = resolve(sweep_flags);
      zstci::validate(base);
      std::vector<zstci::ExperimentConfig> variants;
      std::vector<std::pair<zstci::ExperimentConfig, std::uint64_t>> jobs;
      for (const auto& m : split_names(methods)) {
        for (const auto& z : split_names(modes)) {
          zstci::ExperimentConfig cfg = base;
          cfg.method = zstci::parse_method(m);
          cfg.zstci = zstci::parse_zstci_mode(z);
          cfg.output_dir = (fs::path(base.output_dir) / zstci::method_label(cfg.method, cfg.zstci)).string();
          variants.push_back(cfg);
          for (std::uint64_t s : cfg.seeds) jobs.emplace_back(cfg, s);
        }
      }
      spdlog::info("sweep: {} configurations, {} runs", variants.size(), jobs.size());
      std::optional<fs::path> snaps;
      if (base.save_snapshots) snaps = fs::path(base.output_dir) / "snapshots";
      const auto results = zstci::run_jobs(jobs, base.jobs, snaps);
      std::size_t offset = 0;
      for (const auto& cfg : variants) {
        const std::vector<zstci::RunResult> part(results.begin() + static_cast<std::ptrdiff_t>(offset),
                                                 results.begin() + static_cast<std::ptrdiff_t>(offset + cfg.seeds.size()));
        zstci::write_run_outputs(cfg.output_dir, cfg, part);
        offset += cfg.seeds.size();
      }
      std::cout << zstci::render_accuracy_table(zstci::emit_report(results, base.output_dir));
      return failure_code(results);
    }

    if (*report) {
      std::vector<zstci::RunResult> results;
      for (const auto& in : inputs) {
        std::vector<fs::path> files;
        if (!fs::is_directory(in)) {
          files.push_back(in);
        } else if (fs::exists(fs::path(in) / "results.jsonl")) {
          files.push_back(fs::path(in) / "results.jsonl");
        } else {
          // A sweep directory: one run directory per label.
          for (const auto& e : fs::recursive_directory_iterator(in))
            if (e.path().filename() == "results.jsonl") files.push_back(e.path());
          std::sort(files.begin(), files.end());
          if (files.empty()) throw zstci::DataError("no results.jsonl under " + in);
        }
        for (const auto& p : files) {
          auto part = zstci::read_results(p);
          results.insert(results.end(), part.begin(), part.end());
        }
      }
      std::cout << zstci::render_accuracy_table(zstci::emit_report(results, report_out));
      return 0;
    }

    if (*defaults) {
      std::cout << zstci::render_config(resolve(defaults_flags));
      return 0;
    }
  } catch (const zstci::Error& e) {
    spdlog::error("{} error: {}", zstci::to_string(e.category()), e.what());
    return zstci::exit_code(e.category());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
