// Copyright 2026 The winocheck Authors.
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

// winocheck command line: ingest, pairs, transform, eval, splits, report.
// Exit codes: 0 success, 1 input/validation error, 2 scorer error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "winocheck/errors.h"
#include "winocheck/harness.h"

namespace {

using winocheck::RunConfig;

struct CommonFlags {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void AddCommon(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--config", flags->config_path, "Run configuration (JSON)")->required();
  cmd->add_option("--out", flags->out, "Override output directory");
  cmd->add_option("--seed", flags->seed, "Override seed");
}

RunConfig LoadConfig(const CommonFlags& flags) {
  RunConfig config = RunConfig::Load(flags.config_path);
  if (!flags.out.empty()) config.output_dir = flags.out;
  if (flags.seed) config.seed = *flags.seed;
  return config;
}

std::vector<winocheck::Mode> ParseModes(const std::vector<std::string>& names) {
  std::vector<winocheck::Mode> modes;
  for (const auto& n : names) modes.push_back(winocheck::ParseMode(n));
  return modes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"winocheck: twin-pair evaluation of Winograd-style benchmarks"};
  app.require_subcommand(1);

  CommonFlags ingest_flags;
  auto* ingest = app.add_subcommand("ingest", "Parse datasets into normalized records");
  AddCommon(ingest, &ingest_flags);

  CommonFlags pairs_flags;
  auto* pairs = app.add_subcommand("pairs", "Detect twin pairs and write the pairing manifest");
  AddCommon(pairs, &pairs_flags);

  CommonFlags transform_flags;
  std::vector<std::string> transform_modes;
  auto* transform = app.add_subcommand("transform", "Apply ablations and the zero-shot rewrite");
  AddCommon(transform, &transform_flags);
  transform->add_option("--mode", transform_modes, "no-cands, part-sent, zero-shot (repeatable)");

  CommonFlags eval_flags;
  std::vector<std::string> eval_setups;
  std::vector<std::string> eval_datasets;
  std::string scorer_mode;
  std::string endpoint;
  std::string responses;
  bool verify = false;
  auto* eval = app.add_subcommand("eval", "Score a setup and write evaluation reports");
  AddCommon(eval, &eval_flags);
  eval->add_option("--setup", eval_setups, "original, no-cands, part-sent, zero-shot");
  eval->add_option("--dataset", eval_datasets, "Restrict to datasets (repeatable)");
  eval->add_option("--scorer", scorer_mode, "file or http")
      ->check(CLI::IsMember({"file", "http"}));
  eval->add_option("--endpoint", endpoint, "Scorer base URL for http mode");
  eval->add_option("--responses", responses, "Response batch for a single dataset and setup");
  eval->add_flag("--verify-determinism", verify, "Re-query a sample and compare scores");

  CommonFlags splits_flags;
  std::optional<std::size_t> holdout;
  auto* splits = app.add_subcommand("splits", "Write nested learning-curve split manifests");
  AddCommon(splits, &splits_flags);
  splits->add_option("--holdout", holdout, "Held-out development size");

  CommonFlags report_flags;
  bool compare = false;
  std::string model;
  std::vector<std::string> runs;
  auto* report = app.add_subcommand("report", "Summarize reports and learning curves");
  AddCommon(report, &report_flags);
  report->add_flag("--compare-paper", compare, "Compare against the published reference numbers");
  report->add_option("--model", model, "Reference model key, e.g. roberta-large");
  report->add_option("--runs", runs, "Learning-curve run reports to aggregate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (ingest->parsed()) {
      winocheck::CmdIngest(LoadConfig(ingest_flags), std::cout);
    } else if (pairs->parsed()) {
      winocheck::CmdPairs(LoadConfig(pairs_flags), std::cout);
    } else if (transform->parsed()) {
      RunConfig config = LoadConfig(transform_flags);
      if (!transform_modes.empty()) config.modes = ParseModes(transform_modes);
      winocheck::CmdTransform(config, std::cout);
    } else if (eval->parsed()) {
      RunConfig config = LoadConfig(eval_flags);
      if (!scorer_mode.empty()) {
        config.scorer.mode =
            scorer_mode == "http" ? winocheck::ScorerMode::kHttp : winocheck::ScorerMode::kFile;
      }
      if (!endpoint.empty()) config.scorer.endpoint = endpoint;
      if (verify) config.scorer.verify_determinism = true;
      winocheck::EvalOptions options;
      options.setups = ParseModes(eval_setups);
      options.datasets = eval_datasets;
      options.responses_path = responses;
      winocheck::CmdEval(config, options, std::cout);
    } else if (splits->parsed()) {
      RunConfig config = LoadConfig(splits_flags);
      if (holdout) config.splits.holdout = *holdout;
      winocheck::CmdSplits(config, std::cout);
    } else if (report->parsed()) {
      RunConfig config = LoadConfig(report_flags);
      if (!model.empty()) config.model = model;
      winocheck::ReportOptions options;
      options.compare_reference = compare;
      options.run_reports = runs;
      winocheck::CmdReport(config, options, std::cout);
    }
  } catch (const winocheck::ScorerError& e) {
    std::cerr << "scorer error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
