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

// Pipeline orchestration: ingest -> pairs -> transform -> eval -> report,
// plus learning-curve split manifests and run aggregation.
//
// Run directory layout (relative to RunConfig::output_dir):
//   ingest/<dataset>.jsonl               normalized instances
//   pairs/<dataset>.pairs.json           pairing manifest
//   transform/<dataset>.<mode>.jsonl     transformed records
//   transform/<dataset>.counts.json      produced / skipped per mode
//   eval/<dataset>.<setup>.requests.jsonl
//   eval/<dataset>.<setup>.report.json   (+ .txt)
//   report/summary.txt, report/summary.json
//   splits/<name>.seed-<n>.json
// Every file carries the config hash and seed.

#ifndef WINOCHECK_HARNESS_H_
#define WINOCHECK_HARNESS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "winocheck/corpus.h"
#include "winocheck/scoring.h"
#include "winocheck/transforms.h"

namespace winocheck {

inline constexpr std::string_view kEndpointEnvVar = "WINOCHECK_SCORER_ENDPOINT";

enum class DatasetFormat { kWsc, kWinogrande, kNormalized };

struct DatasetConfig {
  std::string name;
  DatasetFormat format = DatasetFormat::kWsc;
  std::string path;
  std::string exclusions;  // optional exclusion-id list
};

enum class ScorerMode { kFile, kHttp };

struct ScorerConfig {
  ScorerMode mode = ScorerMode::kFile;
  std::string endpoint;
  std::size_t max_in_flight = 4;
  bool verify_determinism = false;
  // "<dataset>/<setup>" -> response batch path (file mode).
  std::map<std::string, std::string> responses;
  std::string responses_dir;
};

struct SplitConfig {
  std::string train_path;
  std::string train_format = "winogrande";
  std::vector<std::size_t> sizes;
  std::size_t n_seeds = 3;
  std::size_t holdout = 1267;
};

struct RunConfig {
  std::vector<DatasetConfig> datasets;
  std::vector<Mode> modes;
  ScorerConfig scorer;
  SplitConfig splits;
  std::uint64_t seed = 0;
  std::string output_dir = "winocheck-run";
  std::string model;           // model key for reference comparison
  std::string reference_path;  // reference tables file

  std::string ToJson() const;
  static RunConfig FromJson(std::string_view text);
  static RunConfig Load(const std::string& path);

  // FNV-1a 64 over the canonical JSON, hex encoded.
  std::string Hash() const;
  // {"config_hash", "seed", "stage"} embedded in every artifact.
  std::string MetaJson(std::string_view stage) const;
  // Throws ValidationError if a referenced input path does not exist.
  void CheckPaths() const;
};

std::vector<std::size_t> DefaultSplitSizes();

// ---- Stage commands --------------------------------------------------------
// Each returns normally on success and throws ParseError/ValidationError
// (exit 1) or ScorerError (exit 2). `log` receives progress lines.

void CmdIngest(const RunConfig& config, std::ostream& log);
void CmdPairs(const RunConfig& config, std::ostream& log);
void CmdTransform(const RunConfig& config, std::ostream& log);

struct EvalOptions {
  std::vector<Mode> setups;          // empty = original + configured modes
  std::vector<std::string> datasets;  // empty = all
  std::string responses_path;       // single (dataset, setup) override
};
void CmdEval(const RunConfig& config, const EvalOptions& options, std::ostream& log);

struct ReportOptions {
  bool compare_reference = false;
  std::vector<std::string> run_reports;  // learning-curve run files
};
void CmdReport(const RunConfig& config, const ReportOptions& options, std::ostream& log);
void CmdSplits(const RunConfig& config, std::ostream& log);

// Loads the dataset at ingest stage output (for tests and tools).
Dataset LoadIngested(const RunConfig& config, const std::string& name);
Dataset LoadPaired(const RunConfig& config, const std::string& name);

// ---- Learning-curve splits -------------------------------------------------

struct SplitManifest {
  std::uint64_t seed = 0;
  std::vector<std::size_t> sizes;
  std::map<std::size_t, std::vector<std::string>> splits;
  std::vector<std::string> holdout;
};

// Holdout is drawn once from `base_seed`; seed k uses base_seed + k and
// takes nested prefixes of its own permutation of the remaining pool.
// Throws ValidationError when max(sizes) > ids.size() - holdout.
std::vector<SplitManifest> MakeSplits(const std::vector<std::string>& ids,
                                      std::vector<std::size_t> sizes, std::size_t n_seeds,
                                      std::size_t holdout, std::uint64_t base_seed);

std::string SplitManifestJson(const SplitManifest& manifest, std::string_view meta_json = {});
// Verifies nesting and holdout disjointness; throws ValidationError.
SplitManifest SplitManifestFromJson(std::string_view text);

// Unbiased Fisher-Yates over mt19937_64.
void SeededShuffle(std::vector<std::string>* items, std::uint64_t seed);

// ---- Run aggregation -------------------------------------------------------

struct RunResult {
  std::size_t train_size = 0;
  std::uint64_t seed = 0;
  double single = 0.0;
  double group = 0.0;
};

struct CurvePoint {
  std::size_t train_size = 0;
  std::size_t n_runs = 0;
  double single_mean = 0.0;
  double single_std = 0.0;
  double group_mean = 0.0;
  double group_std = 0.0;
};

struct CurveTable {
  std::vector<CurvePoint> points;
  std::vector<std::string> warnings;
};

// Mean and population standard deviation per training size. Sizes with
// fewer runs than the largest run count produce a warning.
CurveTable AggregateRuns(const std::vector<RunResult>& runs);
RunResult RunResultFromJson(std::string_view text);

// "# Training | Single | Group" with "mean (std)" cells in percent.
std::string RenderCurveTable(const CurveTable& table);
// Tab-separated: size single_mean single_std group_mean group_std n.
std::string CurveDataFile(const CurveTable& table);

// ---- Reference numbers -----------------------------------------------------

struct ReferenceEntry {
  std::string table;
  std::string model;
  std::string dataset;
  std::string setup;
  double single = 0.0;  // percent
  double group = 0.0;
};

struct ReferenceCurvePoint {
  std::string model;
  std::size_t train_size = 0;
  double single = 0.0;
  double single_std = 0.0;
  double group = 0.0;
  double group_std = 0.0;
};

struct ReferenceTables {
  std::vector<ReferenceEntry> entries;
  std::vector<ReferenceCurvePoint> curves;

  std::optional<ReferenceEntry> Find(std::string_view model, std::string_view dataset,
                                     std::string_view setup) const;
};

ReferenceTables LoadReferenceTables(const std::string& path);
ReferenceTables ParseReferenceTables(std::string_view text);

// Columns: Dataset, Setup, then (ours, reference, delta) for Single and
// Group. Rows without a reference show "-".
std::string RenderComparison(const std::vector<EvaluationReport>& reports,
                             const ReferenceTables& reference, std::string_view model);

std::filesystem::path DefaultReferencePath();

}  // namespace winocheck

#endif  // WINOCHECK_HARNESS_H_
