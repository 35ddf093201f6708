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

// Single-instance and worst-of-group scoring, chance levels, decision
// rules, and evaluation reports.
//
// A group is credited with the score of its worst member: the minimum for
// higher-is-better scorers, the maximum otherwise. Dataset-level group
// score is the mean of per-group values.

#ifndef WINOCHECK_SCORING_H_
#define WINOCHECK_SCORING_H_

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "winocheck/corpus.h"
#include "winocheck/transforms.h"

namespace winocheck {

struct ScoreFunction {
  std::string name;
  // (prediction, gold) -> score in [0, 1].
  std::function<double(int, int)> fn;
  bool higher_is_better = true;

  double operator()(int prediction, int gold) const { return fn(prediction, gold); }
  // min for higher-is-better, max otherwise.
  double Worst(double a, double b) const;
};

ScoreFunction Accuracy();

// Mean of f over every gold id. Throws ValidationError listing ids that
// have no prediction.
double SingleScore(const std::map<std::string, int>& predictions,
                   const std::map<std::string, int>& golds,
                   const ScoreFunction& f);

struct GroupScoreResult {
  double mean = 0.0;
  std::vector<double> per_group;
};

// `groups` holds member ids; `scores` maps id -> per-instance score.
// Throws ValidationError when a member has no score.
GroupScoreResult GroupScore(const std::vector<std::vector<std::string>>& groups,
                            const std::map<std::string, double>& scores,
                            const ScoreFunction& f);

struct ChanceLevels {
  double single = 0.0;
  double group = 0.0;
};

// Uniform guessing over `n_classes` for groups of `group_size`.
ChanceLevels ComputeChanceLevels(std::size_t group_size, std::size_t n_classes);

// Per-candidate score for a zero-shot query; nullopt marks a candidate the
// scorer could not score (multi-token).
using CandidateScore = std::optional<double>;

// Argmax over the two candidates, ties to index 0. Returns nullopt when
// either candidate is unscorable.
std::optional<int> ZeroShotDecide(const ZeroShotQuery& query,
                                  const std::pair<CandidateScore, CandidateScore>& scores);

// Argmax over option scores, ties to candidate 0. Throws ValidationError
// if `option_scores` does not have exactly two entries.
int McDecide(const WinogradInstance& instance,
             const std::vector<double>& option_scores);

// ---- Reports ---------------------------------------------------------------

struct GroupBreakdown {
  std::string group_id;
  std::vector<std::string> member_ids;
  std::vector<std::optional<double>> member_scores;  // nullopt = discarded
  std::optional<double> group_score;                 // nullopt = incomplete
};

struct EvaluationReport {
  std::string dataset;
  std::string setup;
  std::string model_id;

  std::size_t n_instances = 0;
  std::size_t n_scored = 0;
  std::size_t n_discarded = 0;
  std::size_t n_groups = 0;
  std::size_t n_groups_scored = 0;

  // Over scored instances / fully scored groups.
  double single_score = 0.0;
  double group_score = 0.0;
  // Discarded instances count as wrong; incomplete groups score 0.
  double single_score_skips_wrong = 0.0;
  double group_score_skips_wrong = 0.0;

  double chance_single = 0.0;
  double chance_group = 0.0;

  std::map<std::string, std::size_t> filter_counts;
  std::vector<GroupBreakdown> groups;
};

struct ScoredItem {
  std::string id;
  int gold = 0;
  std::optional<int> prediction;  // nullopt = discarded
};

// Builds a report. `groups` lists member ids; every id must appear in
// `items`. `filter_counts` is a histogram of why items were discarded.
EvaluationReport BuildReport(std::string dataset, std::string setup,
                             const std::vector<ScoredItem>& items,
                             const std::vector<std::pair<std::string, std::vector<std::string>>>& groups,
                             const ScoreFunction& f,
                             std::map<std::string, std::size_t> filter_counts = {});

std::string ReportToJson(const EvaluationReport& report,
                         std::string_view meta_json = {});
EvaluationReport ReportFromJson(std::string_view text);

// Percent with two decimals: 0.71489 -> "71.49".
std::string FormatPercent(double value);

// Aligned Setup x {Single, Group} table.
std::string RenderReportTable(const std::vector<EvaluationReport>& reports);

}  // namespace winocheck

#endif  // WINOCHECK_SCORING_H_
