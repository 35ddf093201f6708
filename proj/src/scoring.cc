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

#include "winocheck/scoring.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "winocheck/errors.h"
#include "winocheck/parallel.h"

namespace winocheck {
namespace {

using json = nlohmann::json;

std::string JoinIds(const std::vector<std::string>& ids, std::size_t limit = 10) {
  std::string out;
  for (std::size_t k = 0; k < ids.size() && k < limit; ++k) {
    if (k) out += ", ";
    out += ids[k];
  }
  if (ids.size() > limit) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

json OptionalJson(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> OptionalFromJson(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

double ScoreFunction::Worst(double a, double b) const {
  return higher_is_better ? std::min(a, b) : std::max(a, b);
}

ScoreFunction Accuracy() {
  return {"accuracy", [](int p, int g) { return p == g ? 1.0 : 0.0; }, true};
}

double SingleScore(const std::map<std::string, int>& predictions,
                   const std::map<std::string, int>& golds,
                   const ScoreFunction& f) {
  std::vector<std::string> missing;
  double total = 0.0;
  for (const auto& [id, gold] : golds) {
    auto it = predictions.find(id);
    if (it == predictions.end()) {
      missing.push_back(id);
      continue;
    }
    total += f(it->second, gold);
  }
  if (!missing.empty()) {
    throw ValidationError("missing predictions for: " + JoinIds(missing));
  }
  if (golds.empty()) return 0.0;
  return total / static_cast<double>(golds.size());
}

GroupScoreResult GroupScore(const std::vector<std::vector<std::string>>& groups,
                            const std::map<std::string, double>& scores,
                            const ScoreFunction& f) {
  std::vector<std::vector<double>> member_scores;
  member_scores.reserve(groups.size());
  std::vector<std::string> missing;
  for (const auto& g : groups) {
    std::vector<double> row;
    for (const auto& id : g) {
      auto it = scores.find(id);
      if (it == scores.end()) {
        missing.push_back(id);
      } else {
        row.push_back(it->second);
      }
    }
    member_scores.push_back(std::move(row));
  }
  if (!missing.empty()) {
    throw ValidationError("missing member scores for: " + JoinIds(missing));
  }
  parallel::GroupReduction r =
      parallel::ReduceGroups(member_scores, f.higher_is_better);
  return {r.mean, std::move(r.per_group)};
}

ChanceLevels ComputeChanceLevels(std::size_t group_size, std::size_t n_classes) {
  if (group_size < 1 || n_classes < 2) {
    throw ValidationError("chance levels need group_size >= 1 and n_classes >= 2");
  }
  double single = 1.0 / static_cast<double>(n_classes);
  return {single, std::pow(single, static_cast<double>(group_size))};
}

std::optional<int> ZeroShotDecide(const ZeroShotQuery& /*query*/,
                                  const std::pair<CandidateScore, CandidateScore>& scores) {
  if (!scores.first || !scores.second) return std::nullopt;
  return *scores.second > *scores.first ? 1 : 0;
}

int McDecide(const WinogradInstance& instance,
             const std::vector<double>& option_scores) {
  if (option_scores.size() != 2) {
    throw ValidationError("instance " + instance.id + ": expected 2 option scores, got " +
                          std::to_string(option_scores.size()));
  }
  return option_scores[1] > option_scores[0] ? 1 : 0;
}

// ---- Reports ---------------------------------------------------------------

EvaluationReport BuildReport(
    std::string dataset, std::string setup, const std::vector<ScoredItem>& items,
    const std::vector<std::pair<std::string, std::vector<std::string>>>& groups,
    const ScoreFunction& f, std::map<std::string, std::size_t> filter_counts) {
  EvaluationReport report;
  report.dataset = std::move(dataset);
  report.setup = std::move(setup);
  report.filter_counts = std::move(filter_counts);

  std::unordered_map<std::string, std::optional<double>> score_by_id;
  double scored_total = 0.0;
  for (const ScoredItem& item : items) {
    ++report.n_instances;
    std::optional<double> s;
    if (item.prediction) {
      s = f(*item.prediction, item.gold);
      scored_total += *s;
      ++report.n_scored;
    } else {
      ++report.n_discarded;
    }
    if (!score_by_id.emplace(item.id, s).second) {
      throw ValidationError("duplicate item id " + item.id);
    }
  }
  const double worst = f.higher_is_better ? 0.0 : 1.0;
  if (report.n_scored > 0) {
    report.single_score = scored_total / static_cast<double>(report.n_scored);
  }
  if (report.n_instances > 0) {
    report.single_score_skips_wrong =
        (scored_total + worst * static_cast<double>(report.n_discarded)) /
        static_cast<double>(report.n_instances);
  }

  // Complete groups feed the kernel; incomplete ones only count in the
  // skips-as-wrong variant.
  std::vector<std::vector<double>> complete;
  std::vector<std::size_t> complete_index;
  double chance_group_total = 0.0;
  for (const auto& [group_id, members] : groups) {
    GroupBreakdown b;
    b.group_id = group_id;
    b.member_ids = members;
    bool all = true;
    std::vector<double> row;
    for (const auto& id : members) {
      auto it = score_by_id.find(id);
      if (it == score_by_id.end()) {
        throw ValidationError("group " + group_id + " member " + id + " has no item");
      }
      b.member_scores.push_back(it->second);
      if (it->second) {
        row.push_back(*it->second);
      } else {
        all = false;
      }
    }
    chance_group_total += ComputeChanceLevels(std::max<std::size_t>(1, members.size()), 2).group;
    if (all && !row.empty()) {
      complete_index.push_back(report.groups.size());
      complete.push_back(std::move(row));
    }
    report.groups.push_back(std::move(b));
  }
  parallel::GroupReduction r = parallel::ReduceGroups(complete, f.higher_is_better);
  for (std::size_t k = 0; k < complete_index.size(); ++k) {
    report.groups[complete_index[k]].group_score = r.per_group[k];
  }
  report.n_groups = groups.size();
  report.n_groups_scored = complete.size();
  report.group_score = r.mean;
  double with_skips = 0.0;
  for (const auto& g : report.groups) with_skips += g.group_score.value_or(worst);
  if (!report.groups.empty()) {
    report.group_score_skips_wrong = with_skips / static_cast<double>(report.groups.size());
  }

  ChanceLevels chance = ComputeChanceLevels(2, 2);
  report.chance_single = chance.single;
  report.chance_group = report.groups.empty()
                            ? chance.group
                            : chance_group_total / static_cast<double>(report.groups.size());
  return report;
}

std::string ReportToJson(const EvaluationReport& r, std::string_view meta_json) {
  json doc;
  if (!meta_json.empty()) doc["_meta"] = json::parse(meta_json);
  doc["dataset"] = r.dataset;
  doc["setup"] = r.setup;
  doc["model_id"] = r.model_id;
  doc["n_instances"] = r.n_instances;
  doc["n_scored"] = r.n_scored;
  doc["n_discarded"] = r.n_discarded;
  doc["n_groups"] = r.n_groups;
  doc["n_groups_scored"] = r.n_groups_scored;
  doc["single_score"] = r.single_score;
  doc["group_score"] = r.group_score;
  doc["single_score_skips_wrong"] = r.single_score_skips_wrong;
  doc["group_score_skips_wrong"] = r.group_score_skips_wrong;
  doc["chance_single"] = r.chance_single;
  doc["chance_group"] = r.chance_group;
  doc["rounded"] = {{"single", FormatPercent(r.single_score)},
                    {"group", FormatPercent(r.group_score)}};
  doc["filter_counts"] = r.filter_counts;
  json groups = json::array();
  for (const auto& g : r.groups) {
    json scores = json::array();
    for (const auto& s : g.member_scores) scores.push_back(OptionalJson(s));
    groups.push_back({{"group_id", g.group_id},
                      {"members", g.member_ids},
                      {"member_scores", scores},
                      {"group_score", OptionalJson(g.group_score)}});
  }
  doc["groups"] = std::move(groups);
  return doc.dump(2) + "\n";
}

EvaluationReport ReportFromJson(std::string_view text) {
  EvaluationReport r;
  try {
    json doc = json::parse(text);
    r.dataset = doc.at("dataset").get<std::string>();
    r.setup = doc.at("setup").get<std::string>();
    r.model_id = doc.value("model_id", "");
    r.n_instances = doc.at("n_instances").get<std::size_t>();
    r.n_scored = doc.at("n_scored").get<std::size_t>();
    r.n_discarded = doc.at("n_discarded").get<std::size_t>();
    r.n_groups = doc.at("n_groups").get<std::size_t>();
    r.n_groups_scored = doc.at("n_groups_scored").get<std::size_t>();
    r.single_score = doc.at("single_score").get<double>();
    r.group_score = doc.at("group_score").get<double>();
    r.single_score_skips_wrong = doc.at("single_score_skips_wrong").get<double>();
    r.group_score_skips_wrong = doc.at("group_score_skips_wrong").get<double>();
    r.chance_single = doc.at("chance_single").get<double>();
    r.chance_group = doc.at("chance_group").get<double>();
    r.filter_counts = doc.at("filter_counts").get<std::map<std::string, std::size_t>>();
    for (const auto& jg : doc.at("groups")) {
      GroupBreakdown g;
      g.group_id = jg.at("group_id").get<std::string>();
      g.member_ids = jg.at("members").get<std::vector<std::string>>();
      for (const auto& s : jg.at("member_scores")) g.member_scores.push_back(OptionalFromJson(s));
      g.group_score = OptionalFromJson(jg.at("group_score"));
      r.groups.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  return r;
}

std::string FormatPercent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value * 100.0);
  return buf;
}

std::string RenderReportTable(const std::vector<EvaluationReport>& reports) {
  std::size_t w_dataset = 7;
  std::size_t w_setup = 5;
  for (const auto& r : reports) {
    w_dataset = std::max(w_dataset, r.dataset.size());
    w_setup = std::max(w_setup, r.setup.size());
  }
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(w_dataset)) << "Dataset" << "  "
      << std::setw(static_cast<int>(w_setup)) << "Setup" << "  " << std::right
      << std::setw(7) << "Single" << "  " << std::setw(7) << "Group" << "  "
      << std::setw(6) << "N" << "  " << std::setw(6) << "Groups" << '\n';
  for (const auto& r : reports) {
    out << std::left << std::setw(static_cast<int>(w_dataset)) << r.dataset << "  "
        << std::setw(static_cast<int>(w_setup)) << r.setup << "  " << std::right
        << std::setw(7) << FormatPercent(r.single_score) << "  " << std::setw(7)
        << FormatPercent(r.group_score) << "  " << std::setw(6) << r.n_scored << "  "
        << std::setw(6) << r.n_groups_scored << '\n';
  }
  return out.str();
}

}  // namespace winocheck
