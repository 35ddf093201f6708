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

#include "winocheck/harness.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "winocheck/errors.h"
#include "winocheck/parallel.h"
#include "winocheck/scorer_protocol.h"

#ifndef WINOCHECK_DATA_DIR
#define WINOCHECK_DATA_DIR "data"
#endif

namespace winocheck {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
}

std::string MetaLine(const RunConfig& config, std::string_view stage) {
  return json{{"_meta", json::parse(config.MetaJson(stage))}}.dump() + "\n";
}

std::string_view ToString(DatasetFormat f) {
  switch (f) {
    case DatasetFormat::kWsc:
      return "wsc";
    case DatasetFormat::kWinogrande:
      return "winogrande";
    case DatasetFormat::kNormalized:
      return "normalized";
  }
  return "?";
}

DatasetFormat ParseFormat(std::string_view s) {
  if (s == "wsc") return DatasetFormat::kWsc;
  if (s == "winogrande") return DatasetFormat::kWinogrande;
  if (s == "normalized") return DatasetFormat::kNormalized;
  throw ValidationError("unknown dataset format '" + std::string(s) + "'");
}

Dataset LoadRaw(DatasetFormat format, const std::string& path, const std::string& name) {
  switch (format) {
    case DatasetFormat::kWsc:
      return ParseWscFile(path, name);
    case DatasetFormat::kWinogrande:
      return ParseWinograndeFile(path, name);
    case DatasetFormat::kNormalized: {
      std::ifstream in(path);
      if (!in) throw ValidationError("cannot open " + path);
      return ReadNormalized(in, name);
    }
  }
  throw ValidationError("unreachable dataset format");
}

fs::path StageDir(const RunConfig& config, std::string_view stage) {
  return fs::path(config.output_dir) / std::string(stage);
}

const DatasetConfig& FindDataset(const RunConfig& config, const std::string& name) {
  for (const auto& d : config.datasets) {
    if (d.name == name) return d;
  }
  throw ValidationError("dataset '" + name + "' is not configured");
}

std::vector<Mode> AblationAndZeroShotModes(const RunConfig& config) {
  if (!config.modes.empty()) return config.modes;
  return {Mode::kNoCands, Mode::kPartSent, Mode::kZeroShot};
}

json CountsJson(const ModeCounts& c) {
  return {{"inputs", c.inputs},
          {"produced", c.produced},
          {"skipped", c.skipped},
          {"reasons", c.reasons}};
}

template <typename T, typename Parse>
std::vector<T> ReadRecords(const fs::path& path, Parse parse) {
  std::istringstream in(ReadFile(path));
  std::vector<T> out;
  std::string line;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    json j = json::parse(line);
    if (j.contains("_meta")) continue;
    out.push_back(parse(j, line));
  }
  return out;
}

std::string FormatThousands(std::size_t n) {
  std::string digits = std::to_string(n);
  std::string out;
  for (std::size_t k = 0; k < digits.size(); ++k) {
    if (k > 0 && (digits.size() - k) % 3 == 0) out.push_back(',');
    out.push_back(digits[k]);
  }
  return out;
}

std::string Fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string SignedFixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.2f", v);
  return buf;
}

// Lemire's unbiased bounded draw in [0, range).
std::uint64_t Bounded(std::mt19937_64& rng, std::uint64_t range) {
  std::uint64_t x = rng();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * range;
  std::uint64_t low = static_cast<std::uint64_t>(m);
  if (low < range) {
    std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      x = rng();
      m = static_cast<unsigned __int128>(x) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace

// ---- RunConfig -------------------------------------------------------------

std::string RunConfig::ToJson() const {
  json j;
  json ds = json::array();
  for (const auto& d : datasets) {
    json jd{{"name", d.name}, {"format", ToString(d.format)}, {"path", d.path}};
    if (!d.exclusions.empty()) jd["exclusions"] = d.exclusions;
    ds.push_back(std::move(jd));
  }
  j["datasets"] = std::move(ds);
  json ms = json::array();
  for (Mode m : modes) ms.push_back(ToString(m));
  j["modes"] = std::move(ms);
  j["scorer"] = {{"mode", scorer.mode == ScorerMode::kFile ? "file" : "http"},
                 {"endpoint", scorer.endpoint},
                 {"max_in_flight", scorer.max_in_flight},
                 {"verify_determinism", scorer.verify_determinism},
                 {"responses", scorer.responses},
                 {"responses_dir", scorer.responses_dir}};
  j["splits"] = {{"train", splits.train_path},
                 {"train_format", splits.train_format},
                 {"sizes", splits.sizes},
                 {"n_seeds", splits.n_seeds},
                 {"holdout", splits.holdout}};
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["model"] = model;
  j["reference"] = reference_path;
  return j.dump();
}

RunConfig RunConfig::FromJson(std::string_view text) {
  RunConfig c;
  try {
    json j = json::parse(text);
    for (const auto& jd : j.value("datasets", json::array())) {
      DatasetConfig d;
      d.name = jd.at("name").get<std::string>();
      d.format = ParseFormat(jd.value("format", "wsc"));
      d.path = jd.at("path").get<std::string>();
      d.exclusions = jd.value("exclusions", "");
      c.datasets.push_back(std::move(d));
    }
    for (const auto& m : j.value("modes", json::array())) {
      Mode mode = ParseMode(m.get<std::string>());
      if (mode == Mode::kOriginal) continue;
      c.modes.push_back(mode);
    }
    if (j.contains("scorer")) {
      const json& s = j["scorer"];
      std::string mode = s.value("mode", "file");
      if (mode != "file" && mode != "http") {
        throw ValidationError("scorer.mode must be file or http");
      }
      c.scorer.mode = mode == "file" ? ScorerMode::kFile : ScorerMode::kHttp;
      c.scorer.endpoint = s.value("endpoint", "");
      c.scorer.max_in_flight = s.value("max_in_flight", std::size_t{4});
      c.scorer.verify_determinism = s.value("verify_determinism", false);
      if (s.contains("responses")) {
        c.scorer.responses = s["responses"].get<std::map<std::string, std::string>>();
      }
      c.scorer.responses_dir = s.value("responses_dir", "");
    }
    if (j.contains("splits")) {
      const json& s = j["splits"];
      c.splits.train_path = s.value("train", "");
      c.splits.train_format = s.value("train_format", "winogrande");
      if (s.contains("sizes")) c.splits.sizes = s["sizes"].get<std::vector<std::size_t>>();
      c.splits.n_seeds = s.value("n_seeds", std::size_t{3});
      c.splits.holdout = s.value("holdout", std::size_t{1267});
    }
    c.seed = j.value("seed", std::uint64_t{0});
    c.output_dir = j.value("output_dir", "winocheck-run");
    c.model = j.value("model", "");
    c.reference_path = j.value("reference", "");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::Load(const std::string& path) { return FromJson(ReadFile(path)); }

std::string RunConfig::Hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : ToJson()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunConfig::MetaJson(std::string_view stage) const {
  return json{{"config_hash", Hash()}, {"seed", seed}, {"stage", stage}, {"tool", "winocheck"}}
      .dump();
}

void RunConfig::CheckPaths() const {
  for (const auto& d : datasets) {
    if (!fs::exists(d.path)) {
      throw ValidationError("dataset '" + d.name + "': path not found: " + d.path);
    }
    if (!d.exclusions.empty() && !fs::exists(d.exclusions)) {
      throw ValidationError("dataset '" + d.name + "': exclusion list not found: " + d.exclusions);
    }
  }
}

std::vector<std::size_t> DefaultSplitSizes() {
  return {0, 100, 500, 1000, 2000, 4000, 6000, 8000, 10000, 12000, 14000, 16000};
}

std::filesystem::path DefaultReferencePath() {
  return fs::path(WINOCHECK_DATA_DIR) / "reference_scores.json";
}

// ---- Stages ----------------------------------------------------------------

Dataset LoadIngested(const RunConfig& config, const std::string& name) {
  fs::path path = StageDir(config, "ingest") / (name + ".jsonl");
  if (!fs::exists(path)) {
    throw ValidationError("ingest output " + path.string() + " not found; run `ingest` first");
  }
  std::ifstream in(path);
  return ReadNormalized(in, name);
}

Dataset LoadPaired(const RunConfig& config, const std::string& name) {
  Dataset dataset = LoadIngested(config, name);
  fs::path path = StageDir(config, "pairs") / (name + ".pairs.json");
  if (!fs::exists(path)) {
    throw ValidationError("pairs manifest " + path.string() + " not found; run `pairs` first");
  }
  return ApplyPairingManifest(std::move(dataset), ReadFile(path));
}

void CmdIngest(const RunConfig& config, std::ostream& log) {
  if (config.datasets.empty()) throw ValidationError("no datasets configured");
  config.CheckPaths();
  for (const auto& d : config.datasets) {
    Dataset dataset = LoadRaw(d.format, d.path, d.name);
    std::size_t parsed = dataset.instances.size();
    json summary{{"_meta", json::parse(config.MetaJson("ingest"))},
                 {"dataset", d.name},
                 {"parsed", parsed}};
    if (!d.exclusions.empty()) {
      FilterResult filtered = FilterAssociative(dataset, ReadIdListFile(d.exclusions));
      for (const auto& w : filtered.warnings) log << "warning: " << w << '\n';
      summary["excluded"] = filtered.removed;
      summary["warnings"] = filtered.warnings;
      dataset = std::move(filtered.dataset);
    }
    summary["instances"] = dataset.instances.size();
    std::ostringstream out;
    out << MetaLine(config, "ingest");
    WriteNormalized(dataset, out);
    WriteFile(StageDir(config, "ingest") / (d.name + ".jsonl"), out.str());
    WriteFile(StageDir(config, "ingest") / (d.name + ".summary.json"), summary.dump(2) + "\n");
    log << "ingest " << d.name << ": " << dataset.instances.size() << " instances";
    if (!d.exclusions.empty()) log << " (" << parsed << " before exclusions)";
    log << '\n';
  }
}

void CmdPairs(const RunConfig& config, std::ostream& log) {
  for (const auto& d : config.datasets) {
    Dataset dataset = PairTwins(LoadIngested(config, d.name));
    WriteFile(StageDir(config, "pairs") / (d.name + ".pairs.json"),
              PairingManifestJson(dataset, config.MetaJson("pairs")));
    log << "pairs " << d.name << ": " << dataset.PairedInstanceCount() << " paired instances, "
        << dataset.groups.size() << " pairs, " << dataset.orphans.size() << " orphans\n";
  }
}

void CmdTransform(const RunConfig& config, std::ostream& log) {
  for (const auto& d : config.datasets) {
    Dataset dataset = LoadPaired(config, d.name);
    json counts{{"_meta", json::parse(config.MetaJson("transform"))}, {"dataset", d.name}};
    for (Mode mode : AblationAndZeroShotModes(config)) {
      std::ostringstream out;
      out << MetaLine(config, "transform");
      fs::path path =
          StageDir(config, "transform") / (d.name + "." + std::string(ToString(mode)) + ".jsonl");
      if (mode == Mode::kZeroShot) {
        std::vector<ZeroShotOutcome> outcomes = parallel::ZeroShotAll(dataset.groups);
        ModeCounts c = CountOutcomes(outcomes);
        TransformedTrainingSet set;
        for (auto& o : outcomes) {
          if (o.ok()) {
            for (auto& q : o.queries) set.queries.push_back(std::move(q));
          } else {
            set.rejections.push_back(o);
          }
        }
        for (const auto& g : dataset.groups) {
          bool kept = std::any_of(set.queries.begin(), set.queries.end(), [&](const auto& q) {
            return q.source_group == g.group_id;
          });
          if (!kept) {
            for (const auto& m : g.members) set.untransformable_ids.push_back(m.id);
          }
        }
        WriteTransformedTrainingSet(set, out);
        std::string untransformable;
        for (const auto& id : set.untransformable_ids) untransformable += id + "\n";
        WriteFile(StageDir(config, "transform") / (d.name + ".zero-shot.untransformable.txt"),
                  untransformable);
        json jc = CountsJson(c);
        jc["groups_in"] = dataset.groups.size();
        jc["groups_kept"] = set.queries.size() / 2;
        counts[std::string(ToString(mode))] = jc;
        log << "transform " << d.name << " zero-shot: " << c.produced << " queries, "
            << set.rejections.size() << " groups rejected\n";
      } else {
        std::vector<TransformOutcome> outcomes = parallel::TransformAll(dataset.instances, mode);
        for (const auto& o : outcomes) out << ToRecord(o) << '\n';
        ModeCounts c = CountOutcomes(outcomes);
        counts[std::string(ToString(mode))] = CountsJson(c);
        log << "transform " << d.name << " " << ToString(mode) << ": " << c.produced
            << " produced, " << c.skipped << " skipped\n";
      }
      WriteFile(path, out.str());
    }
    WriteFile(StageDir(config, "transform") / (d.name + ".counts.json"), counts.dump(2) + "\n");
  }
}

namespace {

struct EvalPlan {
  std::vector<ScoredItem> items;  // gold + (later) prediction
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  std::map<std::string, std::size_t> filter_counts;
  std::vector<ChoiceScoreRequest> choice_requests;
  std::vector<MaskScoreRequest> mask_requests;
  std::vector<ZeroShotQuery> queries;
};

EvalPlan PlanChoice(const RunConfig& config, const Dataset& dataset, Mode setup) {
  EvalPlan plan;
  std::unordered_map<std::string, TransformOutcome> transformed;
  if (setup != Mode::kOriginal) {
    fs::path path = StageDir(config, "transform") /
                    (dataset.name + "." + std::string(ToString(setup)) + ".jsonl");
    if (!fs::exists(path)) {
      throw ValidationError("transform output " + path.string() +
                            " not found; run `transform` first");
    }
    for (auto& o : ReadRecords<TransformOutcome>(
             path, [](const json&, const std::string& line) {
               return TransformOutcomeFromRecord(line);
             })) {
      transformed.emplace(o.source_id, std::move(o));
    }
  }
  for (const auto& g : dataset.groups) {
    std::vector<std::string> ids;
    for (const auto& m : g.members) {
      ids.push_back(m.id);
      ScoredItem item{m.id, m.label, std::nullopt};
      plan.items.push_back(item);
      if (setup == Mode::kOriginal) {
        plan.choice_requests.push_back({m.id, m.sentence, m.target, m.candidates});
        continue;
      }
      auto it = transformed.find(m.id);
      if (it == transformed.end()) {
        throw ValidationError("transform output for " + dataset.name + " lacks instance " + m.id +
                              "; rerun `transform`");
      }
      if (!it->second.ok()) {
        ++plan.filter_counts[it->second.skip_reason];
        continue;
      }
      const TransformedInstance& t = *it->second.result;
      plan.choice_requests.push_back({m.id, t.text, t.target, t.candidates});
    }
    plan.groups.emplace_back(g.group_id, std::move(ids));
  }
  return plan;
}

EvalPlan PlanZeroShot(const RunConfig& config, const Dataset& dataset) {
  EvalPlan plan;
  fs::path path = StageDir(config, "transform") / (dataset.name + ".zero-shot.jsonl");
  if (!fs::exists(path)) {
    throw ValidationError("transform output " + path.string() + " not found; run `transform` first");
  }
  plan.queries = ReadRecords<ZeroShotQuery>(path, [](const json& j, const std::string& line) {
    if (j.contains("rejection_reason")) return ZeroShotQuery{};
    return ZeroShotQueryFromRecord(line);
  });
  plan.queries.erase(std::remove_if(plan.queries.begin(), plan.queries.end(),
                                    [](const ZeroShotQuery& q) { return q.source_id.empty(); }),
                     plan.queries.end());
  std::map<std::string, std::vector<std::string>> by_group;
  std::vector<std::string> group_order;
  for (const auto& q : plan.queries) {
    plan.items.push_back({q.source_id, q.gold, std::nullopt});
    plan.mask_requests.push_back({q.source_id, q.text, q.candidates});
    if (by_group.find(q.source_group) == by_group.end()) group_order.push_back(q.source_group);
    by_group[q.source_group].push_back(q.source_id);
  }
  for (const auto& gid : group_order) plan.groups.emplace_back(gid, by_group[gid]);
  return plan;
}

std::string ResolveResponses(const RunConfig& config, const EvalOptions& options,
                             const std::string& dataset, Mode setup, bool single_target) {
  if (single_target && !options.responses_path.empty()) return options.responses_path;
  std::string key = dataset + "/" + std::string(ToString(setup));
  auto it = config.scorer.responses.find(key);
  if (it != config.scorer.responses.end()) return it->second;
  if (!config.scorer.responses_dir.empty()) {
    fs::path p = fs::path(config.scorer.responses_dir) /
                 (dataset + "." + std::string(ToString(setup)) + ".responses.jsonl");
    if (fs::exists(p)) return p.string();
  }
  return {};
}

std::string ResolveEndpoint(const RunConfig& config) {
  if (!config.scorer.endpoint.empty()) return config.scorer.endpoint;
  if (const char* env = std::getenv(std::string(kEndpointEnvVar).c_str())) return env;
  throw ValidationError("http scorer needs --endpoint or " + std::string(kEndpointEnvVar));
}

}  // namespace

void CmdEval(const RunConfig& config, const EvalOptions& options, std::ostream& log) {
  std::vector<Mode> setups = options.setups;
  if (setups.empty()) {
    setups.push_back(Mode::kOriginal);
    for (Mode m : AblationAndZeroShotModes(config)) setups.push_back(m);
  }
  std::vector<std::string> names = options.datasets;
  if (names.empty()) {
    for (const auto& d : config.datasets) names.push_back(d.name);
  }
  const bool single_target = names.size() == 1 && setups.size() == 1;
  if (!options.responses_path.empty() && !single_target) {
    throw ValidationError("--responses needs exactly one dataset and one setup");
  }

  for (const auto& name : names) {
    FindDataset(config, name);
    Dataset dataset = LoadPaired(config, name);
    for (Mode setup : setups) {
      const std::string stem = name + "." + std::string(ToString(setup));
      EvalPlan plan = setup == Mode::kZeroShot ? PlanZeroShot(config, dataset)
                                               : PlanChoice(config, dataset, setup);
      std::ostringstream req;
      req << MetaLine(config, "eval");
      if (setup == Mode::kZeroShot) {
        WriteRequestBatch(plan.mask_requests, req);
      } else {
        WriteRequestBatch(plan.choice_requests, req);
      }
      WriteFile(StageDir(config, "eval") / (stem + ".requests.jsonl"), req.str());

      // prediction per id; absent id = discarded
      std::unordered_map<std::string, int> predictions;
      std::string model_id;
      if (config.scorer.mode == ScorerMode::kFile) {
        std::string path = ResolveResponses(config, options, name, setup, single_target);
        if (path.empty()) {
          log << "eval " << stem << ": wrote " << (plan.mask_requests.size() + plan.choice_requests.size())
              << " requests; no response file given, skipping scoring\n";
          continue;
        }
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open responses " + path);
        if (setup == Mode::kZeroShot) {
          auto responses = ReadResponseBatch(in, plan.mask_requests);
          for (std::size_t k = 0; k < responses.size(); ++k) {
            model_id = responses[k].model_id;
            const auto& c = responses[k].candidates;
            CandidateScore a = c[0].scorable() ? c[0].log_score : std::nullopt;
            CandidateScore b = c[1].scorable() ? c[1].log_score : std::nullopt;
            if (auto p = ZeroShotDecide(plan.queries[k], {a, b})) {
              predictions[responses[k].id] = *p;
            }
          }
        } else {
          auto responses = ReadResponseBatch(in, plan.choice_requests);
          for (const auto& r : responses) {
            model_id = r.model_id;
            predictions[r.id] = r.scores[1] > r.scores[0] ? 1 : 0;
          }
        }
      } else {
        HttpOptions http;
        http.endpoint = ResolveEndpoint(config);
        http.max_in_flight = config.scorer.max_in_flight;
        HttpScorer scorer(http);
        std::ostringstream resp;
        resp << MetaLine(config, "eval");
        if (setup == Mode::kZeroShot) {
          auto responses = scorer.ScoreMask(plan.mask_requests);
          if (config.scorer.verify_determinism) {
            scorer.VerifyDeterminism(plan.mask_requests, responses);
          }
          WriteResponseBatch(responses, resp);
          for (std::size_t k = 0; k < responses.size(); ++k) {
            model_id = responses[k].model_id;
            const auto& c = responses[k].candidates;
            CandidateScore a = c[0].scorable() ? c[0].log_score : std::nullopt;
            CandidateScore b = c[1].scorable() ? c[1].log_score : std::nullopt;
            if (auto p = ZeroShotDecide(plan.queries[k], {a, b})) {
              predictions[responses[k].id] = *p;
            }
          }
        } else {
          auto responses = scorer.ScoreChoice(plan.choice_requests);
          if (config.scorer.verify_determinism) {
            scorer.VerifyDeterminism(plan.choice_requests, responses);
          }
          WriteResponseBatch(responses, resp);
          for (const auto& r : responses) {
            model_id = r.model_id;
            predictions[r.id] = r.scores[1] > r.scores[0] ? 1 : 0;
          }
        }
        WriteFile(StageDir(config, "eval") / (stem + ".responses.jsonl"), resp.str());
      }

      for (auto& item : plan.items) {
        auto it = predictions.find(item.id);
        if (it != predictions.end()) {
          item.prediction = it->second;
        } else if (setup == Mode::kZeroShot) {
          ++plan.filter_counts[std::string(reason::kMultiToken)];
        }
      }
      EvaluationReport report =
          BuildReport(name, std::string(ToString(setup)), plan.items, plan.groups, Accuracy(),
                      plan.filter_counts);
      report.model_id = model_id;
      WriteFile(StageDir(config, "eval") / (stem + ".report.json"),
                ReportToJson(report, config.MetaJson("eval")));
      WriteFile(StageDir(config, "eval") / (stem + ".report.txt"),
                "# " + config.MetaJson("eval") + "\n" + RenderReportTable({report}));
      log << "eval " << stem << ": single " << FormatPercent(report.single_score) << ", group "
          << FormatPercent(report.group_score) << " (" << report.n_scored << " scored, "
          << report.n_discarded << " discarded)\n";
    }
  }
}

void CmdReport(const RunConfig& config, const ReportOptions& options, std::ostream& log) {
  std::vector<EvaluationReport> reports;
  fs::path eval_dir = StageDir(config, "eval");
  if (fs::exists(eval_dir)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(eval_dir)) {
      const std::string fname = entry.path().filename().string();
      if (fname.size() > 12 && fname.ends_with(".report.json")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) reports.push_back(ReportFromJson(ReadFile(f)));
  }
  if (reports.empty() && options.run_reports.empty()) {
    throw ValidationError("no evaluation reports in " + eval_dir.string() + "; run `eval` first");
  }
  fs::path report_dir = StageDir(config, "report");
  const std::string meta = config.MetaJson("report");
  if (!reports.empty()) {
    std::string table = RenderReportTable(reports);
    WriteFile(report_dir / "summary.txt", "# " + meta + "\n" + table);
    json summary{{"_meta", json::parse(meta)}, {"reports", json::array()}};
    for (const auto& r : reports) {
      summary["reports"].push_back({{"dataset", r.dataset},
                                    {"setup", r.setup},
                                    {"model_id", r.model_id},
                                    {"single_score", r.single_score},
                                    {"group_score", r.group_score},
                                    {"n_scored", r.n_scored},
                                    {"n_groups_scored", r.n_groups_scored}});
    }
    WriteFile(report_dir / "summary.json", summary.dump(2) + "\n");
    log << table;
    if (options.compare_reference) {
      fs::path ref_path =
          config.reference_path.empty() ? DefaultReferencePath() : fs::path(config.reference_path);
      ReferenceTables reference = LoadReferenceTables(ref_path.string());
      std::string comparison = RenderComparison(reports, reference, config.model);
      WriteFile(report_dir / "comparison.txt", "# " + meta + "\n" + comparison);
      log << '\n' << comparison;
    }
  }
  if (!options.run_reports.empty()) {
    std::vector<RunResult> runs;
    for (const auto& path : options.run_reports) runs.push_back(RunResultFromJson(ReadFile(path)));
    CurveTable curve = AggregateRuns(runs);
    for (const auto& w : curve.warnings) log << "warning: " << w << '\n';
    std::string table = RenderCurveTable(curve);
    WriteFile(report_dir / "learning_curve.txt", "# " + meta + "\n" + table);
    WriteFile(report_dir / "learning_curve.tsv", "# " + meta + "\n" + CurveDataFile(curve));
    log << table;
  }
}

void CmdSplits(const RunConfig& config, std::ostream& log) {
  if (config.splits.train_path.empty()) throw ValidationError("splits.train is not configured");
  if (!fs::exists(config.splits.train_path)) {
    throw ValidationError("training file not found: " + config.splits.train_path);
  }
  Dataset train = LoadRaw(ParseFormat(config.splits.train_format), config.splits.train_path, "train");
  std::vector<std::string> ids;
  for (const auto& inst : train.instances) ids.push_back(inst.id);
  std::vector<std::size_t> sizes =
      config.splits.sizes.empty() ? DefaultSplitSizes() : config.splits.sizes;
  auto manifests = MakeSplits(ids, sizes, config.splits.n_seeds, config.splits.holdout, config.seed);
  for (const auto& m : manifests) {
    WriteFile(StageDir(config, "splits") / ("train.seed-" + std::to_string(m.seed) + ".json"),
              SplitManifestJson(m, config.MetaJson("splits")));
  }
  log << "splits: " << manifests.size() << " seeds x " << sizes.size() << " sizes from "
      << ids.size() << " training instances (holdout " << config.splits.holdout << ")\n";
}

// ---- Splits ----------------------------------------------------------------

void SeededShuffle(std::vector<std::string>* items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items->size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(Bounded(rng, i));
    std::swap((*items)[i - 1], (*items)[j]);
  }
}

std::vector<SplitManifest> MakeSplits(const std::vector<std::string>& ids,
                                      std::vector<std::size_t> sizes, std::size_t n_seeds,
                                      std::size_t holdout, std::uint64_t base_seed) {
  if (!std::is_sorted(sizes.begin(), sizes.end())) {
    throw ValidationError("split sizes must be sorted ascending");
  }
  if (holdout > ids.size()) {
    throw ValidationError("holdout " + std::to_string(holdout) + " exceeds training size " +
                          std::to_string(ids.size()));
  }
  const std::size_t available = ids.size() - holdout;
  if (!sizes.empty() && sizes.back() > available) {
    throw ValidationError("largest split " + std::to_string(sizes.back()) +
                          " exceeds available training size " + std::to_string(available) + " (" +
                          std::to_string(ids.size()) + " minus holdout " +
                          std::to_string(holdout) + ")");
  }
  std::vector<std::string> shuffled = ids;
  SeededShuffle(&shuffled, Mix64(base_seed ^ 0x686f6c646f7574ULL));
  std::vector<std::string> holdout_ids(shuffled.begin(), shuffled.begin() + holdout);
  std::unordered_set<std::string> held(holdout_ids.begin(), holdout_ids.end());
  std::vector<std::string> pool;
  for (const auto& id : ids) {
    if (held.count(id) == 0) pool.push_back(id);
  }

  std::vector<SplitManifest> out;
  for (std::size_t k = 0; k < n_seeds; ++k) {
    SplitManifest m;
    m.seed = base_seed + k;
    m.sizes = sizes;
    m.holdout = holdout_ids;
    std::vector<std::string> perm = pool;
    SeededShuffle(&perm, m.seed);
    for (std::size_t size : sizes) {
      m.splits[size] = std::vector<std::string>(perm.begin(), perm.begin() + size);
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::string SplitManifestJson(const SplitManifest& m, std::string_view meta_json) {
  json doc;
  if (!meta_json.empty()) doc["_meta"] = json::parse(meta_json);
  doc["seed"] = m.seed;
  doc["sizes"] = m.sizes;
  json splits = json::array();
  for (std::size_t size : m.sizes) {
    splits.push_back({{"size", size}, {"ids", m.splits.at(size)}});
  }
  doc["splits"] = std::move(splits);
  doc["holdout"] = m.holdout;
  return doc.dump(1) + "\n";
}

SplitManifest SplitManifestFromJson(std::string_view text) {
  SplitManifest m;
  try {
    json doc = json::parse(text);
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.sizes = doc.at("sizes").get<std::vector<std::size_t>>();
    for (const auto& s : doc.at("splits")) {
      m.splits[s.at("size").get<std::size_t>()] = s.at("ids").get<std::vector<std::string>>();
    }
    m.holdout = doc.at("holdout").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("split manifest: ") + e.what());
  }
  std::unordered_set<std::string> held(m.holdout.begin(), m.holdout.end());
  const std::vector<std::string>* prev = nullptr;
  for (std::size_t size : m.sizes) {
    auto it = m.splits.find(size);
    if (it == m.splits.end() || it->second.size() != size) {
      throw ValidationError("split manifest: split of size " + std::to_string(size) +
                            " missing or wrong length");
    }
    std::unordered_set<std::string> members(it->second.begin(), it->second.end());
    if (members.size() != it->second.size()) {
      throw ValidationError("split manifest: duplicate ids in split " + std::to_string(size));
    }
    for (const auto& id : it->second) {
      if (held.count(id)) {
        throw ValidationError("split manifest: id " + id + " is in both split and holdout");
      }
    }
    if (prev != nullptr) {
      for (const auto& id : *prev) {
        if (members.count(id) == 0) {
          throw ValidationError("split manifest: split " + std::to_string(size) +
                                " does not contain the smaller split");
        }
      }
    }
    prev = &it->second;
  }
  return m;
}

// ---- Aggregation -----------------------------------------------------------

CurveTable AggregateRuns(const std::vector<RunResult>& runs) {
  std::map<std::size_t, std::vector<const RunResult*>> by_size;
  for (const auto& r : runs) by_size[r.train_size].push_back(&r);
  std::size_t expected = 0;
  for (const auto& [size, rs] : by_size) expected = std::max(expected, rs.size());
  CurveTable table;
  for (const auto& [size, rs] : by_size) {
    CurvePoint p;
    p.train_size = size;
    p.n_runs = rs.size();
    double ss = 0.0;
    double gs = 0.0;
    for (const RunResult* r : rs) {
      ss += r->single;
      gs += r->group;
    }
    const double n = static_cast<double>(rs.size());
    p.single_mean = ss / n;
    p.group_mean = gs / n;
    double sv = 0.0;
    double gv = 0.0;
    for (const RunResult* r : rs) {
      sv += (r->single - p.single_mean) * (r->single - p.single_mean);
      gv += (r->group - p.group_mean) * (r->group - p.group_mean);
    }
    p.single_std = std::sqrt(sv / n);
    p.group_std = std::sqrt(gv / n);
    if (rs.size() < expected) {
      table.warnings.push_back("size " + std::to_string(size) + ": mean over " +
                               std::to_string(rs.size()) + " runs (expected " +
                               std::to_string(expected) + ")");
    }
    table.points.push_back(p);
  }
  return table;
}

RunResult RunResultFromJson(std::string_view text) {
  RunResult r;
  try {
    json j = json::parse(text);
    r.train_size = j.at("train_size").get<std::size_t>();
    r.seed = j.value("seed", std::uint64_t{0});
    r.single = j.at("single_score").get<double>();
    r.group = j.at("group_score").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("run report: ") + e.what());
  }
  return r;
}

std::string RenderCurveTable(const CurveTable& table) {
  std::ostringstream out;
  out << std::setw(11) << "# Training" << " | " << std::setw(14) << "Single" << " | "
      << std::setw(14) << "Group" << " | " << "n" << '\n';
  for (const auto& p : table.points) {
    std::string single = Fixed2(p.single_mean * 100.0) + " (" + Fixed2(p.single_std * 100.0) + ")";
    std::string group = Fixed2(p.group_mean * 100.0) + " (" + Fixed2(p.group_std * 100.0) + ")";
    out << std::setw(11) << FormatThousands(p.train_size) << " | " << std::setw(14) << single
        << " | " << std::setw(14) << group << " | " << p.n_runs << '\n';
  }
  return out.str();
}

std::string CurveDataFile(const CurveTable& table) {
  std::ostringstream out;
  out << "train_size\tsingle_mean\tsingle_std\tgroup_mean\tgroup_std\tn_runs\n";
  out << std::setprecision(10);
  for (const auto& p : table.points) {
    out << p.train_size << '\t' << p.single_mean << '\t' << p.single_std << '\t' << p.group_mean
        << '\t' << p.group_std << '\t' << p.n_runs << '\n';
  }
  return out.str();
}

// ---- Reference -------------------------------------------------------------

std::optional<ReferenceEntry> ReferenceTables::Find(std::string_view model,
                                                    std::string_view dataset,
                                                    std::string_view setup) const {
  for (const auto& e : entries) {
    if (IEquals(e.model, model) && IEquals(e.dataset, dataset) && e.setup == setup) return e;
  }
  return std::nullopt;
}

ReferenceTables ParseReferenceTables(std::string_view text) {
  ReferenceTables t;
  try {
    json doc = json::parse(text);
    for (const auto& e : doc.at("entries")) {
      t.entries.push_back({e.at("table").get<std::string>(), e.at("model").get<std::string>(),
                           e.at("dataset").get<std::string>(), e.at("setup").get<std::string>(),
                           e.at("single").get<double>(), e.at("group").get<double>()});
    }
    for (const auto& c : doc.value("learning_curves", json::array())) {
      t.curves.push_back({c.at("model").get<std::string>(), c.at("train_size").get<std::size_t>(),
                          c.at("single").get<double>(), c.at("single_std").get<double>(),
                          c.at("group").get<double>(), c.at("group_std").get<double>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("reference tables: ") + e.what());
  }
  return t;
}

ReferenceTables LoadReferenceTables(const std::string& path) {
  return ParseReferenceTables(ReadFile(path));
}

std::string RenderComparison(const std::vector<EvaluationReport>& reports,
                             const ReferenceTables& reference, std::string_view model) {
  std::size_t w_dataset = 7;
  std::size_t w_setup = 5;
  for (const auto& r : reports) {
    w_dataset = std::max(w_dataset, r.dataset.size());
    w_setup = std::max(w_setup, r.setup.size());
  }
  auto cell = [](const std::string& s) {
    std::ostringstream o;
    o << std::setw(7) << s;
    return o.str();
  };
  std::ostringstream out;
  out << "Reference model: " << (model.empty() ? "(none)" : std::string(model)) << '\n';
  out << std::left << std::setw(static_cast<int>(w_dataset)) << "Dataset" << "  "
      << std::setw(static_cast<int>(w_setup)) << "Setup" << std::right << "  |"
      << cell("Single") << cell("Ref") << cell("Delta") << "  |" << cell("Group")
      << cell("Ref") << cell("Delta") << '\n';
  for (const auto& r : reports) {
    auto ref = reference.Find(model, r.dataset, r.setup);
    double ours_s = r.single_score * 100.0;
    double ours_g = r.group_score * 100.0;
    out << std::left << std::setw(static_cast<int>(w_dataset)) << r.dataset << "  "
        << std::setw(static_cast<int>(w_setup)) << r.setup << std::right << "  |"
        << cell(Fixed2(ours_s)) << cell(ref ? Fixed2(ref->single) : "-")
        << cell(ref ? SignedFixed2(ours_s - ref->single) : "-") << "  |" << cell(Fixed2(ours_g))
        << cell(ref ? Fixed2(ref->group) : "-")
        << cell(ref ? SignedFixed2(ours_g - ref->group) : "-") << '\n';
  }
  return out.str();
}

}  // namespace winocheck
