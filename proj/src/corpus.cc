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

#include "winocheck/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "json.hpp"
#include "winocheck/errors.h"
#include "winocheck/parallel.h"

namespace winocheck {
namespace {

using json = nlohmann::json;

std::string ReadWholeFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string RecordError(std::size_t index, const std::string& what) {
  return "record " + std::to_string(index) + ": " + what;
}

// Joins WSC text fragments around the pronoun. No space is inserted
// before fragments that start with punctuation or a clitic ("'s").
void AppendFragment(std::string* out, std::string_view fragment) {
  if (fragment.empty()) return;
  char first = fragment.front();
  bool glue = IsTerminalPunct(first) || first == '\'' || first == ')' ||
              first == ':';
  if (!out->empty() && !glue) out->push_back(' ');
  out->append(fragment);
}

int ParseAnswerLetter(std::string_view raw, std::size_t index) {
  for (char c : raw) {
    if (c == 'A' || c == 'a') return 0;
    if (c == 'B' || c == 'b') return 1;
    if (!IsSpace(c)) break;
  }
  throw ParseError(RecordError(index, "bad correctAnswer '" +
                                          std::string(Trim(raw)) + "'"));
}

}  // namespace

std::string_view ToString(TargetKind kind) {
  return kind == TargetKind::kPronoun ? "pronoun" : "placeholder";
}

std::string_view ToString(Source source) {
  return source == Source::kWsc ? "wsc" : "winogrande";
}

TargetKind ParseTargetKind(std::string_view s) {
  if (s == "pronoun") return TargetKind::kPronoun;
  if (s == "placeholder") return TargetKind::kPlaceholder;
  throw ParseError("unknown target_kind '" + std::string(s) + "'");
}

Source ParseSource(std::string_view s) {
  if (s == "wsc") return Source::kWsc;
  if (s == "winogrande") return Source::kWinogrande;
  throw ParseError("unknown source '" + std::string(s) + "'");
}

void Validate(const WinogradInstance& instance) {
  const std::string where = "instance " + instance.id + ": ";
  for (const auto& c : instance.candidates) {
    if (Trim(c).empty()) throw ValidationError(where + "empty candidate");
  }
  if (IEquals(instance.candidates[0], instance.candidates[1])) {
    throw ValidationError(where + "candidates are not distinct");
  }
  if (instance.target.end() > instance.sentence.size() ||
      instance.target.empty()) {
    throw ValidationError(where + "target span out of bounds");
  }
  if (Trim(instance.TargetText()).empty()) {
    throw ValidationError(where + "target span is blank");
  }
  if (instance.label != 0 && instance.label != 1) {
    throw ValidationError(where + "label must be 0 or 1");
  }
}

const WinogradInstance* Dataset::Find(std::string_view id) const {
  for (const auto& inst : instances) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

std::size_t Dataset::PairedInstanceCount() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.members.size();
  return n;
}

// ---- WSC -------------------------------------------------------------------

Dataset ParseWsc(std::string_view xml, std::string name) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(xml)};
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("WSC XML: ") + e.what());
  }
  Dataset dataset;
  dataset.name = std::move(name);
  auto collection = tree.get_child_optional("collection");
  if (!collection) throw ParseError("WSC XML: no records");
  std::size_t index = 0;
  for (const auto& [tag, schema] : *collection) {
    if (tag != "schema") continue;
    auto txt1 = schema.get_optional<std::string>("text.txt1");
    auto pron = schema.get_optional<std::string>("text.pron");
    auto txt2 = schema.get_optional<std::string>("text.txt2");
    auto correct = schema.get_optional<std::string>("correctAnswer");
    auto answers = schema.get_child_optional("answers");
    if (!txt1 || !pron || !txt2 || !correct || !answers) {
      throw ParseError(RecordError(index, "missing text/pron/answers field"));
    }
    std::vector<std::string> options;
    for (const auto& [atag, answer] : *answers) {
      if (atag == "answer") {
        options.push_back(CollapseWhitespace(answer.get_value<std::string>()));
      }
    }
    if (options.size() != 2) {
      throw ParseError(RecordError(index, "expected 2 answers, got " +
                                              std::to_string(options.size())));
    }
    std::string pronoun = CollapseWhitespace(*pron);
    if (pronoun.empty()) throw ParseError(RecordError(index, "empty pronoun"));

    std::string sentence;
    AppendFragment(&sentence, CollapseWhitespace(*txt1));
    if (!sentence.empty()) sentence.push_back(' ');
    Span target{sentence.size(), pronoun.size()};
    sentence += pronoun;
    AppendFragment(&sentence, CollapseWhitespace(*txt2));

    WinogradInstance inst;
    inst.id = std::to_string(index);
    inst.sentence = std::move(sentence);
    inst.candidates = {options[0], options[1]};
    inst.target = target;
    inst.target_kind = TargetKind::kPronoun;
    inst.label = ParseAnswerLetter(*correct, index);
    inst.source = Source::kWsc;
    inst.ordinal = index;
    try {
      Validate(inst);
    } catch (const ValidationError& e) {
      throw ParseError(RecordError(index, e.what()));
    }
    dataset.instances.push_back(std::move(inst));
    ++index;
  }
  if (dataset.instances.empty()) throw ParseError("WSC XML: no records");
  return dataset;
}

Dataset ParseWscFile(const std::string& path, std::string name) {
  return ParseWsc(ReadWholeFile(path), std::move(name));
}

// ---- Winogrande ------------------------------------------------------------

Dataset ParseWinogrande(std::string_view jsonl, std::string name) {
  Dataset dataset;
  dataset.name = std::move(name);
  std::istringstream in{std::string(jsonl)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + "invalid JSON: " + e.what());
    }
    for (const char* field : {"sentence", "option1", "option2", "answer"}) {
      if (!rec.contains(field)) {
        throw ParseError(where + "missing field '" + field + "'");
      }
    }
    const std::string sentence = rec["sentence"].get<std::string>();
    std::size_t blank = sentence.find('_');
    if (blank == std::string::npos) {
      throw ParseError(where + "sentence has no '_' placeholder");
    }
    if (sentence.find('_', blank + 1) != std::string::npos) {
      throw ParseError(where + "sentence has more than one '_'");
    }
    std::string answer = rec["answer"].is_string()
                             ? rec["answer"].get<std::string>()
                             : rec["answer"].dump();
    if (answer != "1" && answer != "2") {
      throw ParseError(where + "answer must be \"1\" or \"2\"");
    }
    WinogradInstance inst;
    inst.id = rec.contains("qID") ? rec["qID"].get<std::string>()
                                  : "line-" + std::to_string(line_no);
    inst.sentence = sentence;
    inst.candidates = {std::string(Trim(rec["option1"].get<std::string>())),
                       std::string(Trim(rec["option2"].get<std::string>()))};
    inst.target = {blank, 1};
    inst.target_kind = TargetKind::kPlaceholder;
    inst.label = answer == "1" ? 0 : 1;
    inst.source = Source::kWinogrande;
    inst.ordinal = dataset.instances.size();
    try {
      Validate(inst);
    } catch (const ValidationError& e) {
      throw ParseError(where + e.what());
    }
    dataset.instances.push_back(std::move(inst));
  }
  if (dataset.instances.empty()) throw ParseError("Winogrande: no records");
  return dataset;
}

Dataset ParseWinograndeFile(const std::string& path, std::string name) {
  return ParseWinogrande(ReadWholeFile(path), std::move(name));
}

// ---- Normalized format -----------------------------------------------------

std::string ToNormalizedRecord(const WinogradInstance& inst) {
  json rec;
  rec["id"] = inst.id;
  rec["sentence"] = inst.sentence;
  rec["option1"] = inst.candidates[0];
  rec["option2"] = inst.candidates[1];
  rec["target_span_start"] = inst.target.begin;
  rec["target_span_len"] = inst.target.length;
  rec["target_kind"] = ToString(inst.target_kind);
  rec["label"] = inst.label;
  rec["source"] = ToString(inst.source);
  if (inst.group_hint) rec["group_id"] = *inst.group_hint;
  return rec.dump();
}

WinogradInstance FromNormalizedRecord(std::string_view line,
                                      std::size_t ordinal) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("normalized record: ") + e.what());
  }
  WinogradInstance inst;
  try {
    inst.id = rec.at("id").get<std::string>();
    inst.sentence = rec.at("sentence").get<std::string>();
    inst.candidates = {rec.at("option1").get<std::string>(),
                       rec.at("option2").get<std::string>()};
    inst.target = {rec.at("target_span_start").get<std::size_t>(),
                   rec.at("target_span_len").get<std::size_t>()};
    inst.target_kind = ParseTargetKind(rec.at("target_kind").get<std::string>());
    inst.label = rec.at("label").get<int>();
    inst.source = rec.contains("source")
                      ? ParseSource(rec["source"].get<std::string>())
                      : (inst.target_kind == TargetKind::kPlaceholder
                             ? Source::kWinogrande
                             : Source::kWsc);
    if (rec.contains("group_id")) {
      inst.group_hint = rec["group_id"].get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("normalized record: ") + e.what());
  }
  inst.ordinal = ordinal;
  Validate(inst);
  return inst;
}

void WriteNormalized(const Dataset& dataset, std::ostream& out) {
  for (const auto& inst : dataset.instances) {
    out << ToNormalizedRecord(inst) << '\n';
  }
}

Dataset ReadNormalized(std::istream& in, std::string name) {
  Dataset dataset;
  dataset.name = std::move(name);
  std::string line;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    if (line.find("\"_meta\"") != std::string::npos &&
        json::parse(line).contains("_meta")) {
      continue;
    }
    dataset.instances.push_back(
        FromNormalizedRecord(line, dataset.instances.size()));
  }
  return dataset;
}

// ---- Twin detection --------------------------------------------------------

std::optional<SpecialSpans> DetectSpecialSpans(std::string_view a,
                                               std::string_view b) {
  const std::vector<Token> ta = TokenizeForDiff(a);
  const std::vector<Token> tb = TokenizeForDiff(b);
  const std::size_t na = ta.size();
  const std::size_t nb = tb.size();
  std::size_t prefix = 0;
  while (prefix < na && prefix < nb && ta[prefix].text == tb[prefix].text) {
    ++prefix;
  }
  std::size_t suffix = 0;
  while (suffix < na - prefix && suffix < nb - prefix &&
         ta[na - 1 - suffix].text == tb[nb - 1 - suffix].text) {
    ++suffix;
  }
  const std::size_t a_len = na - prefix - suffix;
  const std::size_t b_len = nb - prefix - suffix;
  if (a_len == 0 || b_len == 0) return std::nullopt;

  // A shared token inside the middle regions means an optimal alignment
  // splits the difference into several regions.
  std::unordered_set<std::string_view> middle_a;
  for (std::size_t k = prefix; k < prefix + a_len; ++k) {
    middle_a.insert(ta[k].text);
  }
  for (std::size_t k = prefix; k < prefix + b_len; ++k) {
    if (middle_a.count(tb[k].text) != 0) return std::nullopt;
  }

  auto region = [](const std::vector<Token>& t, std::size_t first,
                   std::size_t count) {
    const Span& lo = t[first].span;
    const Span& hi = t[first + count - 1].span;
    return Span{lo.begin, hi.end() - lo.begin};
  };
  return SpecialSpans{region(ta, prefix, a_len), region(tb, prefix, b_len),
                      a_len, b_len};
}

std::optional<SpecialSpans> DetectSpecialSpans(const WinogradInstance& a,
                                               const WinogradInstance& b) {
  return DetectSpecialSpans(a.sentence, b.sentence);
}

std::string CandidateKey(const WinogradInstance& instance) {
  std::string x = ToLower(Trim(instance.candidates[0]));
  std::string y = ToLower(Trim(instance.candidates[1]));
  if (y < x) std::swap(x, y);
  return x + '\x1f' + y;
}

std::vector<TwinEdge> SelectPairs(const std::vector<WinogradInstance>& instances,
                                  std::vector<TwinEdge> edges) {
  auto key = [&](const TwinEdge& e) {
    const WinogradInstance& a = instances[e.i];
    const WinogradInstance& b = instances[e.j];
    std::size_t lo = std::min(a.ordinal, b.ordinal);
    std::size_t hi = std::max(a.ordinal, b.ordinal);
    bool adjacent = a.source == Source::kWsc && b.source == Source::kWsc &&
                    hi - lo == 1;
    return std::make_tuple(e.spans.a_tokens + e.spans.b_tokens, !adjacent, lo,
                           hi, std::min(a.id, b.id), std::max(a.id, b.id));
  };
  std::sort(edges.begin(), edges.end(),
            [&](const TwinEdge& x, const TwinEdge& y) { return key(x) < key(y); });
  std::vector<bool> used(instances.size(), false);
  std::vector<TwinEdge> chosen;
  for (const TwinEdge& e : edges) {
    if (used[e.i] || used[e.j]) continue;
    used[e.i] = used[e.j] = true;
    chosen.push_back(e);
  }
  return chosen;
}

TwinGroup MakeGroup(const WinogradInstance& a, const WinogradInstance& b,
                    const SpecialSpans& spans) {
  TwinGroup group;
  bool a_first = a.ordinal < b.ordinal ||
                 (a.ordinal == b.ordinal && a.id <= b.id);
  const WinogradInstance& first = a_first ? a : b;
  const WinogradInstance& second = a_first ? b : a;
  group.group_id = first.id + "~" + second.id;
  group.members = {first, second};
  group.special_spans = a_first ? std::vector<Span>{spans.a, spans.b}
                                : std::vector<Span>{spans.b, spans.a};
  return group;
}

Dataset PairTwins(Dataset dataset) {
  std::vector<TwinEdge> edges = parallel::FindTwinEdges(dataset.instances);
  std::vector<TwinEdge> chosen = SelectPairs(dataset.instances, std::move(edges));

  dataset.groups.clear();
  dataset.orphans.clear();
  std::vector<bool> paired(dataset.instances.size(), false);
  for (const TwinEdge& e : chosen) {
    paired[e.i] = paired[e.j] = true;
    dataset.groups.push_back(
        MakeGroup(dataset.instances[e.i], dataset.instances[e.j], e.spans));
  }
  // Output order follows the earliest member's ordinal.
  std::sort(dataset.groups.begin(), dataset.groups.end(),
            [](const TwinGroup& x, const TwinGroup& y) {
              return std::make_pair(x.members[0].ordinal, x.members[0].id) <
                     std::make_pair(y.members[0].ordinal, y.members[0].id);
            });
  std::vector<std::pair<std::size_t, std::string>> orphans;
  for (std::size_t k = 0; k < dataset.instances.size(); ++k) {
    if (!paired[k]) {
      orphans.emplace_back(dataset.instances[k].ordinal,
                           dataset.instances[k].id);
    }
  }
  std::sort(orphans.begin(), orphans.end());
  for (auto& [ord, id] : orphans) dataset.orphans.push_back(std::move(id));
  return dataset;
}

// ---- Filtering -------------------------------------------------------------

FilterResult FilterAssociative(const Dataset& dataset,
                               const std::vector<std::string>& exclusion_ids) {
  std::unordered_set<std::string> known;
  for (const auto& inst : dataset.instances) known.insert(inst.id);
  FilterResult result;
  std::unordered_set<std::string> excluded;
  for (const auto& id : exclusion_ids) {
    if (known.count(id) == 0) {
      result.warnings.push_back("exclusion id '" + id + "' not in dataset " +
                                dataset.name);
    } else {
      excluded.insert(id);
    }
  }
  if (excluded.empty()) {
    result.dataset = dataset;
    return result;
  }
  Dataset kept;
  kept.name = dataset.name;
  for (const auto& inst : dataset.instances) {
    if (excluded.count(inst.id) == 0) kept.instances.push_back(inst);
  }
  result.removed = dataset.instances.size() - kept.instances.size();
  result.dataset = PairTwins(std::move(kept));
  return result;
}

std::vector<std::string> ReadIdList(std::istream& in) {
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string_view id = Trim(line);
    if (!id.empty()) ids.emplace_back(id);
  }
  return ids;
}

std::vector<std::string> ReadIdListFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return ReadIdList(in);
}

// ---- Manifest --------------------------------------------------------------

std::string PairingManifestJson(const Dataset& dataset,
                                std::string_view meta_json) {
  json doc;
  if (!meta_json.empty()) doc["_meta"] = json::parse(meta_json);
  doc["dataset"] = dataset.name;
  doc["n_instances"] = dataset.instances.size();
  doc["n_groups"] = dataset.groups.size();
  doc["n_paired_instances"] = dataset.PairedInstanceCount();
  json groups = json::array();
  for (const auto& g : dataset.groups) {
    json jg;
    jg["group_id"] = g.group_id;
    json members = json::array();
    json special = json::array();
    json spans = json::array();
    for (std::size_t k = 0; k < g.members.size(); ++k) {
      members.push_back(g.members[k].id);
      special.push_back(std::string(g.SpecialText(k)));
      spans.push_back({g.special_spans[k].begin, g.special_spans[k].length});
    }
    jg["members"] = std::move(members);
    jg["special"] = std::move(special);
    jg["special_spans"] = std::move(spans);
    groups.push_back(std::move(jg));
  }
  doc["groups"] = std::move(groups);
  doc["orphans"] = dataset.orphans;
  return doc.dump(2) + "\n";
}

Dataset ApplyPairingManifest(Dataset dataset, std::string_view manifest_json) {
  json doc;
  try {
    doc = json::parse(manifest_json);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("pairing manifest: ") + e.what());
  }
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t k = 0; k < dataset.instances.size(); ++k) {
    by_id.emplace(dataset.instances[k].id, k);
  }
  dataset.groups.clear();
  dataset.orphans.clear();
  for (const auto& jg : doc.at("groups")) {
    TwinGroup g;
    g.group_id = jg.at("group_id").get<std::string>();
    const auto& members = jg.at("members");
    const auto& spans = jg.at("special_spans");
    for (std::size_t k = 0; k < members.size(); ++k) {
      auto it = by_id.find(members[k].get<std::string>());
      if (it == by_id.end()) {
        throw ValidationError("pairing manifest references unknown id " +
                              members[k].get<std::string>());
      }
      g.members.push_back(dataset.instances[it->second]);
      g.special_spans.push_back(
          {spans[k][0].get<std::size_t>(), spans[k][1].get<std::size_t>()});
    }
    dataset.groups.push_back(std::move(g));
  }
  dataset.orphans = doc.at("orphans").get<std::vector<std::string>>();
  return dataset;
}

}  // namespace winocheck
