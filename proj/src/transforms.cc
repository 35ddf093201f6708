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

#include "winocheck/transforms.h"

#include <algorithm>
#include <array>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "winocheck/errors.h"

namespace winocheck {
namespace {

using json = nlohmann::json;

// Discourse markers that open a new segment in PartSent.
constexpr std::array<std::string_view, 8> kWordMarkers = {
    "so", "but", "and", "because", "although", "though", "due", "since"};

bool IsWordMarker(std::string_view token) {
  for (std::string_view m : kWordMarkers) {
    if (IEquals(token, m)) return true;
  }
  return false;
}

bool IsPunctMarker(std::string_view token) {
  return token == "." || token == "," || token == ";" || token == "?";
}

constexpr std::array<std::string_view, 15> kDeterminers = {
    "the", "a",   "an",    "this", "that", "these", "those", "his",
    "her", "its", "their", "my",   "your", "our",   "some"};

bool IsDeterminer(std::string_view token) {
  for (std::string_view d : kDeterminers) {
    if (IEquals(token, d)) return true;
  }
  return false;
}

constexpr std::array<std::string_view, 12> kPrepositions = {
    "of", "to", "in", "on", "at", "for", "with", "from", "by", "into", "about", "like"};

bool IsPreposition(std::string_view token) {
  for (std::string_view p : kPrepositions) {
    if (IEquals(token, p)) return true;
  }
  return false;
}

bool OverlapsAny(const Span& span, const std::vector<Span>& blocked) {
  for (const Span& b : blocked) {
    if (span.Overlaps(b)) return true;
  }
  return false;
}

std::string_view FirstWord(std::string_view s) {
  s = Trim(s);
  std::size_t sp = 0;
  while (sp < s.size() && !IsSpace(s[sp])) ++sp;
  return s.substr(0, sp);
}

std::string_view HeadWord(std::string_view candidate) {
  candidate = Trim(candidate);
  std::size_t start = candidate.size();
  while (start > 0 && !IsSpace(candidate[start - 1])) --start;
  std::string_view head = candidate.substr(start);
  while (!head.empty() && IsTerminalPunct(head.back())) head.remove_suffix(1);
  return head;
}

// Widens a head-word hit left over up to three tokens ending at a
// determiner; without a determiner only the head itself is kept. A
// preposition ends the noun phrase.
Span ExpandHead(const std::vector<Token>& tokens, std::size_t head_token,
                const Span& head, const std::vector<Span>& blocked) {
  constexpr std::size_t kMaxLeft = 3;
  for (std::size_t step = 1; step <= kMaxLeft && step <= head_token; ++step) {
    const Token& t = tokens[head_token - step];
    if (IsPunctMarker(t.text) || IsTerminalPunct(t.text.front()) ||
        IsWordMarker(t.text) || IsPreposition(t.text) || OverlapsAny(t.span, blocked)) {
      break;
    }
    if (IsDeterminer(t.text)) {
      return Span{t.span.begin, head.end() - t.span.begin};
    }
  }
  return head;
}

std::string SpliceDeletions(std::string_view text, std::vector<Span> deletions,
                            Span* target) {
  std::sort(deletions.begin(), deletions.end(),
            [](const Span& x, const Span& y) { return x.begin < y.begin; });
  std::string out;
  std::size_t pos = 0;
  std::size_t removed_before_target = 0;
  for (const Span& d : deletions) {
    if (d.end() <= pos) continue;
    std::size_t start = std::max(d.begin, pos);
    out.append(text.substr(pos, start - pos));
    if (d.end() <= target->begin) removed_before_target += d.end() - start;
    // Keep words on both sides of a deletion apart.
    out.push_back(' ');
    if (d.end() <= target->begin) --removed_before_target;
    pos = d.end();
  }
  out.append(text.substr(pos));
  target->begin -= removed_before_target;
  return out;
}

json CandidatesJson(const std::array<std::string, 2>& c) {
  return json::array({c[0], c[1]});
}

}  // namespace

std::string_view ToString(Mode mode) {
  switch (mode) {
    case Mode::kOriginal:
      return "original";
    case Mode::kNoCands:
      return "no-cands";
    case Mode::kPartSent:
      return "part-sent";
    case Mode::kZeroShot:
      return "zero-shot";
  }
  return "?";
}

Mode ParseMode(std::string_view s) {
  if (s == "original") return Mode::kOriginal;
  if (s == "no-cands" || s == "no_cands") return Mode::kNoCands;
  if (s == "part-sent" || s == "part_sent") return Mode::kPartSent;
  if (s == "zero-shot" || s == "zero_shot") return Mode::kZeroShot;
  throw ValidationError("unknown mode '" + std::string(s) + "'");
}

// ---- Localization ----------------------------------------------------------

std::vector<Mention> LocateCandidate(std::string_view sentence,
                                     std::string_view candidate,
                                     const std::vector<Span>& blocked) {
  std::vector<Mention> mentions;
  candidate = Trim(candidate);
  for (const Span& hit : FindAllWords(sentence, candidate)) {
    if (!OverlapsAny(hit, blocked)) mentions.push_back({hit, true});
  }
  if (!mentions.empty()) return mentions;

  std::string_view head = HeadWord(candidate);
  if (head.empty()) return mentions;
  const std::vector<Token> tokens = TokenizeForDiff(sentence);
  for (const Span& hit : FindAllWords(sentence, head)) {
    if (OverlapsAny(hit, blocked)) continue;
    auto it = std::find_if(tokens.begin(), tokens.end(), [&](const Token& t) {
      return t.span.Contains(hit.begin);
    });
    if (it == tokens.end()) continue;
    std::size_t k = static_cast<std::size_t>(it - tokens.begin());
    mentions.push_back({ExpandHead(tokens, k, hit, blocked), false});
  }
  return mentions;
}

// ---- Ablations -------------------------------------------------------------

TransformOutcome NoCands(const WinogradInstance& instance) {
  TransformOutcome outcome;
  outcome.source_id = instance.id;
  outcome.mode = Mode::kNoCands;

  // Longer candidate first so a shorter one cannot claim part of it.
  std::array<std::size_t, 2> order = {0, 1};
  if (Trim(instance.candidates[1]).size() > Trim(instance.candidates[0]).size()) {
    order = {1, 0};
  }
  std::vector<Span> blocked = {instance.target};
  std::vector<Span> deletions;
  std::vector<std::string> notes;
  for (std::size_t c : order) {
    std::vector<Mention> found =
        LocateCandidate(instance.sentence, instance.candidates[c], blocked);
    if (found.empty()) {
      outcome.skip_reason = reason::kCandidateNotLocatable;
      outcome.detail = instance.candidates[c];
      return outcome;
    }
    for (const Mention& m : found) {
      blocked.push_back(m.span);
      deletions.push_back(m.span);
      notes.push_back(std::string(m.exact ? "removed '" : "removed head-expanded '") +
                      std::string(m.span.In(instance.sentence)) + "' at " +
                      std::to_string(m.span.begin));
    }
  }

  Span target = instance.target;
  std::string spliced = SpliceDeletions(instance.sentence, deletions, &target);
  TransformedInstance out;
  out.source_id = instance.id;
  out.mode = Mode::kNoCands;
  out.text = CollapseWhitespace(spliced, &target);
  out.target = target;
  out.label = instance.label;
  out.candidates = instance.candidates;
  out.notes = std::move(notes);
  outcome.result = std::move(out);
  return outcome;
}

std::string PartSentText(std::string_view text, Span* target) {
  const std::vector<Token> tokens = TokenizeForDiff(text);
  std::size_t t = tokens.size();
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (tokens[k].span.Contains(target->begin)) {
      t = k;
      break;
    }
  }
  if (t == tokens.size()) return CollapseWhitespace(text, target);

  auto is_marker = [&](std::size_t k) {
    return IsPunctMarker(tokens[k].text) || IsWordMarker(tokens[k].text);
  };
  std::size_t left = t;  // index of the opening marker, or t if none
  bool has_left = false;
  for (std::size_t k = t; k-- > 0;) {
    if (is_marker(k)) {
      left = k;
      has_left = true;
      break;
    }
  }
  std::size_t right = tokens.size();
  for (std::size_t k = t + 1; k < tokens.size(); ++k) {
    if (is_marker(k)) {
      right = k;
      break;
    }
  }

  std::size_t start;
  if (!has_left) {
    start = tokens.front().span.begin;
  } else if (IsWordMarker(tokens[left].text)) {
    start = tokens[left].span.begin;
  } else {
    start = tokens[left + 1].span.begin;
  }
  std::size_t end;
  if (right < tokens.size() && IsPunctMarker(tokens[right].text)) {
    end = tokens[right].span.end();
  } else {
    end = tokens[right - 1].span.end();
  }
  Span local{target->begin - start, target->length};
  std::string out = CollapseWhitespace(text.substr(start, end - start), &local);
  *target = local;
  return out;
}

TransformOutcome PartSent(const WinogradInstance& instance) {
  TransformOutcome outcome;
  outcome.source_id = instance.id;
  outcome.mode = Mode::kPartSent;
  TransformedInstance out;
  out.source_id = instance.id;
  out.mode = Mode::kPartSent;
  out.target = instance.target;
  out.text = PartSentText(instance.sentence, &out.target);
  out.label = instance.label;
  out.candidates = instance.candidates;
  outcome.result = std::move(out);
  return outcome;
}

TransformOutcome ApplyAblation(const WinogradInstance& instance, Mode mode) {
  switch (mode) {
    case Mode::kNoCands:
      return NoCands(instance);
    case Mode::kPartSent:
      return PartSent(instance);
    default:
      throw ValidationError("ApplyAblation: not an ablation mode");
  }
}

// ---- Zero-shot -------------------------------------------------------------

std::optional<std::string> ReplacementSurface(const WinogradInstance& instance) {
  const std::string& gold = instance.Gold();
  std::vector<Span> blocked = {instance.target};
  // Keep the other candidate's exact mentions out of reach of head
  // expansion.
  for (const Span& s :
       FindAllWords(instance.sentence, Trim(instance.candidates[1 - instance.label]))) {
    if (!s.Overlaps(instance.target)) blocked.push_back(s);
  }
  std::vector<Mention> found = LocateCandidate(instance.sentence, gold, blocked);
  std::string surface;
  bool mention_initial = false;
  if (!found.empty()) {
    surface = std::string(found.front().span.In(instance.sentence));
    mention_initial = IsSentenceInitial(instance.sentence, found.front().span.begin);
  } else {
    surface = std::string(Trim(gold));
    mention_initial = true;  // bare candidate text carries arbitrary casing
  }
  if (surface.empty()) return std::nullopt;
  if (mention_initial && IsDeterminer(FirstWord(surface))) {
    surface = LowercaseFirst(surface);
  }
  if (IsSentenceInitial(instance.sentence, instance.target.begin)) {
    surface = CapitalizeFirst(surface);
  }
  return surface;
}

ZeroShotOutcome ToZeroShot(const TwinGroup& group) {
  ZeroShotOutcome outcome;
  outcome.group_id = group.group_id;
  if (group.members.size() != 2 || group.special_spans.size() != 2) {
    outcome.rejection_reason = reason::kDegenerateTwins;
    outcome.detail = "group does not have exactly 2 members";
    return outcome;
  }

  std::array<Span, 2> mask_spans;
  std::array<std::string, 2> words;
  for (std::size_t k = 0; k < 2; ++k) {
    Span s = group.special_spans[k];
    std::string_view text = s.In(group.members[k].sentence);
    if (!text.empty() && IsTerminalPunct(text.back())) {
      text.remove_suffix(1);
      s.length -= 1;
    }
    if (Trim(text).empty()) {
      outcome.rejection_reason = reason::kDegenerateTwins;
      outcome.detail = "special span is punctuation only";
      return outcome;
    }
    for (char c : text) {
      if (IsSpace(c)) {
        outcome.rejection_reason = reason::kMultiWordSpecial;
        outcome.detail = std::string(text);
        return outcome;
      }
    }
    mask_spans[k] = s;
    words[k] = std::string(text);
  }
  if (IEquals(words[0], words[1])) {
    outcome.rejection_reason = reason::kDegenerateTwins;
    outcome.detail = words[0];
    return outcome;
  }

  std::vector<ZeroShotQuery> queries;
  for (std::size_t k = 0; k < 2; ++k) {
    const WinogradInstance& member = group.members[k];
    const Span& target = member.target;
    std::optional<std::string> surface = ReplacementSurface(member);
    if (!surface || target.empty() || target.Overlaps(mask_spans[k]) ||
        member.sentence.find(kMaskSentinel) != std::string::npos) {
      outcome.rejection_reason = reason::kTargetNotReplaceable;
      outcome.detail = member.id;
      return outcome;
    }
    // Splice right-to-left so earlier offsets stay valid.
    std::string text = member.sentence;
    std::array<std::pair<Span, std::string>, 2> edits = {
        std::pair{target, *surface},
        std::pair{mask_spans[k], std::string(kMaskSentinel)}};
    if (edits[0].first.begin < edits[1].first.begin) std::swap(edits[0], edits[1]);
    for (const auto& [span, replacement] : edits) {
      text.replace(span.begin, span.length, replacement);
    }
    ZeroShotQuery q;
    q.source_group = group.group_id;
    q.source_id = member.id;
    q.member_index = k;
    q.text = std::move(text);
    q.candidates = words;
    q.gold = static_cast<int>(k);
    queries.push_back(std::move(q));
  }
  outcome.queries = std::move(queries);
  return outcome;
}

// ---- Records ---------------------------------------------------------------

std::string ToRecord(const TransformOutcome& outcome) {
  json rec;
  rec["source_id"] = outcome.source_id;
  rec["mode"] = ToString(outcome.mode);
  if (outcome.ok()) {
    const TransformedInstance& t = *outcome.result;
    rec["text"] = t.text;
    rec["label"] = t.label;
    rec["candidates"] = CandidatesJson(t.candidates);
    rec["target_span_start"] = t.target.begin;
    rec["target_span_len"] = t.target.length;
    if (!t.notes.empty()) rec["notes"] = t.notes;
  } else {
    rec["rejection_reason"] = outcome.skip_reason;
    if (!outcome.detail.empty()) rec["detail"] = outcome.detail;
  }
  return rec.dump();
}

std::string ToRecord(const ZeroShotQuery& q) {
  json rec;
  rec["source_id"] = q.source_id;
  rec["source_group"] = q.source_group;
  rec["member_index"] = q.member_index;
  rec["mode"] = ToString(Mode::kZeroShot);
  rec["text"] = q.text;
  rec["label"] = q.gold;
  rec["candidates"] = CandidatesJson(q.candidates);
  rec["gold"] = q.gold;
  return rec.dump();
}

std::string RejectionRecord(const ZeroShotOutcome& outcome) {
  json rec;
  rec["source_id"] = outcome.group_id;
  rec["mode"] = ToString(Mode::kZeroShot);
  rec["rejection_reason"] = outcome.rejection_reason;
  if (!outcome.detail.empty()) rec["detail"] = outcome.detail;
  return rec.dump();
}

TransformOutcome TransformOutcomeFromRecord(std::string_view line) {
  TransformOutcome outcome;
  try {
    json rec = json::parse(line);
    outcome.source_id = rec.at("source_id").get<std::string>();
    outcome.mode = ParseMode(rec.at("mode").get<std::string>());
    if (rec.contains("rejection_reason")) {
      outcome.skip_reason = rec["rejection_reason"].get<std::string>();
      outcome.detail = rec.value("detail", "");
      return outcome;
    }
    TransformedInstance t;
    t.source_id = outcome.source_id;
    t.mode = outcome.mode;
    t.text = rec.at("text").get<std::string>();
    t.label = rec.at("label").get<int>();
    t.candidates = {rec.at("candidates")[0].get<std::string>(),
                    rec.at("candidates")[1].get<std::string>()};
    t.target = {rec.at("target_span_start").get<std::size_t>(),
                rec.at("target_span_len").get<std::size_t>()};
    if (rec.contains("notes")) {
      t.notes = rec["notes"].get<std::vector<std::string>>();
    }
    outcome.result = std::move(t);
  } catch (const json::exception& e) {
    throw ParseError(std::string("transform record: ") + e.what());
  }
  return outcome;
}

ZeroShotQuery ZeroShotQueryFromRecord(std::string_view line) {
  ZeroShotQuery q;
  try {
    json rec = json::parse(line);
    q.source_id = rec.at("source_id").get<std::string>();
    q.source_group = rec.at("source_group").get<std::string>();
    q.member_index = rec.at("member_index").get<std::size_t>();
    q.text = rec.at("text").get<std::string>();
    q.candidates = {rec.at("candidates")[0].get<std::string>(),
                    rec.at("candidates")[1].get<std::string>()};
    q.gold = rec.at("gold").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("zero-shot record: ") + e.what());
  }
  return q;
}

ModeCounts CountOutcomes(const std::vector<TransformOutcome>& outcomes) {
  ModeCounts counts;
  for (const auto& o : outcomes) {
    ++counts.inputs;
    if (o.ok()) {
      ++counts.produced;
    } else {
      ++counts.skipped;
      ++counts.reasons[o.skip_reason];
    }
  }
  return counts;
}

// Counts are per instance: a group contributes its members either as
// produced queries or as skips.
ModeCounts CountOutcomes(const std::vector<ZeroShotOutcome>& outcomes) {
  ModeCounts counts;
  for (const auto& o : outcomes) {
    counts.inputs += 2;
    if (o.ok()) {
      counts.produced += o.queries.size();
    } else {
      counts.skipped += 2;
      counts.reasons[o.rejection_reason] += 2;
    }
  }
  return counts;
}

TransformedTrainingSet BuildTransformedTrainingSet(const Dataset& dataset) {
  TransformedTrainingSet set;
  for (const TwinGroup& g : dataset.groups) {
    ZeroShotOutcome o = ToZeroShot(g);
    if (o.ok()) {
      for (auto& q : o.queries) set.queries.push_back(std::move(q));
    } else {
      for (const auto& m : g.members) set.untransformable_ids.push_back(m.id);
      set.rejections.push_back(std::move(o));
    }
  }
  return set;
}

void WriteTransformedTrainingSet(const TransformedTrainingSet& set,
                                 std::ostream& out, std::string_view meta_json) {
  if (!meta_json.empty()) {
    out << json{{"_meta", json::parse(meta_json)}}.dump() << '\n';
  }
  for (const auto& q : set.queries) out << ToRecord(q) << '\n';
  for (const auto& r : set.rejections) out << RejectionRecord(r) << '\n';
}

}  // namespace winocheck
