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

// Data model for Winograd-style corpora: parsing of the WSC collection XML
// and Winogrande JSONL files, twin-group reconstruction, and the
// normalized record-per-line interchange format.

#ifndef WINOCHECK_CORPUS_H_
#define WINOCHECK_CORPUS_H_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "winocheck/text.h"

namespace winocheck {

enum class TargetKind { kPronoun, kPlaceholder };
enum class Source { kWsc, kWinogrande };

std::string_view ToString(TargetKind kind);
std::string_view ToString(Source source);
TargetKind ParseTargetKind(std::string_view s);
Source ParseSource(std::string_view s);

struct WinogradInstance {
  std::string id;
  std::string sentence;
  std::array<std::string, 2> candidates;
  // Pronoun or `_` placeholder inside `sentence`.
  Span target;
  TargetKind target_kind = TargetKind::kPronoun;
  int label = 0;
  Source source = Source::kWsc;
  std::optional<std::string> group_hint;
  // Position in the originating file. Used for deterministic tie-breaks
  // that must not depend on in-memory ordering.
  std::size_t ordinal = 0;

  std::string_view TargetText() const { return target.In(sentence); }
  const std::string& Gold() const { return candidates[label]; }
};

// Throws ValidationError describing the first violated invariant.
void Validate(const WinogradInstance& instance);

struct TwinGroup {
  std::string group_id;
  std::vector<WinogradInstance> members;
  // special_spans[i] is the differing region of members[i].sentence.
  std::vector<Span> special_spans;

  std::string_view SpecialText(std::size_t i) const {
    return special_spans[i].In(members[i].sentence);
  }
};

struct Dataset {
  std::string name;
  std::vector<WinogradInstance> instances;
  std::vector<TwinGroup> groups;
  std::vector<std::string> orphans;

  const WinogradInstance* Find(std::string_view id) const;
  std::size_t PairedInstanceCount() const;
};

// ---- Parsers ---------------------------------------------------------------

// Parses the community WSC collection XML (<collection><schema>...).
// Instance ids are 0-based record indices as decimal strings.
Dataset ParseWsc(std::string_view xml, std::string name = "wsc");
Dataset ParseWscFile(const std::string& path, std::string name = "wsc");

// Parses Winogrande JSONL (sentence, option1, option2, answer[, qID]).
Dataset ParseWinogrande(std::string_view jsonl,
                        std::string name = "winogrande");
Dataset ParseWinograndeFile(const std::string& path,
                            std::string name = "winogrande");

// ---- Normalized interchange format -----------------------------------------

std::string ToNormalizedRecord(const WinogradInstance& instance);
WinogradInstance FromNormalizedRecord(std::string_view line,
                                      std::size_t ordinal);
void WriteNormalized(const Dataset& dataset, std::ostream& out);
// Lines whose object carries a "_meta" key are skipped.
Dataset ReadNormalized(std::istream& in, std::string name);

// ---- Twin reconstruction ---------------------------------------------------

struct SpecialSpans {
  Span a;
  Span b;
  std::size_t a_tokens = 0;
  std::size_t b_tokens = 0;
};

// Minimal differing token region of two sentences, or nullopt when the
// sentences are identical, differ in more than one region, or one side's
// region is empty.
std::optional<SpecialSpans> DetectSpecialSpans(std::string_view a,
                                               std::string_view b);
std::optional<SpecialSpans> DetectSpecialSpans(const WinogradInstance& a,
                                               const WinogradInstance& b);

// Case-insensitive unordered candidate pair key.
std::string CandidateKey(const WinogradInstance& instance);

// A possible twin link between instances[i] and instances[j] (i < j).
struct TwinEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  SpecialSpans spans;
};

// Groups instances by candidate pair, links twins, and reduces larger
// components to their best pair. Existing groups/orphans are replaced.
Dataset PairTwins(Dataset dataset);

// Selects a matching from candidate edges: cheapest diff first, then
// file-adjacent pairs, then file order. Returned edges are disjoint.
std::vector<TwinEdge> SelectPairs(const std::vector<WinogradInstance>& instances,
                                  std::vector<TwinEdge> edges);

TwinGroup MakeGroup(const WinogradInstance& a, const WinogradInstance& b,
                    const SpecialSpans& spans);

// ---- Filtering -------------------------------------------------------------

struct FilterResult {
  Dataset dataset;
  std::size_t removed = 0;
  std::vector<std::string> warnings;
};

// Drops listed instance ids and re-pairs; twins of removed instances
// become orphans. Unknown ids produce warnings.
FilterResult FilterAssociative(const Dataset& dataset,
                               const std::vector<std::string>& exclusion_ids);

// One id per line; blank lines and `#` comments ignored.
std::vector<std::string> ReadIdList(std::istream& in);
std::vector<std::string> ReadIdListFile(const std::string& path);

// ---- Pairing manifest ------------------------------------------------------

// JSON document listing groups (ids, special-word surfaces, spans) and
// orphans. `meta` is embedded verbatim under "_meta" when non-empty.
std::string PairingManifestJson(const Dataset& dataset,
                                std::string_view meta_json = {});
// Rebuilds groups/orphans of `dataset` from a manifest.
Dataset ApplyPairingManifest(Dataset dataset, std::string_view manifest_json);

}  // namespace winocheck

#endif  // WINOCHECK_CORPUS_H_
