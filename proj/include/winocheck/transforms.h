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

// Artifact-probing ablations (candidate removal, partial sentence) and the
// zero-shot masked-special-word reformulation of twin groups.

#ifndef WINOCHECK_TRANSFORMS_H_
#define WINOCHECK_TRANSFORMS_H_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "winocheck/corpus.h"

namespace winocheck {

inline constexpr std::string_view kMaskSentinel = "[MASK]";

enum class Mode { kOriginal, kNoCands, kPartSent, kZeroShot };

// "original", "no-cands", "part-sent", "zero-shot".
std::string_view ToString(Mode mode);
Mode ParseMode(std::string_view s);

// Skip / rejection reasons.
namespace reason {
inline constexpr std::string_view kCandidateNotLocatable =
    "candidate not locatable";
inline constexpr std::string_view kMultiWordSpecial = "multi-word special";
inline constexpr std::string_view kDegenerateTwins = "degenerate twins";
inline constexpr std::string_view kTargetNotReplaceable =
    "target not replaceable";
inline constexpr std::string_view kMultiToken = "multi-token candidate";
}  // namespace reason

struct TransformedInstance {
  std::string source_id;
  Mode mode = Mode::kNoCands;
  std::string text;
  Span target;
  int label = 0;
  std::array<std::string, 2> candidates;
  std::vector<std::string> notes;

  std::string_view TargetText() const { return target.In(text); }
};

// Either a transformed instance or a skip reason.
struct TransformOutcome {
  std::string source_id;
  Mode mode = Mode::kNoCands;
  std::optional<TransformedInstance> result;
  std::string skip_reason;
  std::string detail;

  bool ok() const { return result.has_value(); }
};

struct ZeroShotQuery {
  std::string source_group;
  std::string source_id;
  std::size_t member_index = 0;
  std::string text;
  std::array<std::string, 2> candidates;
  int gold = 0;
};

struct ZeroShotOutcome {
  std::string group_id;
  std::vector<ZeroShotQuery> queries;  // empty when rejected
  std::string rejection_reason;
  std::string detail;

  bool ok() const { return !queries.empty(); }
};

// ---- Candidate localization ------------------------------------------------

struct Mention {
  Span span;
  bool exact = true;
};

// Finds every mention of `candidate` in `sentence`, avoiding `blocked`
// spans. Exact case-insensitive matches win; otherwise the head (last)
// word is matched and widened left to a determiner.
std::vector<Mention> LocateCandidate(std::string_view sentence,
                                     std::string_view candidate,
                                     const std::vector<Span>& blocked);

// ---- Transforms ------------------------------------------------------------

TransformOutcome NoCands(const WinogradInstance& instance);
TransformOutcome PartSent(const WinogradInstance& instance);
TransformOutcome ApplyAblation(const WinogradInstance& instance, Mode mode);

// PartSent on bare text with a known target span. Exposed for the
// idempotence property.
std::string PartSentText(std::string_view text, Span* target);

ZeroShotOutcome ToZeroShot(const TwinGroup& group);

// Surface used to replace the pronoun in a zero-shot query.
std::optional<std::string> ReplacementSurface(const WinogradInstance& instance);

// ---- Records ---------------------------------------------------------------

std::string ToRecord(const TransformOutcome& outcome);
std::string ToRecord(const ZeroShotQuery& query);
std::string RejectionRecord(const ZeroShotOutcome& outcome);

TransformOutcome TransformOutcomeFromRecord(std::string_view line);
ZeroShotQuery ZeroShotQueryFromRecord(std::string_view line);

struct ModeCounts {
  std::size_t inputs = 0;
  std::size_t produced = 0;
  std::size_t skipped = 0;
  std::map<std::string, std::size_t> reasons;
};

ModeCounts CountOutcomes(const std::vector<TransformOutcome>& outcomes);
ModeCounts CountOutcomes(const std::vector<ZeroShotOutcome>& outcomes);

struct TransformedTrainingSet {
  std::vector<ZeroShotQuery> queries;
  std::vector<ZeroShotOutcome> rejections;
  // Ids of instances whose groups could not be transformed; original-format
  // training restricted to the complement matches the transformed subset.
  std::vector<std::string> untransformable_ids;
};

TransformedTrainingSet BuildTransformedTrainingSet(const Dataset& dataset);
// Writes queries (one per line) followed by rejection records.
void WriteTransformedTrainingSet(const TransformedTrainingSet& set,
                                 std::ostream& out,
                                 std::string_view meta_json = {});

}  // namespace winocheck

#endif  // WINOCHECK_TRANSFORMS_H_
