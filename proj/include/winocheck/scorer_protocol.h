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

// Model-facing contract. Offline batches and the HTTP service share one
// record schema (one JSON object per line, UTF-8, '\n' endings):
//
//   mask request     {"id", "text" (one [MASK]), "candidates": [a, b]}
//   mask response    {"id", "model_id",
//                     "candidates": [{"token_count", "log_score"?}, ...]}
//   choice request   {"id", "context", "target_span_start",
//                     "target_span_len", "options": [a, b]}
//   choice response  {"id", "model_id", "scores": [x, y]}
//
// A candidate that the model tokenizes into several pieces carries
// token_count > 1 and no log_score; it is never approximated.
//
// HTTP: POST /v1/score_mask, POST /v1/score_choice (one record per call),
// GET /v1/health -> {"model_id"}. A 422 on score_mask carries a mask
// response body whose multi-token candidates are flagged.

#ifndef WINOCHECK_SCORER_PROTOCOL_H_
#define WINOCHECK_SCORER_PROTOCOL_H_

#include <array>
#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "winocheck/text.h"

namespace winocheck {

struct MaskScoreRequest {
  std::string id;
  std::string text;
  std::array<std::string, 2> candidates;
};

struct CandidateResult {
  std::optional<double> log_score;
  int token_count = 1;

  bool scorable() const { return token_count == 1 && log_score.has_value(); }
};

struct MaskScoreResponse {
  std::string id;
  std::array<CandidateResult, 2> candidates;
  std::string model_id;
};

struct ChoiceScoreRequest {
  std::string id;
  std::string context;
  Span target;
  std::array<std::string, 2> options;
};

struct ChoiceScoreResponse {
  std::string id;
  std::array<double, 2> scores{};
  std::string model_id;
};

// Invariant checks; throw ValidationError (requests) or ScorerError
// (responses).
void Validate(const MaskScoreRequest& request);
void Validate(const ChoiceScoreRequest& request);
void Validate(const MaskScoreResponse& response);
void Validate(const ChoiceScoreResponse& response);

std::string ToRecord(const MaskScoreRequest& request);
std::string ToRecord(const MaskScoreResponse& response);
std::string ToRecord(const ChoiceScoreRequest& request);
std::string ToRecord(const ChoiceScoreResponse& response);

MaskScoreRequest MaskRequestFromRecord(std::string_view line);
MaskScoreResponse MaskResponseFromRecord(std::string_view line);
ChoiceScoreRequest ChoiceRequestFromRecord(std::string_view line);
ChoiceScoreResponse ChoiceResponseFromRecord(std::string_view line);

// ---- Batch files -----------------------------------------------------------

// Throws ValidationError on duplicate ids before anything is written.
void WriteRequestBatch(const std::vector<MaskScoreRequest>& requests, std::ostream& out);
void WriteRequestBatch(const std::vector<ChoiceScoreRequest>& requests, std::ostream& out);

std::vector<MaskScoreRequest> ReadMaskRequestBatch(std::istream& in);
std::vector<ChoiceScoreRequest> ReadChoiceRequestBatch(std::istream& in);

// Reads responses and matches them to `requests`: the result is in request
// order. Missing, duplicate, or unknown ids throw ScorerError naming them.
std::vector<MaskScoreResponse> ReadResponseBatch(std::istream& in,
                                                 const std::vector<MaskScoreRequest>& requests);
std::vector<ChoiceScoreResponse> ReadResponseBatch(std::istream& in,
                                                   const std::vector<ChoiceScoreRequest>& requests);

void WriteResponseBatch(const std::vector<MaskScoreResponse>& responses, std::ostream& out);
void WriteResponseBatch(const std::vector<ChoiceScoreResponse>& responses, std::ostream& out);

// ---- HTTP client -----------------------------------------------------------

struct HttpOptions {
  std::string endpoint;  // e.g. "http://127.0.0.1:8080"
  std::size_t max_in_flight = 4;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::seconds timeout{60};
};

class HttpScorer {
 public:
  explicit HttpScorer(HttpOptions options);

  // GET /v1/health; returns model_id.
  std::string Health() const;

  // Results are in request order regardless of completion order.
  std::vector<MaskScoreResponse> ScoreMask(const std::vector<MaskScoreRequest>& requests) const;
  std::vector<ChoiceScoreResponse> ScoreChoice(
      const std::vector<ChoiceScoreRequest>& requests) const;

  // Re-queries every `stride`-th request and throws ScorerError if any
  // score differs from the first answer.
  void VerifyDeterminism(const std::vector<MaskScoreRequest>& requests,
                         const std::vector<MaskScoreResponse>& first,
                         std::size_t stride = 10) const;
  void VerifyDeterminism(const std::vector<ChoiceScoreRequest>& requests,
                         const std::vector<ChoiceScoreResponse>& first,
                         std::size_t stride = 10) const;

  const HttpOptions& options() const { return options_; }

 private:
  HttpOptions options_;
};

}  // namespace winocheck

#endif  // WINOCHECK_SCORER_PROTOCOL_H_
