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

#include "winocheck/scorer_protocol.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "httplib.h"
#include "json.hpp"
#include "winocheck/errors.h"
#include "winocheck/transforms.h"

namespace winocheck {
namespace {

using json = nlohmann::json;

std::size_t CountOccurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

template <typename T>
void CheckUniqueIds(const std::vector<T>& items) {
  std::unordered_set<std::string> seen;
  for (const auto& item : items) {
    if (!seen.insert(item.id).second) {
      throw ValidationError("duplicate request id '" + item.id + "' in batch");
    }
  }
}

template <typename Parse>
auto ReadLines(std::istream& in, Parse parse) {
  std::vector<decltype(parse(std::string_view{}))> out;
  std::string line;
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    if (line.find("\"_meta\"") != std::string::npos && json::parse(line).contains("_meta")) {
      continue;
    }
    out.push_back(parse(line));
  }
  return out;
}

template <typename Resp, typename Req>
std::vector<Resp> MatchResponses(std::vector<Resp> responses, const std::vector<Req>& requests) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < requests.size(); ++k) index.emplace(requests[k].id, k);
  std::vector<std::optional<Resp>> slots(requests.size());
  std::vector<std::string> unknown;
  std::vector<std::string> duplicate;
  std::string model_id;
  for (auto& r : responses) {
    auto it = index.find(r.id);
    if (it == index.end()) {
      unknown.push_back(r.id);
      continue;
    }
    if (slots[it->second]) {
      duplicate.push_back(r.id);
      continue;
    }
    if (model_id.empty()) model_id = r.model_id;
    if (r.model_id != model_id) {
      throw ScorerError("mixed model_id in one batch: '" + model_id + "' and '" + r.model_id +
                        "'");
    }
    slots[it->second] = std::move(r);
  }
  std::vector<std::string> missing;
  for (std::size_t k = 0; k < requests.size(); ++k) {
    if (!slots[k]) missing.push_back(requests[k].id);
  }
  auto list = [](const std::vector<std::string>& ids) {
    std::string s;
    for (std::size_t k = 0; k < ids.size() && k < 10; ++k) s += (k ? ", " : "") + ids[k];
    if (ids.size() > 10) s += ", ...";
    return s;
  };
  if (!missing.empty()) throw ScorerError("no response for request id(s): " + list(missing));
  if (!unknown.empty()) throw ScorerError("response for unknown id(s): " + list(unknown));
  if (!duplicate.empty()) throw ScorerError("duplicate response id(s): " + list(duplicate));
  std::vector<Resp> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// ---- HTTP plumbing ---------------------------------------------------------

struct HttpReply {
  int status = 0;
  std::string body;
};

HttpReply PostWithRetry(httplib::Client& client, const std::string& path,
                        const std::string& body, const HttpOptions& options) {
  std::string last_error;
  auto backoff = options.initial_backoff;
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    auto res = client.Post(path, body, "application/x-ndjson");
    if (res) {
      if (res->status == 200 || res->status == 422) return {res->status, res->body};
      if (res->status < 500) {
        throw ScorerError("POST " + path + " returned HTTP " + std::to_string(res->status) +
                          ": " + res->body);
      }
      last_error = "HTTP " + std::to_string(res->status);
    } else {
      last_error = httplib::to_string(res.error());
    }
    if (attempt < options.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw ScorerError("POST " + path + " failed after " + std::to_string(options.max_attempts) +
                    " attempts: " + last_error);
}

httplib::Client MakeClient(const HttpOptions& options) {
  httplib::Client client(options.endpoint);
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  client.set_write_timeout(options.timeout);
  return client;
}

// Runs `call` over every request with at most max_in_flight workers; the
// result slot is fixed by request index, so completion order is irrelevant.
template <typename Resp, typename Req, typename Call>
std::vector<Resp> RunConcurrent(const std::vector<Req>& requests, const HttpOptions& options,
                                Call call) {
  std::vector<std::optional<Resp>> slots(requests.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    httplib::Client client = MakeClient(options);
    while (!failed.load()) {
      std::size_t k = next.fetch_add(1);
      if (k >= requests.size()) return;
      try {
        slots[k] = call(client, requests[k]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::size_t n_workers = std::max<std::size_t>(1, std::min(options.max_in_flight, requests.size()));
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
  std::vector<Resp> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace

// ---- Validation ------------------------------------------------------------

void Validate(const MaskScoreRequest& r) {
  if (r.id.empty()) throw ValidationError("mask request without id");
  if (CountOccurrences(r.text, kMaskSentinel) != 1) {
    throw ValidationError("mask request " + r.id + ": text must contain exactly one [MASK]");
  }
  if (r.candidates[0].empty() || r.candidates[1].empty() ||
      r.candidates[0] == r.candidates[1]) {
    throw ValidationError("mask request " + r.id + ": need 2 distinct candidates");
  }
}

void Validate(const ChoiceScoreRequest& r) {
  if (r.id.empty()) throw ValidationError("choice request without id");
  if (r.target.end() > r.context.size()) {
    throw ValidationError("choice request " + r.id + ": target span out of bounds");
  }
  if (r.options[0].empty() || r.options[1].empty()) {
    throw ValidationError("choice request " + r.id + ": empty option");
  }
}

void Validate(const MaskScoreResponse& r) {
  for (const auto& c : r.candidates) {
    if (c.token_count < 1) {
      throw ScorerError("mask response " + r.id + ": token_count must be >= 1");
    }
    if (c.log_score.has_value() != (c.token_count == 1)) {
      throw ScorerError("mask response " + r.id +
                        ": log_score must be present iff token_count == 1");
    }
  }
}

void Validate(const ChoiceScoreResponse& r) {
  if (r.id.empty()) throw ScorerError("choice response without id");
}

// ---- Records ---------------------------------------------------------------

std::string ToRecord(const MaskScoreRequest& r) {
  return json{{"id", r.id}, {"text", r.text}, {"candidates", {r.candidates[0], r.candidates[1]}}}
      .dump();
}

std::string ToRecord(const MaskScoreResponse& r) {
  json cands = json::array();
  for (const auto& c : r.candidates) {
    json jc{{"token_count", c.token_count}};
    if (c.log_score) jc["log_score"] = *c.log_score;
    cands.push_back(std::move(jc));
  }
  return json{{"id", r.id}, {"model_id", r.model_id}, {"candidates", cands}}.dump();
}

std::string ToRecord(const ChoiceScoreRequest& r) {
  return json{{"id", r.id},
              {"context", r.context},
              {"target_span_start", r.target.begin},
              {"target_span_len", r.target.length},
              {"options", {r.options[0], r.options[1]}}}
      .dump();
}

std::string ToRecord(const ChoiceScoreResponse& r) {
  return json{{"id", r.id}, {"model_id", r.model_id}, {"scores", {r.scores[0], r.scores[1]}}}
      .dump();
}

MaskScoreRequest MaskRequestFromRecord(std::string_view line) {
  try {
    json j = json::parse(line);
    MaskScoreRequest r;
    r.id = j.at("id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    const auto& c = j.at("candidates");
    if (c.size() != 2) throw ValidationError("mask request " + r.id + ": need 2 candidates");
    r.candidates = {c[0].get<std::string>(), c[1].get<std::string>()};
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("mask request record: ") + e.what());
  }
}

MaskScoreResponse MaskResponseFromRecord(std::string_view line) {
  MaskScoreResponse r;
  try {
    json j = json::parse(line);
    r.id = j.at("id").get<std::string>();
    r.model_id = j.value("model_id", "");
    const auto& c = j.at("candidates");
    if (c.size() != 2) throw ScorerError("mask response " + r.id + ": need 2 candidates");
    for (std::size_t k = 0; k < 2; ++k) {
      r.candidates[k].token_count = c[k].value("token_count", 1);
      if (c[k].contains("log_score") && !c[k]["log_score"].is_null()) {
        r.candidates[k].log_score = c[k]["log_score"].get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw ScorerError(std::string("mask response record: ") + e.what());
  }
  Validate(r);
  return r;
}

ChoiceScoreRequest ChoiceRequestFromRecord(std::string_view line) {
  try {
    json j = json::parse(line);
    ChoiceScoreRequest r;
    r.id = j.at("id").get<std::string>();
    r.context = j.at("context").get<std::string>();
    r.target = {j.at("target_span_start").get<std::size_t>(),
                j.at("target_span_len").get<std::size_t>()};
    const auto& o = j.at("options");
    if (o.size() != 2) throw ValidationError("choice request " + r.id + ": need 2 options");
    r.options = {o[0].get<std::string>(), o[1].get<std::string>()};
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("choice request record: ") + e.what());
  }
}

ChoiceScoreResponse ChoiceResponseFromRecord(std::string_view line) {
  ChoiceScoreResponse r;
  try {
    json j = json::parse(line);
    r.id = j.at("id").get<std::string>();
    r.model_id = j.value("model_id", "");
    const auto& s = j.at("scores");
    if (s.size() != 2) throw ScorerError("choice response " + r.id + ": need 2 scores");
    r.scores = {s[0].get<double>(), s[1].get<double>()};
  } catch (const json::exception& e) {
    throw ScorerError(std::string("choice response record: ") + e.what());
  }
  Validate(r);
  return r;
}

// ---- Batches ---------------------------------------------------------------

void WriteRequestBatch(const std::vector<MaskScoreRequest>& requests, std::ostream& out) {
  CheckUniqueIds(requests);
  for (const auto& r : requests) Validate(r);
  for (const auto& r : requests) out << ToRecord(r) << '\n';
}

void WriteRequestBatch(const std::vector<ChoiceScoreRequest>& requests, std::ostream& out) {
  CheckUniqueIds(requests);
  for (const auto& r : requests) Validate(r);
  for (const auto& r : requests) out << ToRecord(r) << '\n';
}

std::vector<MaskScoreRequest> ReadMaskRequestBatch(std::istream& in) {
  auto out = ReadLines(in, MaskRequestFromRecord);
  CheckUniqueIds(out);
  return out;
}

std::vector<ChoiceScoreRequest> ReadChoiceRequestBatch(std::istream& in) {
  auto out = ReadLines(in, ChoiceRequestFromRecord);
  CheckUniqueIds(out);
  return out;
}

std::vector<MaskScoreResponse> ReadResponseBatch(std::istream& in,
                                                 const std::vector<MaskScoreRequest>& requests) {
  return MatchResponses(ReadLines(in, MaskResponseFromRecord), requests);
}

std::vector<ChoiceScoreResponse> ReadResponseBatch(
    std::istream& in, const std::vector<ChoiceScoreRequest>& requests) {
  return MatchResponses(ReadLines(in, ChoiceResponseFromRecord), requests);
}

void WriteResponseBatch(const std::vector<MaskScoreResponse>& responses, std::ostream& out) {
  for (const auto& r : responses) out << ToRecord(r) << '\n';
}

void WriteResponseBatch(const std::vector<ChoiceScoreResponse>& responses, std::ostream& out) {
  for (const auto& r : responses) out << ToRecord(r) << '\n';
}

// ---- HttpScorer ------------------------------------------------------------

HttpScorer::HttpScorer(HttpOptions options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) throw ValidationError("scorer endpoint is empty");
  if (options_.max_in_flight < 1) throw ValidationError("max_in_flight must be >= 1");
  if (options_.max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
}

std::string HttpScorer::Health() const {
  httplib::Client client = MakeClient(options_);
  auto res = client.Get("/v1/health");
  if (!res) throw ScorerError("GET /v1/health: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw ScorerError("GET /v1/health returned HTTP " + std::to_string(res->status));
  }
  try {
    return json::parse(res->body).at("model_id").get<std::string>();
  } catch (const json::exception& e) {
    throw ScorerError(std::string("GET /v1/health: ") + e.what());
  }
}

std::vector<MaskScoreResponse> HttpScorer::ScoreMask(
    const std::vector<MaskScoreRequest>& requests) const {
  CheckUniqueIds(requests);
  for (const auto& r : requests) Validate(r);
  auto responses = RunConcurrent<MaskScoreResponse>(
      requests, options_, [this](httplib::Client& client, const MaskScoreRequest& req) {
        HttpReply reply = PostWithRetry(client, "/v1/score_mask", ToRecord(req), options_);
        if (reply.status == 422) {
          // Flagged candidates: keep the body's token counts when present,
          // otherwise treat both as unscorable.
          try {
            MaskScoreResponse r = MaskResponseFromRecord(reply.body);
            r.id = req.id;
            return r;
          } catch (const ScorerError&) {
            MaskScoreResponse r;
            r.id = req.id;
            r.candidates[0].token_count = 2;
            r.candidates[1].token_count = 2;
            return r;
          }
        }
        return MaskResponseFromRecord(reply.body);
      });
  for (std::size_t k = 0; k < responses.size(); ++k) {
    if (responses[k].id != requests[k].id) {
      throw ScorerError("response id '" + responses[k].id + "' does not match request '" +
                        requests[k].id + "'");
    }
  }
  // 422 bodies may omit model_id; inherit the batch's.
  std::string model_id;
  for (const auto& r : responses) {
    if (!r.model_id.empty()) model_id = r.model_id;
  }
  for (auto& r : responses) {
    if (r.model_id.empty()) r.model_id = model_id;
  }
  return MatchResponses(std::move(responses), requests);
}

std::vector<ChoiceScoreResponse> HttpScorer::ScoreChoice(
    const std::vector<ChoiceScoreRequest>& requests) const {
  CheckUniqueIds(requests);
  for (const auto& r : requests) Validate(r);
  auto responses = RunConcurrent<ChoiceScoreResponse>(
      requests, options_, [this](httplib::Client& client, const ChoiceScoreRequest& req) {
        HttpReply reply = PostWithRetry(client, "/v1/score_choice", ToRecord(req), options_);
        if (reply.status != 200) {
          throw ScorerError("POST /v1/score_choice returned HTTP " +
                            std::to_string(reply.status) + " for " + req.id);
        }
        return ChoiceResponseFromRecord(reply.body);
      });
  return MatchResponses(std::move(responses), requests);
}

void HttpScorer::VerifyDeterminism(const std::vector<MaskScoreRequest>& requests,
                                   const std::vector<MaskScoreResponse>& first,
                                   std::size_t stride) const {
  std::vector<MaskScoreRequest> sample;
  std::vector<const MaskScoreResponse*> expected;
  for (std::size_t k = 0; k < requests.size(); k += std::max<std::size_t>(1, stride)) {
    sample.push_back(requests[k]);
    expected.push_back(&first[k]);
  }
  auto again = ScoreMask(sample);
  for (std::size_t k = 0; k < sample.size(); ++k) {
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& a = expected[k]->candidates[c];
      const auto& b = again[k].candidates[c];
      if (a.token_count != b.token_count || a.log_score != b.log_score) {
        throw ScorerError("scorer is not deterministic for request " + sample[k].id);
      }
    }
  }
}

void HttpScorer::VerifyDeterminism(const std::vector<ChoiceScoreRequest>& requests,
                                   const std::vector<ChoiceScoreResponse>& first,
                                   std::size_t stride) const {
  std::vector<ChoiceScoreRequest> sample;
  std::vector<const ChoiceScoreResponse*> expected;
  for (std::size_t k = 0; k < requests.size(); k += std::max<std::size_t>(1, stride)) {
    sample.push_back(requests[k]);
    expected.push_back(&first[k]);
  }
  auto again = ScoreChoice(sample);
  for (std::size_t k = 0; k < sample.size(); ++k) {
    if (expected[k]->scores != again[k].scores) {
      throw ScorerError("scorer is not deterministic for request " + sample[k].id);
    }
  }
}

}  // namespace winocheck
