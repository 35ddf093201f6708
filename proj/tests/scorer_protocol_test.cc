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
#include <chrono>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gtest/gtest.h"
#include "httplib.h"
#include "json.hpp"
#include "winocheck/errors.h"

namespace winocheck {
namespace {

using json = nlohmann::json;

MaskScoreRequest Mask(std::string id, std::array<std::string, 2> cands = {"large", "small"}) {
  return {std::move(id), "The trophy is too [MASK].", std::move(cands)};
}

ChoiceScoreRequest Choice(std::string id) {
  return {std::move(id), "The trophy fits because it is small.", Span{20, 2},
          {"the trophy", "the suitcase"}};
}

// ---- Records and batches ---------------------------------------------------

TEST(RecordTest, RoundTrips) {
  MaskScoreRequest mr = Mask("q1");
  EXPECT_EQ(ToRecord(MaskRequestFromRecord(ToRecord(mr))), ToRecord(mr));
  ChoiceScoreRequest cr = Choice("c1");
  EXPECT_EQ(ToRecord(ChoiceRequestFromRecord(ToRecord(cr))), ToRecord(cr));
  MaskScoreResponse resp{"q1", {CandidateResult{-1.5, 1}, CandidateResult{std::nullopt, 3}}, "m"};
  EXPECT_EQ(ToRecord(MaskResponseFromRecord(ToRecord(resp))), ToRecord(resp));
  ChoiceScoreResponse cresp{"c1", {0.25, -0.5}, "m"};
  EXPECT_EQ(ToRecord(ChoiceResponseFromRecord(ToRecord(cresp))), ToRecord(cresp));
}

TEST(ValidateTest, RequestInvariants) {
  EXPECT_NO_THROW(Validate(Mask("a")));
  MaskScoreRequest two = Mask("a");
  two.text = "[MASK] and [MASK]";
  EXPECT_THROW(Validate(two), ValidationError);
  EXPECT_THROW(Validate(Mask("a", {"x", "x"})), ValidationError);
  ChoiceScoreRequest c = Choice("c");
  c.target = {100, 2};
  EXPECT_THROW(Validate(c), ValidationError);
}

TEST(ValidateTest, ResponseInvariants) {
  MaskScoreResponse ok{"a", {CandidateResult{-1.0, 1}, CandidateResult{std::nullopt, 2}}, "m"};
  EXPECT_NO_THROW(Validate(ok));
  MaskScoreResponse score_on_multi{"a", {CandidateResult{-1.0, 2}, CandidateResult{-1.0, 1}}, "m"};
  EXPECT_THROW(Validate(score_on_multi), ScorerError);
  MaskScoreResponse zero_tokens{"a", {CandidateResult{std::nullopt, 0}, CandidateResult{-1.0, 1}}, "m"};
  EXPECT_THROW(Validate(zero_tokens), ScorerError);
  MaskScoreResponse single_no_score{"a", {CandidateResult{std::nullopt, 1}, CandidateResult{-1.0, 1}}, "m"};
  EXPECT_THROW(Validate(single_no_score), ScorerError);
}

TEST(BatchTest, TwoRequestsRoundTrip) {
  std::vector<MaskScoreRequest> reqs = {Mask("a"), Mask("b")};
  std::ostringstream out;
  WriteRequestBatch(reqs, out);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  std::istringstream in(out.str());
  auto back = ReadMaskRequestBatch(in);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(ToRecord(back[1]), ToRecord(reqs[1]));
}

TEST(BatchTest, DuplicateIdRejectedBeforeWriting) {
  std::ostringstream out;
  EXPECT_THROW(WriteRequestBatch(std::vector<MaskScoreRequest>{Mask("a"), Mask("a")}, out),
               ValidationError);
  EXPECT_TRUE(out.str().empty());
  EXPECT_THROW(WriteRequestBatch(std::vector<ChoiceScoreRequest>{Choice("a"), Choice("a")}, out),
               ValidationError);
  EXPECT_TRUE(out.str().empty());
}

TEST(BatchTest, ResponsesMatchedInRequestOrder) {
  std::vector<ChoiceScoreRequest> reqs = {Choice("a"), Choice("b"), Choice("c")};
  std::istringstream in(
      "{\"_meta\":{\"seed\":0}}\n"
      R"({"id":"c","model_id":"m","scores":[0,1]})" "\n"
      R"({"id":"a","model_id":"m","scores":[1,0]})" "\n"
      R"({"id":"b","model_id":"m","scores":[0.5,0.5]})" "\n");
  auto got = ReadResponseBatch(in, reqs);
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0].id, "a");
  EXPECT_EQ(got[2].scores[1], 1.0);
}

TEST(BatchTest, MissingUnknownDuplicateAndMixedModels) {
  std::vector<MaskScoreRequest> reqs = {Mask("a"), Mask("b")};
  auto expect_error = [&](const std::string& body, const std::string& needle) {
    std::istringstream in(body);
    try {
      ReadResponseBatch(in, reqs);
      FAIL() << body;
    } catch (const ScorerError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  const std::string a =
      R"({"id":"a","model_id":"m","candidates":[{"token_count":1,"log_score":-1},{"token_count":1,"log_score":-2}]})";
  const std::string b =
      R"({"id":"b","model_id":"m","candidates":[{"token_count":1,"log_score":-1},{"token_count":1,"log_score":-2}]})";
  const std::string x =
      R"({"id":"x","model_id":"m","candidates":[{"token_count":1,"log_score":-1},{"token_count":1,"log_score":-2}]})";
  const std::string b_other =
      R"({"id":"b","model_id":"other","candidates":[{"token_count":1,"log_score":-1},{"token_count":1,"log_score":-2}]})";
  expect_error(a + "\n", "b");
  expect_error(a + "\n" + b + "\n" + x + "\n", "x");
  expect_error(a + "\n" + b + "\n" + b + "\n", "duplicate");
  expect_error(a + "\n" + b_other + "\n", "model");
}

TEST(BatchTest, MultiTokenCandidateAcceptedAsUnscorable) {
  std::vector<MaskScoreRequest> reqs = {Mask("a", {"styrofoam", "wood"})};
  std::istringstream in(
      R"({"id":"a","model_id":"m","candidates":[{"token_count":2},{"token_count":1,"log_score":-2.5}]})");
  auto got = ReadResponseBatch(in, reqs);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_FALSE(got[0].candidates[0].scorable());
  EXPECT_TRUE(got[0].candidates[1].scorable());
}

// ---- HTTP ------------------------------------------------------------------

double FakeScore(const std::string& id, const std::string& candidate) {
  return -static_cast<double>(std::hash<std::string>{}(id + "|" + candidate) % 1000) / 100.0;
}

class FakeScorer {
 public:
  FakeScorer() {
    server_.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"model_id":"fake-mlm"})", "application/json");
    });
    server_.Post("/v1/score_mask", [this](const httplib::Request& req, httplib::Response& res) {
      Enter();
      ++calls_;
      if (fail_first_ > 0 && fail_first_-- > 0) {
        res.status = 503;
        Leave();
        return;
      }
      json in = json::parse(req.body);
      const std::string id = in["id"];
      json cands = json::array();
      bool multi = false;
      for (const auto& c : in["candidates"]) {
        std::string s = c.get<std::string>();
        if (s == "styrofoam") {
          multi = true;
          cands.push_back({{"token_count", 3}});
        } else {
          double v = FakeScore(id, s) + (drift_ ? 0.001 * calls_.load() : 0.0);
          cands.push_back({{"token_count", 1}, {"log_score", v}});
        }
      }
      res.status = multi ? 422 : 200;
      res.set_content(json{{"id", id}, {"model_id", "fake-mlm"}, {"candidates", cands}}.dump(),
                      "application/json");
      Leave();
    });
    server_.Post("/v1/score_choice", [this](const httplib::Request& req, httplib::Response& res) {
      Enter();
      ++calls_;
      json in = json::parse(req.body);
      const std::string id = in["id"];
      json scores = {FakeScore(id, in["options"][0]), FakeScore(id, in["options"][1])};
      res.set_content(json{{"id", id}, {"model_id", "fake-mc"}, {"scores", scores}}.dump(),
                      "application/json");
      Leave();
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeScorer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int max_seen() const { return max_seen_; }
  int calls() const { return calls_; }
  void FailFirst(int n) { fail_first_ = n; }
  void Drift() { drift_ = true; }

 private:
  void Enter() {
    int now = ++in_flight_;
    int prev = max_seen_.load();
    while (now > prev && !max_seen_.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  void Leave() { --in_flight_; }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_seen_{0};
  std::atomic<int> calls_{0};
  std::atomic<int> fail_first_{0};
  std::atomic<bool> drift_{false};
};

HttpOptions Options(const std::string& endpoint, std::size_t max_in_flight = 4) {
  HttpOptions o;
  o.endpoint = endpoint;
  o.max_in_flight = max_in_flight;
  o.initial_backoff = std::chrono::milliseconds(5);
  o.timeout = std::chrono::seconds(5);
  return o;
}

TEST(HttpScorerTest, HealthReturnsModelId) {
  FakeScorer server;
  EXPECT_EQ(HttpScorer(Options(server.endpoint())).Health(), "fake-mlm");
}

TEST(HttpScorerTest, TenRequestsFourInFlight) {
  FakeScorer server;
  std::vector<MaskScoreRequest> reqs;
  for (int k = 0; k < 10; ++k) reqs.push_back(Mask("q" + std::to_string(k)));
  auto got = HttpScorer(Options(server.endpoint(), 4)).ScoreMask(reqs);
  ASSERT_EQ(got.size(), 10u);
  for (std::size_t k = 0; k < got.size(); ++k) {
    EXPECT_EQ(got[k].id, reqs[k].id);
    EXPECT_EQ(got[k].model_id, "fake-mlm");
    EXPECT_EQ(*got[k].candidates[0].log_score, FakeScore(reqs[k].id, "large"));
  }
  EXPECT_LE(server.max_seen(), 4);
  EXPECT_GE(server.max_seen(), 2);
}

TEST(HttpScorerTest, ResultIndependentOfConcurrency) {
  FakeScorer server;
  std::vector<ChoiceScoreRequest> reqs;
  for (int k = 0; k < 12; ++k) reqs.push_back(Choice("c" + std::to_string(k)));
  auto serial = HttpScorer(Options(server.endpoint(), 1)).ScoreChoice(reqs);
  auto wide = HttpScorer(Options(server.endpoint(), 6)).ScoreChoice(reqs);
  ASSERT_EQ(serial.size(), wide.size());
  for (std::size_t k = 0; k < serial.size(); ++k) {
    EXPECT_EQ(ToRecord(serial[k]), ToRecord(wide[k]));
  }
  EXPECT_GE(server.max_seen(), 1);
}

TEST(HttpScorerTest, Status422MapsToUnscorable) {
  FakeScorer server;
  std::vector<MaskScoreRequest> reqs = {Mask("ok"), Mask("foam", {"styrofoam", "wood"})};
  auto got = HttpScorer(Options(server.endpoint())).ScoreMask(reqs);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_TRUE(got[0].candidates[0].scorable());
  EXPECT_FALSE(got[1].candidates[0].scorable());
  EXPECT_EQ(got[1].candidates[0].token_count, 3);
  EXPECT_TRUE(got[1].candidates[1].scorable());
}

TEST(HttpScorerTest, RetriesTransientFailures) {
  FakeScorer server;
  server.FailFirst(2);
  auto got = HttpScorer(Options(server.endpoint(), 1)).ScoreMask({Mask("a")});
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(server.calls(), 3);
}

TEST(HttpScorerTest, PersistentServerErrorFailsAfterThreeAttempts) {
  FakeScorer server;
  server.FailFirst(1000);
  try {
    HttpScorer(Options(server.endpoint(), 1)).ScoreMask({Mask("a")});
    FAIL();
  } catch (const ScorerError& e) {
    EXPECT_NE(std::string(e.what()).find("3 attempts"), std::string::npos) << e.what();
  }
  EXPECT_EQ(server.calls(), 3);
}

TEST(HttpScorerTest, DownEndpointFailsAfterThreeAttempts) {
  int port = 0;
  {
    httplib::Server probe;
    port = probe.bind_to_any_port("127.0.0.1");
  }
  HttpOptions o = Options("http://127.0.0.1:" + std::to_string(port), 1);
  o.timeout = std::chrono::seconds(1);
  auto start = std::chrono::steady_clock::now();
  try {
    HttpScorer(o).ScoreChoice({Choice("a")});
    FAIL();
  } catch (const ScorerError& e) {
    EXPECT_NE(std::string(e.what()).find("after 3 attempts"), std::string::npos) << e.what();
  }
  // Two backoff sleeps: 5 ms + 10 ms.
  EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(15));
}

TEST(HttpScorerTest, DeterminismVerifier) {
  FakeScorer server;
  HttpScorer scorer(Options(server.endpoint()));
  std::vector<MaskScoreRequest> reqs;
  for (int k = 0; k < 25; ++k) reqs.push_back(Mask("q" + std::to_string(k)));
  auto first = scorer.ScoreMask(reqs);
  EXPECT_NO_THROW(scorer.VerifyDeterminism(reqs, first));
  server.Drift();
  EXPECT_THROW(scorer.VerifyDeterminism(reqs, first), ScorerError);
}

TEST(HttpScorerTest, RejectsBadOptions) {
  EXPECT_THROW(HttpScorer(HttpOptions{}), ValidationError);
  HttpOptions o = Options("http://127.0.0.1:1");
  o.max_in_flight = 0;
  EXPECT_THROW(HttpScorer{o}, ValidationError);
}

}  // namespace
}  // namespace winocheck
