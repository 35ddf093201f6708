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

#ifndef WINOCHECK_ERRORS_H_
#define WINOCHECK_ERRORS_H_

#include <stdexcept>
#include <string>

namespace winocheck {

// Input that does not conform to an expected file format.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Well-formed input that violates a contract (missing predictions,
// duplicate ids, stage-order violations, bad configuration).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure talking to a scorer (HTTP transport, 5xx after retries,
// protocol violations in responses).
class ScorerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace winocheck

#endif  // WINOCHECK_ERRORS_H_
