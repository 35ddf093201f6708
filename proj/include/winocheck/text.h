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

// Byte-offset text helpers shared by the corpus and transform modules.
// All offsets are UTF-8 byte offsets; case folding is ASCII-only.

#ifndef WINOCHECK_TEXT_H_
#define WINOCHECK_TEXT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace winocheck {

// Half-open byte interval [begin, begin + length).
struct Span {
  std::size_t begin = 0;
  std::size_t length = 0;

  std::size_t end() const { return begin + length; }
  bool empty() const { return length == 0; }
  bool Contains(std::size_t pos) const { return pos >= begin && pos < end(); }
  bool Overlaps(const Span& other) const {
    return begin < other.end() && other.begin < end();
  }
  std::string_view In(std::string_view text) const {
    return text.substr(begin, length);
  }
  friend bool operator==(const Span&, const Span&) = default;
};

struct Token {
  std::string_view text;
  Span span;
};

bool IsSpace(char c);
// Terminal punctuation split off by the diff tokenizer.
bool IsTerminalPunct(char c);
char ToLowerAscii(char c);
std::string ToLower(std::string_view s);
bool IEquals(std::string_view a, std::string_view b);
std::string_view Trim(std::string_view s);

// Whitespace tokens with trailing runs of . , ; ? ! split into
// single-character tokens: "large." -> "large" ".".
std::vector<Token> TokenizeForDiff(std::string_view text);

// Plain whitespace tokens.
std::vector<Token> TokenizeWhitespace(std::string_view text);

// Collapses whitespace runs to one space and trims both ends.
std::string CollapseWhitespace(std::string_view text);

// CollapseWhitespace that also remaps `span` into the output. The span
// must not start or end inside a whitespace run.
std::string CollapseWhitespace(std::string_view text, Span* span);

// Case-insensitive search for `needle` delimited by non-alphanumeric
// characters (or string ends). Returns npos when absent.
std::size_t FindWord(std::string_view haystack, std::string_view needle,
                     std::size_t from = 0);

// Every case-insensitive word-delimited occurrence of `needle`.
std::vector<Span> FindAllWords(std::string_view haystack,
                               std::string_view needle);

// True when `pos` is preceded only by whitespace or by sentence-final
// punctuation (. ? !) and whitespace.
bool IsSentenceInitial(std::string_view text, std::size_t pos);

std::string CapitalizeFirst(std::string_view s);
std::string LowercaseFirst(std::string_view s);

}  // namespace winocheck

#endif  // WINOCHECK_TEXT_H_
