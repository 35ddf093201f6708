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

#include "winocheck/text.h"

#include <cctype>

namespace winocheck {
namespace {

bool IsAlnum(char c) {
  // Non-ASCII bytes count as word characters so UTF-8 letters are never
  // treated as delimiters.
  return std::isalnum(static_cast<unsigned char>(c)) != 0 ||
         static_cast<unsigned char>(c) >= 0x80;
}

}  // namespace

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsTerminalPunct(char c) {
  return c == '.' || c == ',' || c == ';' || c == '?' || c == '!';
}

char ToLowerAscii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = ToLowerAscii(c);
  return out;
}

bool IEquals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (ToLowerAscii(a[i]) != ToLowerAscii(b[i])) return false;
  }
  return true;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<Token> TokenizeWhitespace(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    if (i == text.size()) break;
    std::size_t start = i;
    while (i < text.size() && !IsSpace(text[i])) ++i;
    tokens.push_back({text.substr(start, i - start), {start, i - start}});
  }
  return tokens;
}

std::vector<Token> TokenizeForDiff(std::string_view text) {
  std::vector<Token> tokens;
  for (const Token& raw : TokenizeWhitespace(text)) {
    std::size_t word_end = raw.span.end();
    while (word_end > raw.span.begin && IsTerminalPunct(text[word_end - 1])) {
      --word_end;
    }
    if (word_end > raw.span.begin) {
      std::size_t len = word_end - raw.span.begin;
      tokens.push_back({text.substr(raw.span.begin, len), {raw.span.begin, len}});
    }
    for (std::size_t p = word_end; p < raw.span.end(); ++p) {
      tokens.push_back({text.substr(p, 1), {p, 1}});
    }
  }
  return tokens;
}

std::string CollapseWhitespace(std::string_view text) {
  return CollapseWhitespace(text, nullptr);
}

std::string CollapseWhitespace(std::string_view text, Span* span) {
  std::string out;
  out.reserve(text.size());
  std::size_t new_begin = 0;
  std::size_t new_end = 0;
  bool pending_space = false;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (span != nullptr && i == span->begin) {
      new_begin = out.size() + ((pending_space && !out.empty()) ? 1 : 0);
    }
    if (span != nullptr && i == span->end()) new_end = out.size();
    if (i == text.size()) break;
    char c = text[i];
    if (IsSpace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  if (span != nullptr) {
    span->begin = new_begin;
    span->length = new_end >= new_begin ? new_end - new_begin : 0;
  }
  return out;
}

std::size_t FindWord(std::string_view haystack, std::string_view needle,
                     std::size_t from) {
  if (needle.empty() || needle.size() > haystack.size()) {
    return std::string_view::npos;
  }
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    if (!IEquals(haystack.substr(i, needle.size()), needle)) continue;
    bool left_ok = i == 0 || !IsAlnum(haystack[i - 1]) ||
                   !IsAlnum(needle.front());
    std::size_t after = i + needle.size();
    bool right_ok = after == haystack.size() || !IsAlnum(haystack[after]) ||
                    !IsAlnum(needle.back());
    if (left_ok && right_ok) return i;
  }
  return std::string_view::npos;
}

std::vector<Span> FindAllWords(std::string_view haystack,
                               std::string_view needle) {
  std::vector<Span> hits;
  std::size_t pos = 0;
  while ((pos = FindWord(haystack, needle, pos)) != std::string_view::npos) {
    hits.push_back({pos, needle.size()});
    pos += needle.size();
  }
  return hits;
}

bool IsSentenceInitial(std::string_view text, std::size_t pos) {
  std::size_t i = pos;
  while (i > 0 && IsSpace(text[i - 1])) --i;
  if (i == 0) return true;
  // Skip opening quotes.
  while (i > 0 && (text[i - 1] == '"' || text[i - 1] == '\'')) --i;
  while (i > 0 && IsSpace(text[i - 1])) --i;
  if (i == 0) return true;
  char prev = text[i - 1];
  return prev == '.' || prev == '?' || prev == '!';
}

std::string CapitalizeFirst(std::string_view s) {
  std::string out(s);
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') {
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
  }
  return out;
}

std::string LowercaseFirst(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = ToLowerAscii(out[0]);
  return out;
}

}  // namespace winocheck
