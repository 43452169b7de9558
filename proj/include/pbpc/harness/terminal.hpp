// Copyright 2026 The pbpc Authors.
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

#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

#include <unistd.h>

namespace pbpc::harness {

/// Colour only on a terminal and only when NO_COLOR is unset or empty.
inline bool use_color(std::FILE* stream) {
  const char* no_color = std::getenv("NO_COLOR");
  if (no_color != nullptr && no_color[0] != '\0') return false;
  return ::isatty(::fileno(stream)) == 1;
}

inline std::string paint(const std::string& text, const char* code,
                         bool enabled) {
  if (!enabled) return text;
  return std::string("\033[") + code + "m" + text + "\033[0m";
}

inline std::string red(const std::string& t, bool on) { return paint(t, "31", on); }
inline std::string green(const std::string& t, bool on) { return paint(t, "32", on); }
inline std::string bold(const std::string& t, bool on) { return paint(t, "1", on); }

}  // namespace pbpc::harness
