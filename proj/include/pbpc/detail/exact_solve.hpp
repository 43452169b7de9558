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

// Fraction-free Gauss-Jordan elimination for small square integer systems.
// Every intermediate entry is a minor of the augmented matrix, so all
// divisions are exact. Tries 128-bit arithmetic with overflow checks first.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pbpc/rational.hpp"

namespace pbpc::detail {

// x_k = numer[k] / denom with denom > 0.
struct IntegerSolution {
  std::vector<Integer> numer;
  Integer denom;
};

enum class SolveStatus { kOk, kSingular, kOverflow };

namespace solve_internal {

inline bool step(__int128 akk, __int128 aij, __int128 aik, __int128 akj,
                 __int128 prev, __int128* out) {
  __int128 p, q, d;
  if (__builtin_mul_overflow(akk, aij, &p)) return false;
  if (__builtin_mul_overflow(aik, akj, &q)) return false;
  if (__builtin_sub_overflow(p, q, &d)) return false;
  *out = d / prev;
  return true;
}

inline bool step(const Integer& akk, const Integer& aij, const Integer& aik,
                 const Integer& akj, const Integer& prev, Integer* out) {
  *out = (akk * aij - aik * akj) / prev;
  return true;
}

// `a` is n x (n + 1); on success the diagonal holds the determinant (up to
// sign, shared by all rows) and the last column holds determinant * x.
template <typename T>
SolveStatus eliminate(std::vector<std::vector<T>>& a) {
  const int n = static_cast<int>(a.size());
  T prev = 1;
  for (int k = 0; k < n; ++k) {
    int p = k;
    while (p < n && a[p][k] == 0) ++p;
    if (p == n) return SolveStatus::kSingular;
    if (p != k) std::swap(a[p], a[k]);
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      for (int j = k + 1; j <= n; ++j) {
        if (!step(a[k][k], a[i][j], a[i][k], a[k][j], prev, &a[i][j])) {
          return SolveStatus::kOverflow;
        }
      }
      a[i][k] = 0;
    }
    for (int i = 0; i < k; ++i) a[i][i] = a[k][k];
    prev = a[k][k];
  }
  return SolveStatus::kOk;
}

inline Integer to_integer(__int128 v) {
  bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v)
                            : static_cast<unsigned __int128>(v);
  Integer hi = static_cast<std::uint64_t>(u >> 64);
  Integer out = (hi << 64) + Integer(static_cast<std::uint64_t>(u));
  return neg ? Integer(-out) : out;
}

}  // namespace solve_internal

/// Solves the square system given as an augmented n x (n + 1) matrix of
/// 64-bit integers. Returns nullopt when singular.
inline std::optional<IntegerSolution> solve_integer_system(
    const std::vector<std::vector<std::int64_t>>& augmented) {
  const int n = static_cast<int>(augmented.size());
  std::vector<std::vector<__int128>> a(n, std::vector<__int128>(n + 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= n; ++j) a[i][j] = augmented[i][j];
  }
  SolveStatus st = solve_internal::eliminate(a);
  if (st == SolveStatus::kSingular) return std::nullopt;
  IntegerSolution sol;
  if (st == SolveStatus::kOk) {
    bool flip = a[0][0] < 0;
    sol.denom = solve_internal::to_integer(flip ? -a[0][0] : a[0][0]);
    sol.numer.reserve(n);
    for (int i = 0; i < n; ++i) {
      sol.numer.push_back(solve_internal::to_integer(flip ? -a[i][n] : a[i][n]));
    }
    return sol;
  }
  std::vector<std::vector<Integer>> big(n, std::vector<Integer>(n + 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= n; ++j) big[i][j] = augmented[i][j];
  }
  if (solve_internal::eliminate(big) == SolveStatus::kSingular) {
    return std::nullopt;
  }
  bool flip = big[0][0] < 0;
  sol.denom = flip ? Integer(-big[0][0]) : big[0][0];
  for (int i = 0; i < n; ++i) {
    sol.numer.push_back(flip ? Integer(-big[i][n]) : big[i][n]);
  }
  return sol;
}

}  // namespace pbpc::detail
