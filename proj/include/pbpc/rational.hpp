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

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace pbpc {

// Arbitrary precision integers and rationals. Expression templates are off so
// that `auto` always yields a value.
using Integer = boost::multiprecision::number<
    boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;
using Rational =
    boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                  boost::multiprecision::et_off>;

inline Integer numerator_of(const Rational& r) {
  return boost::multiprecision::numerator(r);
}

inline Integer denominator_of(const Rational& r) {
  return boost::multiprecision::denominator(r);
}

inline Rational make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  return Rational(Integer(num), Integer(den));
}

inline Integer floor_to_integer(const Rational& r) {
  Integer n = numerator_of(r);
  Integer d = denominator_of(r);
  Integer q = n / d;  // truncates toward zero
  if (n < 0 && q * d != n) q -= 1;
  return q;
}

inline Integer ceil_to_integer(const Rational& r) {
  Integer n = numerator_of(r);
  Integer d = denominator_of(r);
  Integer q = n / d;
  if (n > 0 && q * d != n) q += 1;
  return q;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Canonical text form: "n" for integers, "n/d" otherwise.
inline std::string to_string(const Rational& r) {
  Integer d = denominator_of(r);
  if (d == 1) return numerator_of(r).str();
  return numerator_of(r).str() + "/" + d.str();
}

/// H_k = 1 + 1/2 + ... + 1/k.
inline Rational harmonic_number(int k) {
  Rational h = 0;
  for (int j = 1; j <= k; ++j) h += Rational(Integer(1), Integer(j));
  return h;
}

namespace detail {

inline Integer parse_digits(std::string_view digits, std::string_view whole) {
  if (digits.empty()) {
    throw std::invalid_argument("malformed number: '" + std::string(whole) +
                                "'");
  }
  Integer v = 0;
  for (char ch : digits) {
    if (ch < '0' || ch > '9') {
      throw std::invalid_argument("malformed number: '" + std::string(whole) +
                                  "'");
    }
    v = v * 10 + (ch - '0');
  }
  return v;
}

inline Integer pow10(unsigned e) {
  Integer p = 1;
  for (unsigned k = 0; k < e; ++k) p *= 10;
  return p;
}

// Decimal with optional fraction and exponent, converted exactly.
inline Rational parse_decimal(std::string_view text) {
  std::string_view whole = text;
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = text.substr(e + 1);
    bool exp_negative = false;
    if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
      exp_negative = exp_text.front() == '-';
      exp_text.remove_prefix(1);
    }
    auto [ptr, ec] = std::from_chars(exp_text.data(),
                                     exp_text.data() + exp_text.size(), exponent);
    if (ec != std::errc{} || ptr != exp_text.data() + exp_text.size() ||
        exp_text.empty() || exponent > 4000) {
      throw std::invalid_argument("malformed number: '" + std::string(whole) +
                                  "'");
    }
    if (exp_negative) exponent = -exponent;
    text = text.substr(0, e);
  }
  std::string_view int_part = text;
  std::string_view frac_part;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    int_part = text.substr(0, dot);
    frac_part = text.substr(dot + 1);
    if (int_part.empty() && frac_part.empty()) {
      throw std::invalid_argument("malformed number: '" + std::string(whole) +
                                  "'");
    }
  }
  Integer digits = int_part.empty() ? Integer(0) : parse_digits(int_part, whole);
  if (!frac_part.empty()) {
    digits = digits * pow10(static_cast<unsigned>(frac_part.size())) +
             parse_digits(frac_part, whole);
  }
  exponent -= static_cast<long>(frac_part.size());
  Rational value = exponent >= 0
                       ? Rational(digits * pow10(static_cast<unsigned>(exponent)))
                       : Rational(digits, pow10(static_cast<unsigned>(-exponent)));
  return negative ? Rational(-value) : value;
}

}  // namespace detail

/// Parses "n", "n/d", or a decimal such as "0.3" or "2.5e-1" exactly.
inline Rational parse_rational(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) throw std::invalid_argument("empty rational literal");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = detail::parse_decimal(text.substr(0, slash));
    Rational den = detail::parse_decimal(text.substr(slash + 1));
    if (den == 0) {
      throw std::invalid_argument("zero denominator in '" + std::string(text) +
                                  "'");
    }
    return num / den;
  }
  return detail::parse_decimal(text);
}

/// Exact value of the shortest decimal that round-trips to `x`, so that a
/// JSON number written as 0.3 becomes 3/10 rather than the binary neighbour.
inline Rational rational_from_shortest_decimal(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw std::invalid_argument("unrepresentable number");
  std::string_view text(buf, static_cast<std::size_t>(ptr - buf));
  if (text.find_first_of("in") != std::string_view::npos) {
    throw std::invalid_argument("non-finite number");
  }
  return detail::parse_decimal(text);
}

}  // namespace pbpc
