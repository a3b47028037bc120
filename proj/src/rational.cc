// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpaudit/rational.h"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dpaudit {
namespace {

using boost::multiprecision::cpp_int;

bool AllDigits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

cpp_int Pow10(long exponent) {
  cpp_int result = 1;
  for (long i = 0; i < exponent; ++i) result *= 10;
  return result;
}

Rational ParseDecimal(std::string_view text) {
  const std::string original(text);
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
    if (!AllDigits(exp_text) || exp_text.size() > 6) {
      throw std::invalid_argument("not a number: '" + original + "'");
    }
    exponent = std::stol(std::string(exp_text));
    if (exp_negative) exponent = -exponent;
    text = text.substr(0, e);
  }
  std::string digits;
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    if ((!whole.empty() && !AllDigits(whole)) || (!frac.empty() && !AllDigits(frac)) ||
        (whole.empty() && frac.empty())) {
      throw std::invalid_argument("not a number: '" + original + "'");
    }
    digits = std::string(whole) + std::string(frac);
    exponent -= static_cast<long>(frac.size());
  } else {
    if (!AllDigits(text)) throw std::invalid_argument("not a number: '" + original + "'");
    digits = std::string(text);
  }
  cpp_int mantissa(digits);
  Rational value = exponent >= 0 ? Rational(mantissa * Pow10(exponent))
                                 : Rational(mantissa, Pow10(-exponent));
  return negative ? Rational(-value) : value;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

Rational ParseRational(std::string_view text) {
  text = Trim(text);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = ParseDecimal(Trim(text.substr(0, slash)));
    Rational den = ParseDecimal(Trim(text.substr(slash + 1)));
    if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  return ParseDecimal(text);
}

Rational RationalFromDouble(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite value has no rational form");
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::invalid_argument("cannot format double");
  return ParseDecimal(std::string_view(buffer, end - buffer));
}

double ToDouble(const Rational& value) { return value.convert_to<double>(); }

std::string ToString(const Rational& value) {
  auto num = boost::multiprecision::numerator(value);
  auto den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end - buffer);
}

}  // namespace dpaudit
