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

#ifndef DPAUDIT_RATIONAL_H_
#define DPAUDIT_RATIONAL_H_

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace dpaudit {

// Exact arbitrary-precision rational used for all privacy-budget arithmetic.
using Rational = boost::multiprecision::cpp_rational;

// Parses "3", "-0.25", "1e-6", "2.5E+3" or "1/14" exactly. Throws
// std::invalid_argument on anything else.
Rational ParseRational(std::string_view text);

// Exact value of the shortest decimal that round-trips to `value`, i.e. the
// number a human wrote in the plan file (0.1 -> 1/10, not the binary double).
Rational RationalFromDouble(double value);

double ToDouble(const Rational& value);

// "1/14", "7", "-1/2".
std::string ToString(const Rational& value);

// Shortest round-trip decimal text; "inf" / "-inf" / "nan" for non-finite.
std::string FormatDouble(double value);

}  // namespace dpaudit

#endif  // DPAUDIT_RATIONAL_H_
