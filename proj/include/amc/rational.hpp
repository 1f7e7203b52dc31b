#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace amc {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// Parses "a/b", an integer literal, or a finite decimal ("0.25") exactly.
// Throws std::invalid_argument on anything else (including "1/0").
Rat parse_rat(const std::string& text);

// Lowest terms, "a/b", or just "a" when the denominator is 1.
std::string format_rat(const Rat& r);

// Round-half-even decimal rendering with `digits` significant digits;
// trailing zeros after the point are trimmed ("3/20" -> "0.15").
std::string decimal_string(const Rat& r, unsigned digits = 6);

}  // namespace amc
