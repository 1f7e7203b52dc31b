#include "amc/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace amc {

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

[[noreturn]] void bad(const std::string& text) {
  throw std::invalid_argument("not a rational literal: '" + text + "'");
}

}  // namespace

Rat parse_rat(const std::string& text) {
  std::string s = text;
  bool negative = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    negative = s[0] == '-';
    s.erase(0, 1);
  }
  if (s.empty()) bad(text);

  Rat value;
  auto slash = s.find('/');
  auto dot = s.find('.');
  if (slash != std::string::npos) {
    std::string num = s.substr(0, slash);
    std::string den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) bad(text);
    Int d(den);
    if (d == 0) throw std::invalid_argument("zero denominator: '" + text + "'");
    value = Rat(Int(num), d);
  } else if (dot != std::string::npos) {
    std::string whole = s.substr(0, dot);
    std::string frac = s.substr(dot + 1);
    if (whole.empty()) whole = "0";
    if (!all_digits(whole) || (!frac.empty() && !all_digits(frac))) bad(text);
    Int scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    value = Rat(Int(whole) * scale + (frac.empty() ? Int(0) : Int(frac)), scale);
  } else {
    if (!all_digits(s)) bad(text);
    value = Rat(Int(s));
  }
  return negative ? -value : value;
}

std::string format_rat(const Rat& r) {
  const Int num = numerator(r);
  const Int den = denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

std::string decimal_string(const Rat& r, unsigned digits) {
  if (digits == 0) digits = 1;
  if (r == 0) return "0";
  const bool negative = r < 0;
  const Rat mag = negative ? Rat(-r) : r;

  // exp10 = number of digits in front of the point (may be <= 0 for values < 1).
  int exp10 = 0;
  Rat probe = mag;
  while (probe >= 1) {
    probe /= 10;
    ++exp10;
  }
  while (probe < Rat(1, 10)) {
    probe *= 10;
    --exp10;
  }

  // Scale so that exactly `digits` significant digits sit left of the point,
  // then round half to even.
  const int shift = static_cast<int>(digits) - exp10;
  Rat scaled = mag;
  for (int i = 0; i < shift; ++i) scaled *= 10;
  for (int i = 0; i < -shift; ++i) scaled /= 10;
  Int q = numerator(scaled) / denominator(scaled);
  const Int rem2 = 2 * (numerator(scaled) - q * denominator(scaled));
  if (rem2 > denominator(scaled) || (rem2 == denominator(scaled) && (q & 1) != 0)) ++q;

  std::string mantissa = q.str();
  // Rounding can carry over ("99..9" -> "100..0"): one extra digit, point moves.
  int point = exp10;
  if (mantissa.size() > digits) point += 1;

  std::string out;
  if (point <= 0) {
    out = "0.";
    out.append(static_cast<std::size_t>(-point), '0');
    out += mantissa;
  } else if (static_cast<std::size_t>(point) >= mantissa.size()) {
    out = mantissa;
    out.append(static_cast<std::size_t>(point) - mantissa.size(), '0');
  } else {
    out = mantissa.substr(0, static_cast<std::size_t>(point)) + "." +
          mantissa.substr(static_cast<std::size_t>(point));
  }
  if (out.find('.') != std::string::npos) {
    while (out.back() == '0') out.pop_back();
    if (out.back() == '.') out.pop_back();
  }
  return negative ? "-" + out : out;
}

}  // namespace amc
