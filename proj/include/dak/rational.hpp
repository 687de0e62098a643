#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dak {

using Rat = boost::multiprecision::cpp_rational;
using Int = boost::multiprecision::cpp_int;

// Parses "0.405", "1", ".5", "3/8", with optional sign. Exact, no floating
// point involved.
inline Rat parse_rational(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  bool neg = false;
  size_t pos = 0;
  if (s[0] == '+' || s[0] == '-') {
    neg = s[0] == '-';
    pos = 1;
  }
  auto digits = [&](std::string_view d) -> Int {
    if (d.empty()) return 0;
    Int v = 0;
    for (char c : d) {
      if (c < '0' || c > '9') throw std::invalid_argument("bad rational literal: " + std::string(s));
      v = v * 10 + (c - '0');
    }
    return v;
  };
  std::string_view body = s.substr(pos);
  Rat r;
  if (auto slash = body.find('/'); slash != std::string_view::npos) {
    Int num = digits(body.substr(0, slash));
    Int den = digits(body.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator: " + std::string(s));
    r = Rat(num, den);
  } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
    std::string_view ip = body.substr(0, dot);
    std::string_view fp = body.substr(dot + 1);
    if (ip.empty() && fp.empty()) throw std::invalid_argument("bad rational literal: " + std::string(s));
    Int den = 1;
    for (size_t i = 0; i < fp.size(); ++i) den *= 10;
    r = Rat(digits(ip) * den + digits(fp), den);
  } else {
    r = Rat(digits(body));
  }
  return neg ? Rat(-r) : r;
}

// Exact decimal string when the denominator is of the form 2^a * 5^b,
// otherwise "p/q". Round-trips through parse_rational.
inline std::string rat_to_string(const Rat& r) {
  Int num = boost::multiprecision::numerator(r);
  Int den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  Int d = den;
  int twos = 0, fives = 0;
  while (d % 2 == 0) { d /= 2; ++twos; }
  while (d % 5 == 0) { d /= 5; ++fives; }
  if (d != 1) return num.str() + "/" + den.str();
  int digits = twos > fives ? twos : fives;
  Int scale = 1;
  for (int i = twos; i < digits; ++i) scale *= 2;
  for (int i = fives; i < digits; ++i) scale *= 5;
  Int scaled = num * scale;  // now over 10^digits
  bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  std::string frac = scaled.str();
  if ((int)frac.size() <= digits) frac.insert(0, digits + 1 - frac.size(), '0');
  frac.insert(frac.size() - digits, ".");
  return (neg ? "-" : "") + frac;
}

inline double rat_to_double(const Rat& r) { return static_cast<double>(r); }

inline Rat rat_sq_half(const Rat& x) { return x * x / 2; }

}  // namespace dak
