#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace dfipp {

using Rational = mpq_class;

// Accepts "p/q", "p" or "-p/q"; result is canonicalized.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
double to_double(const Rational& q);
// floor and ceil of a nonnegative rational as an unsigned integer
uint64_t floor_u64(const Rational& q);
uint64_t ceil_u64(const Rational& q);
// num/den in lowest terms; den > 0
Rational ratio(uint64_t num, uint64_t den);

// Exact distance in [0,1], or the +inf sentinel for an empty language.
struct Distance {
  bool infinite = false;
  Rational value = 0;

  static Distance inf() { return Distance{true, 0}; }
  static Distance of(const Rational& q) { return Distance{false, q}; }

  friend bool operator<(const Distance& a, const Distance& b) {
    if (a.infinite) return false;
    if (b.infinite) return true;
    return a.value < b.value;
  }
  friend bool operator==(const Distance& a, const Distance& b) {
    return a.infinite == b.infinite && (a.infinite || a.value == b.value);
  }
  friend bool operator>(const Distance& a, const Distance& b) { return b < a; }
  friend bool operator<=(const Distance& a, const Distance& b) { return !(b < a); }
  friend bool operator>=(const Distance& a, const Distance& b) { return !(a < b); }
};

std::string to_string(const Distance& d);

}  // namespace dfipp
