/*
   Copyright 2026 The tiltedflow Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <string>

#include "tiltedflow/errors.hpp"

namespace tiltedflow {

using i128 = __int128;

// Exact rational with 128-bit numerator and denominator. Every operation
// checks for overflow and raises OverflowRisk instead of wrapping.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(int64_t v) : num_(v), den_(1) {}  // NOLINT
  Rational(i128 num, i128 den);

  static Rational from_pair(int64_t num, int64_t den) { return Rational(i128(num), i128(den)); }
  // Best rational approximation with denominator at most max_den.
  static Rational approximate(double x, int64_t max_den = 1000000);

  i128 num() const { return num_; }
  i128 den() const { return den_; }
  int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }
  bool is_integer() const { return den_ == 1; }
  double to_double() const;
  i128 floor() const;
  i128 ceil() const;
  std::string str() const;

  Rational operator-() const;
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const { return compare(o) < 0; }
  bool operator<=(const Rational& o) const { return compare(o) <= 0; }
  bool operator>(const Rational& o) const { return compare(o) > 0; }
  bool operator>=(const Rational& o) const { return compare(o) >= 0; }
  int compare(const Rational& o) const;

 private:
  i128 num_;
  i128 den_;
};

i128 checked_mul(i128 a, i128 b);
i128 checked_add(i128 a, i128 b);
i128 gcd128(i128 a, i128 b);
std::string i128_str(i128 v);

// r + s*sqrt(root) with root > 0 fixed by the caller. Comparisons are only
// meaningful between surds sharing the same root.
struct Surd {
  Rational r;
  Rational s;
  int64_t root = 1;

  Surd() = default;
  Surd(Rational r_, Rational s_, int64_t root_) : r(r_), s(s_), root(root_) {}
  static Surd rational(const Rational& v, int64_t root) { return Surd(v, Rational(0), root); }

  int sign() const;
  double to_double() const;
  Surd operator-() const { return Surd(-r, -s, root); }
  Surd operator+(const Surd& o) const { return Surd(r + o.r, s + o.s, root); }
  Surd operator-(const Surd& o) const { return Surd(r - o.r, s - o.s, root); }
  Surd operator*(const Rational& k) const { return Surd(r * k, s * k, root); }
  Surd operator/(const Rational& k) const { return Surd(r / k, s / k, root); }
  int compare(const Surd& o) const { return (*this - o).sign(); }
  bool operator<(const Surd& o) const { return compare(o) < 0; }
  bool operator<=(const Surd& o) const { return compare(o) <= 0; }
  bool operator>(const Surd& o) const { return compare(o) > 0; }
  bool operator>=(const Surd& o) const { return compare(o) >= 0; }
  bool operator==(const Surd& o) const { return compare(o) == 0; }
};

}  // namespace tiltedflow
