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

#include "tiltedflow/rational.hpp"

#include <algorithm>
#include <cmath>

namespace tiltedflow {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyCylinder: return "EmptyCylinder";
    case ErrorCode::NotAdmissible: return "NotAdmissible";
    case ErrorCode::DegenerateChord: return "DegenerateChord";
    case ErrorCode::EmptyArc: return "EmptyArc";
    case ErrorCode::InvalidNetwork: return "InvalidNetwork";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::OverflowRisk: return "OverflowRisk";
    case ErrorCode::DoesNotFit: return "DoesNotFit";
    case ErrorCode::BadTriangle: return "BadTriangle";
    case ErrorCode::HypothesisViolation: return "HypothesisViolation";
    case ErrorCode::ShapeViolation: return "ShapeViolation";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MissingManifest: return "MissingManifest";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

i128 checked_mul(i128 a, i128 b) {
  i128 out;
  if (__builtin_mul_overflow(a, b, &out)) fail(ErrorCode::OverflowRisk, "128-bit multiplication overflow");
  return out;
}

i128 checked_add(i128 a, i128 b) {
  i128 out;
  if (__builtin_add_overflow(a, b, &out)) fail(ErrorCode::OverflowRisk, "128-bit addition overflow");
  return out;
}

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::string i128_str(i128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  std::string s;
  while (v != 0) {
    int d = int(v % 10);
    s.push_back(char('0' + (d < 0 ? -d : d)));
    v /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

Rational::Rational(i128 num, i128 den) {
  if (den == 0) fail(ErrorCode::InvalidArgument, "rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  num_ = num;
  den_ = den;
}

Rational Rational::approximate(double x, int64_t max_den) {
  if (!std::isfinite(x)) fail(ErrorCode::InvalidArgument, "cannot approximate a non-finite value");
  // Continued-fraction convergents, stopping before the denominator bound.
  bool neg = x < 0;
  double v = std::fabs(x);
  i128 p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double rem = v;
  for (int it = 0; it < 64; ++it) {
    double a_d = std::floor(rem);
    if (a_d > 1e17) break;
    i128 a = i128(a_d);
    i128 p2 = a * p1 + p0;
    i128 q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    double frac = rem - a_d;
    if (frac < 1e-15) break;
    rem = 1.0 / frac;
  }
  if (q1 == 0) return Rational(0);
  return Rational(neg ? -p1 : p1, q1);
}

double Rational::to_double() const { return double(num_) / double(den_); }

i128 Rational::floor() const {
  i128 q = num_ / den_;
  if ((num_ % den_ != 0) && (num_ < 0)) --q;
  return q;
}

i128 Rational::ceil() const {
  i128 q = num_ / den_;
  if ((num_ % den_ != 0) && (num_ > 0)) ++q;
  return q;
}

std::string Rational::str() const {
  if (den_ == 1) return i128_str(num_);
  return i128_str(num_) + "/" + i128_str(den_);
}

Rational Rational::operator-() const { return Rational(-num_, den_); }

Rational Rational::operator+(const Rational& o) const {
  i128 g = gcd128(den_, o.den_);
  i128 lhs = checked_mul(num_, o.den_ / g);
  i128 rhs = checked_mul(o.num_, den_ / g);
  return Rational(checked_add(lhs, rhs), checked_mul(den_ / g, o.den_));
}

Rational Rational::operator-(const Rational& o) const { return *this + (-o); }

Rational Rational::operator*(const Rational& o) const {
  i128 g1 = gcd128(num_, o.den_);
  i128 g2 = gcd128(o.num_, den_);
  if (g1 == 0) g1 = 1;
  if (g2 == 0) g2 = 1;
  return Rational(checked_mul(num_ / g1, o.num_ / g2), checked_mul(den_ / g2, o.den_ / g1));
}

Rational Rational::operator/(const Rational& o) const {
  if (o.num_ == 0) fail(ErrorCode::InvalidArgument, "rational division by zero");
  return *this * Rational(o.den_, o.num_);
}

int Rational::compare(const Rational& o) const {
  if (den_ == o.den_) return num_ < o.num_ ? -1 : (num_ > o.num_ ? 1 : 0);
  i128 lhs = checked_mul(num_, o.den_);
  i128 rhs = checked_mul(o.num_, den_);
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

int Surd::sign() const {
  int sr = r.sign();
  int ss = s.sign();
  if (ss == 0) return sr;
  if (sr == 0) return ss;
  if (sr == ss) return sr;
  // Opposite signs: compare r^2 against s^2 * root.
  Rational r2 = r * r;
  Rational s2 = s * s * Rational(root);
  int c = r2.compare(s2);
  if (c == 0) return 0;
  return c > 0 ? sr : ss;
}

double Surd::to_double() const { return r.to_double() + s.to_double() * std::sqrt(double(root)); }

}  // namespace tiltedflow
