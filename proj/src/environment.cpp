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

#include "tiltedflow/environment.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace tiltedflow {

Capacity quantize(double x) {
  if (!(x >= 0.0)) fail(ErrorCode::InvalidArgument, "capacities must be nonnegative");
  double scaled = x * double(kFixedScale);
  if (scaled > double(kFixedMax)) fail(ErrorCode::OverflowRisk, "capacity exceeds 2^43 in fixed point");
  return Capacity(std::floor(scaled + 0.5));
}

std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
  constexpr uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    uint64_t p0 = uint64_t(m0) * ctr[0];
    uint64_t p1 = uint64_t(m1) * ctr[2];
    uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
    uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

double uniform01(uint64_t seed, uint64_t replicate, uint64_t edge_key, uint32_t stream) {
  std::array<uint32_t, 4> ctr = {uint32_t(edge_key), uint32_t(edge_key >> 32), uint32_t(replicate),
                                 uint32_t(replicate >> 32) ^ (stream << 16)};
  std::array<uint32_t, 2> key = {uint32_t(seed), uint32_t(seed >> 32)};
  auto out = philox4x32(ctr, key);
  uint64_t bits = (uint64_t(out[0]) << 32 | out[1]) >> 11;
  return (double(bits) + 0.5) * 0x1.0p-53;
}

DistributionSpec DistributionSpec::two_atom(double delta, double b, double p) {
  DistributionSpec d;
  d.family = Family::TwoAtom;
  d.delta = delta;
  d.b = b;
  d.p = p;
  return d;
}

DistributionSpec DistributionSpec::bernoulli_like(double c, double p) {
  DistributionSpec d;
  d.family = Family::BernoulliLike;
  d.c = c;
  d.p = p;
  return d;
}

DistributionSpec DistributionSpec::shifted_exponential(double delta, double rate) {
  DistributionSpec d;
  d.family = Family::ShiftedExponential;
  d.delta = delta;
  d.rate = rate;
  return d;
}

DistributionSpec DistributionSpec::pareto(double shape) {
  DistributionSpec d;
  d.family = Family::Pareto;
  d.shape = shape;
  return d;
}

DistributionSpec DistributionSpec::uniform(double lo, double hi) {
  DistributionSpec d;
  d.family = Family::Uniform;
  d.lo = lo;
  d.hi = hi;
  return d;
}

DistributionSpec DistributionSpec::constant(double c) {
  DistributionSpec d;
  d.family = Family::Constant;
  d.c = c;
  return d;
}

void DistributionSpec::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorCode::ConfigError, "distribution: " + m); };
  switch (family) {
    case Family::TwoAtom:
      if (delta < 0 || b < 0) bad("two_atom values must be nonnegative");
      if (!(p >= 0 && p <= 1)) bad("two_atom p must lie in [0,1]");
      break;
    case Family::BernoulliLike:
      if (c < 0) bad("bernoulli c must be nonnegative");
      if (!(p >= 0 && p <= 1)) bad("bernoulli p must lie in [0,1]");
      break;
    case Family::ShiftedExponential:
      if (delta < 0) bad("exponential shift must be nonnegative");
      if (!(rate > 0)) bad("exponential rate must be positive");
      break;
    case Family::Pareto:
      if (!(shape > 0)) bad("pareto shape must be positive");
      break;
    case Family::Uniform:
      if (lo < 0 || hi < lo) bad("uniform needs 0 <= lo <= hi");
      break;
    case Family::Constant:
      if (c < 0) bad("constant must be nonnegative");
      break;
  }
}

double DistributionSpec::sample(double u) const {
  switch (family) {
    case Family::TwoAtom: return u < p ? b : delta;
    case Family::BernoulliLike: return u < p ? c : 0.0;
    case Family::ShiftedExponential: return delta - std::log(u) / rate;
    case Family::Pareto: return std::pow(u, -1.0 / shape);
    case Family::Uniform: return lo + (hi - lo) * u;
    case Family::Constant: return c;
  }
  return 0.0;
}

double DistributionSpec::cdf(double x) const {
  switch (family) {
    case Family::TwoAtom: {
      double lo_v = std::min(delta, b), hi_v = std::max(delta, b);
      double lo_mass = delta < b ? 1 - p : (delta > b ? p : 1.0);
      if (x < lo_v) return 0.0;
      if (x < hi_v) return lo_mass;
      return 1.0;
    }
    case Family::BernoulliLike:
      if (x < 0) return 0.0;
      if (x < c) return 1 - p;
      return 1.0;
    case Family::ShiftedExponential: return x < delta ? 0.0 : 1.0 - std::exp(-rate * (x - delta));
    case Family::Pareto: return x < 1.0 ? 0.0 : 1.0 - std::pow(x, -shape);
    case Family::Uniform:
      if (x < lo) return 0.0;
      if (x >= hi) return 1.0;
      return (x - lo) / (hi - lo);
    case Family::Constant: return x < c ? 0.0 : 1.0;
  }
  return 0.0;
}

double DistributionSpec::ess_inf() const {
  switch (family) {
    case Family::TwoAtom:
      if (p <= 0) return delta;
      if (p >= 1) return b;
      return std::min(delta, b);
    case Family::BernoulliLike: return p >= 1 ? c : 0.0;
    case Family::ShiftedExponential: return delta;
    case Family::Pareto: return 1.0;
    case Family::Uniform: return lo;
    case Family::Constant: return c;
  }
  return 0.0;
}

double DistributionSpec::atom_at_inf() const {
  switch (family) {
    case Family::TwoAtom: {
      if (delta == b) return 1.0;
      double mass_delta = 1 - p;
      return ess_inf() == delta ? (p >= 1 ? 0.0 : mass_delta) : p;
    }
    case Family::BernoulliLike: return c == 0 ? 1.0 : (p >= 1 ? 1.0 : 1 - p);
    case Family::ShiftedExponential: return 0.0;
    case Family::Pareto: return 0.0;
    case Family::Uniform: return hi == lo ? 1.0 : 0.0;
    case Family::Constant: return 1.0;
  }
  return 0.0;
}

double DistributionSpec::mass_at_zero() const { return ess_inf() == 0.0 ? atom_at_inf() : 0.0; }

std::string DistributionSpec::name() const {
  std::ostringstream os;
  switch (family) {
    case Family::TwoAtom: os << "TwoAtom(" << delta << "," << b << "," << p << ")"; break;
    case Family::BernoulliLike: os << "BernoulliLike(0," << c << "," << p << ")"; break;
    case Family::ShiftedExponential: os << "ShiftedExponential(" << delta << "," << rate << ")"; break;
    case Family::Pareto: os << "Pareto(" << shape << ",1)"; break;
    case Family::Uniform: os << "Uniform(" << lo << "," << hi << ")"; break;
    case Family::Constant: os << "Constant(" << c << ")"; break;
  }
  return os.str();
}

const char* truth_name(Truth t) {
  switch (t) {
    case Truth::No: return "no";
    case Truth::Yes: return "yes";
    case Truth::Unknown: return "unknown";
  }
  return "unknown";
}

HeightSchedule HeightSchedule::power(double c, double beta) {
  HeightSchedule s;
  s.kind = Kind::Power;
  s.c = c;
  s.beta = beta;
  return s;
}

HeightSchedule HeightSchedule::linear(double c) {
  HeightSchedule s;
  s.kind = Kind::Linear;
  s.c = c;
  s.beta = 1.0;
  return s;
}

HeightSchedule HeightSchedule::log_scaled(double c) {
  HeightSchedule s;
  s.kind = Kind::LogScaled;
  s.c = c;
  return s;
}

HeightSchedule HeightSchedule::custom(std::map<int64_t, double> table) {
  HeightSchedule s;
  s.kind = Kind::Custom;
  s.table = std::move(table);
  return s;
}

HeightSchedule HeightSchedule::alternating(const HeightSchedule& even, const HeightSchedule& odd) {
  HeightSchedule s;
  s.kind = Kind::Alternating;
  s.even = std::make_shared<HeightSchedule>(even);
  s.odd = std::make_shared<HeightSchedule>(odd);
  return s;
}

double HeightSchedule::operator()(int64_t n) const {
  double nd = double(n);
  switch (kind) {
    case Kind::Power: return c * std::pow(nd, beta);
    case Kind::Linear: return c * nd;
    case Kind::LogScaled: return c * nd * std::log(nd);
    case Kind::Custom: {
      auto it = table.find(n);
      if (it == table.end()) fail(ErrorCode::ConfigError, "custom schedule has no entry for n=" + std::to_string(n));
      return it->second;
    }
    case Kind::Alternating: return n % 2 == 0 ? (*even)(n) : (*odd)(n);
  }
  return 0.0;
}

std::pair<double, double> HeightSchedule::ratio_limits(double l) const {
  const double inf = std::numeric_limits<double>::infinity();
  switch (kind) {
    case Kind::Power:
    case Kind::Linear: {
      double r = beta < 1 ? 0.0 : (beta > 1 ? inf : 2.0 * c / l);
      return {r, r};
    }
    case Kind::LogScaled: return {inf, inf};
    case Kind::Custom: {
      if (table.empty()) return {0.0, 0.0};
      auto last = *table.rbegin();
      double r = 2.0 * last.second / (double(last.first) * l);
      return {r, r};
    }
    case Kind::Alternating: {
      auto e = even->ratio_limits(l);
      auto o = odd->ratio_limits(l);
      return {std::min(e.first, o.first), std::max(e.second, o.second)};
    }
  }
  return {0.0, 0.0};
}

Truth HeightSchedule::h1() const {
  switch (kind) {
    case Kind::Power: return (c > 0 && beta > 0) ? Truth::Yes : Truth::No;
    case Kind::Linear: return c > 0 ? Truth::Yes : Truth::No;
    case Kind::LogScaled: return c > 0 ? Truth::Yes : Truth::No;
    case Kind::Custom: return Truth::Unknown;
    case Kind::Alternating: {
      Truth a = even->h1(), b = odd->h1();
      if (a == Truth::No || b == Truth::No) return Truth::No;
      return (a == Truth::Yes && b == Truth::Yes) ? Truth::Yes : Truth::Unknown;
    }
  }
  return Truth::Unknown;
}

Truth HeightSchedule::h2() const {
  switch (kind) {
    case Kind::Power:
    case Kind::Linear:
    case Kind::LogScaled: return Truth::Yes;
    case Kind::Custom: return Truth::Unknown;
    case Kind::Alternating: {
      Truth a = even->h2(), b = odd->h2();
      if (a == Truth::No || b == Truth::No) return Truth::No;
      return (a == Truth::Yes && b == Truth::Yes) ? Truth::Yes : Truth::Unknown;
    }
  }
  return Truth::Unknown;
}

Truth HeightSchedule::h3() const {
  switch (kind) {
    case Kind::Power: return beta > 1 ? Truth::Yes : Truth::No;
    case Kind::Linear: return Truth::No;
    case Kind::LogScaled: return c > 0 ? Truth::Yes : Truth::No;
    case Kind::Custom: return Truth::Unknown;
    case Kind::Alternating: {
      Truth a = even->h3(), b = odd->h3();
      if (a == Truth::No || b == Truth::No) return Truth::No;
      return (a == Truth::Yes && b == Truth::Yes) ? Truth::Yes : Truth::Unknown;
    }
  }
  return Truth::Unknown;
}

std::string HeightSchedule::name() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Power: os << "Power(" << c << "," << beta << ")"; break;
    case Kind::Linear: os << "Linear(" << c << ")"; break;
    case Kind::LogScaled: os << "LogScaled(" << c << ")"; break;
    case Kind::Custom: os << "Custom(" << table.size() << " entries)"; break;
    case Kind::Alternating: os << "Alternating(" << even->name() << "," << odd->name() << ")"; break;
  }
  return os.str();
}

HypothesisReport validate_hypotheses(const DistributionSpec& dist, const HeightSchedule& schedule, double l) {
  dist.validate();
  HypothesisReport r;
  r.f1 = dist.mass_at_zero() < 0.5;
  bool bounded = dist.family == Family::TwoAtom || dist.family == Family::BernoulliLike ||
                 dist.family == Family::Uniform || dist.family == Family::Constant;
  if (bounded) {
    r.f2 = r.f3 = r.f4 = r.f5 = true;
  } else if (dist.family == Family::ShiftedExponential) {
    r.f2 = r.f3 = r.f4 = true;
    r.f5 = false;
  } else {
    r.f2 = dist.shape > 1;
    r.f3 = dist.shape > 2;
    r.f4 = r.f5 = false;
  }
  r.h1 = schedule.h1();
  r.h2 = schedule.h2();
  r.h3 = schedule.h3();
  if (schedule.kind == HeightSchedule::Kind::Custom) {
    r.h4 = Truth::Unknown;
    r.notes.push_back("custom schedule: limits read from the last table entry");
  } else {
    auto lim = schedule.ratio_limits(l);
    r.h4 = lim.first == lim.second ? Truth::Yes : Truth::No;
    r.tan_alpha = lim.second;
  }
  if (r.h4 == Truth::Yes) {
    r.fh1 = r.fh2 = Truth::Yes;
    r.notes.push_back("FH1 and FH2 implied by H4");
  } else {
    r.notes.push_back("FH1/FH2 not checkable without H4; reported unknown");
  }
  auto yes = [](Truth t) { return t == Truth::Yes; };
  r.theorems["tau_lln"] = r.f2 && yes(r.h1);
  r.theorems["nu_positive"] = r.f1 && r.f2;
  r.theorems["phi_lln"] = r.f2 && yes(r.h1) && yes(r.h2);
  r.theorems["phi_lower_deviations"] = r.f1 && r.f2 && yes(r.h1) && yes(r.h2) && yes(r.fh1);
  r.theorems["phi_lower_ldp"] =
      r.f1 && r.f2 && yes(r.h1) && yes(r.h2) && yes(r.fh1) && yes(r.fh2) && (r.f4 || yes(r.h3));
  r.theorems["phi_upper_deviations"] = r.f1 && r.f5 && yes(r.h1);
  return r;
}

Capacity sample_edge(const DistributionSpec& dist, uint64_t seed, uint64_t replicate, uint64_t edge_key) {
  return quantize(dist.sample(uniform01(seed, replicate, edge_key)));
}

CapacityField sample(const DistributionSpec& dist, uint64_t seed, uint64_t replicate,
                     const std::vector<uint64_t>& edge_keys) {
  dist.validate();
  CapacityField f;
  f.seed = seed;
  f.replicate = replicate;
  f.dist = dist;
  f.keys = edge_keys;
  f.values.reserve(edge_keys.size());
  for (uint64_t k : edge_keys) f.values.push_back(sample_edge(dist, seed, replicate, k));
  return f;
}

std::vector<Capacity> sample_cylinder(const DistributionSpec& dist, uint64_t seed, uint64_t replicate,
                                      const Cylinder& cyl) {
  std::vector<Capacity> out;
  out.reserve(cyl.edge_count());
  for (const auto& e : cyl.edges()) out.push_back(sample_edge(dist, seed, replicate, e.key));
  return out;
}

namespace {
constexpr char kMagic[8] = {'T', 'F', 'F', 'I', 'E', 'L', 'D', '1'};

void put_u64(std::ostream& os, uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = (unsigned char)(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  if (!is) fail(ErrorCode::IoError, "truncated field file");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(buf[i]) << (8 * i);
  return v;
}
}  // namespace

void write_field(const std::string& path, const CapacityField& field, const std::string& header_json) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::IoError, "cannot open " + path);
  os.write(kMagic, 8);
  put_u64(os, header_json.size());
  os.write(header_json.data(), std::streamsize(header_json.size()));
  put_u64(os, field.keys.size());
  for (size_t i = 0; i < field.keys.size(); ++i) {
    put_u64(os, field.keys[i]);
    put_u64(os, uint64_t(field.values[i]));
  }
  if (!os) fail(ErrorCode::IoError, "write failed for " + path);
}

CapacityField read_field(const std::string& path, std::string* header_json) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) fail(ErrorCode::IoError, path + " is not a field file");
  uint64_t hlen = get_u64(is);
  std::string header(hlen, '\0');
  is.read(header.data(), std::streamsize(hlen));
  if (!is) fail(ErrorCode::IoError, "truncated field header");
  if (header_json) *header_json = header;
  CapacityField f;
  uint64_t count = get_u64(is);
  f.keys.resize(count);
  f.values.resize(count);
  for (uint64_t i = 0; i < count; ++i) {
    f.keys[i] = get_u64(is);
    f.values[i] = Capacity(get_u64(is));
  }
  return f;
}

}  // namespace tiltedflow
