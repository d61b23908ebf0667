/*
 * Copyright 2026 The eocrc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eocrc {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct SplitError : Error {
  using Error::Error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct SingleClassError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct TransportError : Error {
  using Error::Error;
};

// Raised when an LLM reply carries no parseable "Answer:" token. Keeps the
// raw payload for audit.
struct ParseError : Error {
  explicit ParseError(const std::string& msg, std::string raw_text = {})
      : Error(msg), raw(std::move(raw_text)) {}
  std::string raw;
};

// ---------------------------------------------------------------------------
// Calendar dates
// ---------------------------------------------------------------------------

// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
struct Date {
  int32_t days = 0;

  static Date from_ymd(int year, int month, int day);
  // Parses "YYYY-MM-DD". Returns nullopt on malformed input.
  static std::optional<Date> parse(std::string_view iso);

  std::string to_string() const;  // ISO-8601, YYYY-MM-DD

  auto operator<=>(const Date&) const = default;

  Date operator+(int d) const { return Date{days + d}; }
  Date operator-(int d) const { return Date{days - d}; }
  int operator-(Date other) const { return days - other.days; }
};

// ---------------------------------------------------------------------------
// Hashing & seed derivation
// ---------------------------------------------------------------------------

uint64_t fnv1a64(std::string_view data);

uint64_t splitmix64(uint64_t x);

// Per-stage seed derivation: every random choice in the pipeline derives its
// seed from the global seed and a stage tag via
//   splitmix64(base ^ fnv1a64(tag)).
uint64_t derive_seed(uint64_t base, std::string_view tag);

// ---------------------------------------------------------------------------
// Seeded RNG
// ---------------------------------------------------------------------------

// mt19937_64 with hand-rolled distributions so that sequences are identical
// across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 bits of randomness.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [lo, hi], inclusive, by rejection.
  int64_t uniform_int(int64_t lo, int64_t hi);

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller; consumes two uniforms per call.
  double normal(double mean, double stddev);

  // Knuth's method; intended for small lambda.
  int poisson(double lambda);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  Rng fork(std::string_view tag) { return Rng(derive_seed(next_u64(), tag)); }

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Bounded parallel loop
// ---------------------------------------------------------------------------

// Runs fn(0..n-1) on up to `workers` threads. Results must be written to
// index-addressed slots so the outcome is independent of scheduling.
void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn);

}  // namespace eocrc
