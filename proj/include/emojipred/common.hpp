#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace emojipred {

// Exit-code aware error hierarchy. The CLI maps each kind to its exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 1; }
};

// Bad user input (malformed arguments, unknown config keys, invalid values).
class InputError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 1; }
};

// A file or other resource the command needs does not exist.
class MissingResourceError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

// Artifacts disagree with each other (e.g. checkpoint built on another vocab).
class ConsistencyError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

using ClassId = int;
using SourceId = int;

// SplitMix64 finalizer; used to derive independent stream seeds from a base
// seed and a counter so sampling never depends on scheduling order.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

// Thin wrapper over mt19937_64 with distribution helpers whose output is
// fully specified here (std:: distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::size_t below(std::size_t n) {
    // Rejection sampling keeps the draw exactly uniform.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return static_cast<std::size_t>(r % n);
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// 64-bit FNV-1a; used for vocabulary and config fingerprints.
inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v);

// Formats a metric value with a fixed number of decimals.
std::string format_fixed(double v, int decimals);

}  // namespace emojipred
