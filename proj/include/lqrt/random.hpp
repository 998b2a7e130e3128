#pragma once

// Seeded random streams with a fixed, platform-independent algorithm.
//
// A stream is a std::mt19937_64 seeded through std::seed_seq from a base seed
// and a path of indices, e.g. (seed, repetition) or (seed, eps, rep, role).
// Both engine and seed_seq are fully specified by the standard; the
// distributions below are written out because the standard library's
// distributions are implementation-defined.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace lqrt::rng {

using Engine = std::mt19937_64;

inline Engine substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * path.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (std::uint64_t p : path) push(p);
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

/// A 64-bit seed derived from a stream; used to hand a child procedure its
/// own base seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  Engine e = substream(seed, path);
  return e();
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& e) { return static_cast<double>(e() >> 11) * 0x1.0p-53; }

/// Uniform integer on [0, n), n > 0, by rejection (no modulo bias).
inline std::size_t uniform_index(Engine& e, std::size_t n) {
  const std::uint64_t range = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t v = e();
  while (v >= limit) v = e();
  return static_cast<std::size_t>(v % range);
}

/// Standard normal by the Marsaglia polar method (one variate per call).
inline double standard_normal(Engine& e) {
  for (;;) {
    const double u = 2.0 * uniform01(e) - 1.0;
    const double v = 2.0 * uniform01(e) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

/// n draws with replacement from source.
inline std::vector<double> resample(std::span<const double> source, Engine& e) {
  std::vector<double> out(source.size());
  for (double& v : out) v = source[uniform_index(e, source.size())];
  return out;
}

}  // namespace lqrt::rng
