// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace multires {

// Uniform sampling that is bit-identical on every platform: the mt19937_64
// engine is fully specified by the standard, and the 53-bit mantissa mapping
// below avoids std::uniform_real_distribution, whose output is
// implementation-defined.
class UniformSampler {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/unit53";

  explicit UniformSampler(std::uint64_t seed) : engine_(seed) {}

  /// Uniform draw in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform draw in [lo, hi).
  double in(double lo, double hi) { return lo + unit() * (hi - lo); }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 step, used to derive independent stream seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t base,
                                        std::uint64_t stream) {
  return splitmix64(base + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

}  // namespace multires
