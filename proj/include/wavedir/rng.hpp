#pragma once

#include <cstdint>
#include <string_view>

namespace wavedir {

/// Counter-based generator built on the splitmix64 scrambler. The same seed
/// yields the same stream on every platform; fork(label) derives an
/// independent stream from the current state and a text label.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; two uniforms consumed per call.
  double gaussian(double mean = 0.0, double stddev = 1.0);

  /// Child stream derived from (current state, label) via FNV-1a.
  SeededRng fork(std::string_view label) const {
    std::uint64_t h = 0xCBF29CE484222325ULL ^ state_;
    for (char ch : label) {
      h ^= static_cast<unsigned char>(ch);
      h *= 0x100000001B3ULL;
    }
    // one scramble round so adjacent labels land far apart
    h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
    return SeededRng(h ^ (h >> 31));
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace wavedir
