#pragma once

#include <cstdint>
#include <random>

namespace slitbilliard {

/// std::mt19937_64 with an explicit 53-bit conversion to doubles, so that
/// sample streams do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::uint64_t next() { return engine_(); }

  /// Independent stream for work item `index` of a run seeded with `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return Rng((static_cast<std::uint64_t>(words[0]) << 32) | words[1]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace slitbilliard
