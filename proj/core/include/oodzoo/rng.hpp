#pragma once

#include <cstdint>
#include <limits>

namespace oodzoo {

/// SplitMix64 generator. Satisfies UniformRandomBitGenerator, so it plugs
/// into <random> distributions. substream(i) derives an independent stream
/// from (seed, i) so trial i sees the same numbers however trials are
/// scheduled across threads.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    return mix(z);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  Rng substream(std::uint64_t index) const noexcept {
    return Rng(mix(seed_base() ^ mix(index + 0x632be59bd9b4e019ULL)));
  }

  static Rng stream(std::uint64_t seed, std::uint64_t index) noexcept { return Rng(seed).substream(index); }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t seed_base() const noexcept { return mix(state_ ^ 0xd1b54a32d192ed03ULL); }

  std::uint64_t state_;
};

}  // namespace oodzoo
