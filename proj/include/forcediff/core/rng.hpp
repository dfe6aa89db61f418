#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace forcediff {

// Counter-based generator: Philox4x32-10 (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3"). The 64-bit seed is the Philox key; the
// 128-bit counter is split into a 64-bit block index and a 64-bit stream id,
// so independent streams are derived without any shared state.
//
// Normal draws use the Box-Muller transform on two 53-bit uniforms; both
// outputs are consumed before the next pair is generated.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "philox4x32-10";

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  // Stream `stream` under the same key; independent of this generator's position.
  Rng derive(std::uint64_t stream) const { return Rng(seed_, stream); }

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n) without modulo bias. n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  // Number of 32-bit words consumed so far.
  std::uint64_t draws() const { return draws_; }

  // Raw Philox4x32-10 block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter,
                                             std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  unsigned buffered_ = 0;
  std::uint64_t draws_ = 0;
  std::optional<double> spare_normal_;
};

// Mixes two 64-bit values into a seed (splitmix64 finalizer over a combination).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace forcediff
