#pragma once

#include <cstdint>

namespace dinerdash {

// Platform-independent PRNG used everywhere a random draw is needed.
//
// Seeding: the 64-bit state is produced by running SplitMix64 over
// (seed XOR stream * 0x9E3779B97F4A7C15); a zero result is replaced by
// 0x9E3779B97F4A7C15 because xorshift cannot leave the zero state.
//
// Generation: xorshift64* (Vigna 2014):
//   x ^= x >> 12; x ^= x << 25; x ^= x >> 27; return x * 0x2545F4914F6CDD1D
//
// uniform() takes the top 53 bits of next_u64() and scales by 2^-53, so it
// lies in [0, 1). uniform_int(lo, hi) rejects draws above the largest
// multiple of the range width to stay unbiased.
class Rng {
 public:
  Rng() : Rng(0, 0) {}
  explicit Rng(uint64_t seed, uint64_t stream = 0);

  uint64_t next_u64();
  double uniform();
  int uniform_int(int lo, int hi);

  uint64_t state() const { return state_; }
  void set_state(uint64_t s) { state_ = s; }

  bool operator==(const Rng&) const = default;

 private:
  uint64_t state_;
};

// Named streams so that drawing from one purpose never shifts another.
namespace stream {
inline constexpr uint64_t kArrivals = 1;
inline constexpr uint64_t kGroupSizes = 2;
inline constexpr uint64_t kInit = 3;
inline constexpr uint64_t kDropout = 4;
inline constexpr uint64_t kShuffle = 5;
inline constexpr uint64_t kPolicy = 6;
}  // namespace stream

uint64_t splitmix64(uint64_t x);

}  // namespace dinerdash
