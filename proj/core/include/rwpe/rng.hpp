#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace rwpe {

/// Reproducible per-replica random stream.
///
/// xoshiro256** whose state is derived by SplitMix64 from (seed, stream_id).
/// The same pair always yields the same sequence, independently of which
/// thread draws it.
class RngStream {
 public:
  using result_type = std::uint64_t;
  static constexpr std::string_view kGeneratorName =
      "xoshiro256**/splitmix64(seed,stream)";

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t s_[4];
};

}  // namespace rwpe
