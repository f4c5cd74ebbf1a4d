#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace rarexact {

/// Philox4x32-10 counter-based generator. A (seed, stream) pair names an
/// independent substream; draws advance a 64-bit block counter.
class CounterRng {
 public:
  static constexpr std::string_view kIdentity = "philox4x32-10";

  CounterRng(std::uint64_t seed, std::uint32_t stream_lo, std::uint32_t stream_hi = 0);

  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer on [0, bound), bound > 0, by Lemire's rejection method.
  std::uint32_t below(std::uint32_t bound);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

}  // namespace rarexact
