#pragma once

#include <array>
#include <cstdint>

namespace evospec {

/// Philox4x32-10 counter-based generator. Bit-reproducible across
/// platforms; independent streams are obtained by putting a stream id in
/// the key. All fixture randomness flows through this type.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// Sequential draw interface over a Philox stream identified by
/// (seed, stream). Draw order is part of the fixture contract.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on [0,1) with 53-bit resolution.
  double uniform();

  /// Standard normal via Box-Muller (pairs cached).
  double normal();

 private:
  void refill();

  Philox4x32::Key key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace evospec
