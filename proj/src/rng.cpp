#include "evospec/rng.hpp"

#include <cmath>
#include <numbers>

namespace evospec {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
  return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) >> 32);
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint32_t hi0 = mulhi(kPhiloxM0, ctr[0]);
    const std::uint32_t lo0 = kPhiloxM0 * ctr[0];
    const std::uint32_t hi1 = mulhi(kPhiloxM1, ctr[2]);
    const std::uint32_t lo1 = kPhiloxM1 * ctr[2];
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) {
  // Mix the stream id into both key words so streams with equal seed are
  // distinct Philox keys.
  key_[0] = static_cast<std::uint32_t>(seed ^ (stream * 0x9E3779B97F4A7C15ull));
  key_[1] = static_cast<std::uint32_t>((seed >> 32) ^ ((stream * 0xBF58476D1CE4E5B9ull) >> 32));
}

void CounterRng::refill() {
  Philox4x32::Counter ctr = {static_cast<std::uint32_t>(counter_),
                             static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u};
  buf_ = Philox4x32::block(ctr, key_);
  ++counter_;
  buf_pos_ = 0;
}

std::uint32_t CounterRng::next_u32() {
  if (buf_pos_ >= 4) refill();
  return buf_[buf_pos_++];
}

std::uint64_t CounterRng::next_u64() {
  const std::uint64_t lo = next_u32();
  const std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // u1 in (0,1] so the log is finite.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

}  // namespace evospec
