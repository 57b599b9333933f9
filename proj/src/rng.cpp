#include "rms/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace rms {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer; full-avalanche 64-bit mixer.
std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) {
  key_[0] = mix64(seed);
  key_[1] = mix64(seed ^ 0xda3e39cb94b95bdbULL);
  absorb(stream_id);
  seed_state();
}

void RngStream::absorb(std::uint64_t v) {
  key_[0] = mix64(key_[0] ^ v);
  key_[1] = mix64(key_[1] + kGolden + v);
}

void RngStream::seed_state() {
  std::uint64_t z = key_[0] ^ mix64(key_[1]);
  for (auto& word : state_) {
    z += kGolden;
    word = mix64(z);
  }
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = kGolden;
}

RngStream RngStream::child(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
  RngStream derived;
  derived.key_ = key_;
  derived.absorb(a);
  derived.absorb(b);
  derived.absorb(c);
  derived.seed_state();
  return derived;
}

std::uint64_t RngStream::next_u64() {
  // xoshiro256++
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform01() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::gaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  // Marsaglia polar method.
  double v1, v2, s;
  do {
    v1 = 2.0 * uniform01() - 1.0;
    v2 = 2.0 * uniform01() - 1.0;
    s = v1 * v1 + v2 * v2;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_gaussian_ = v2 * f;
  has_cached_gaussian_ = true;
  return v1 * f;
}

std::int64_t RngStream::uniform_below(std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("uniform_below: n must be positive");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Lemire's multiply-and-reject method.
  std::uint64_t x = next_u64();
  unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
  std::uint64_t low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0u - bound) % bound;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<unsigned __int128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::int64_t>(m >> 64);
}

}  // namespace rms
