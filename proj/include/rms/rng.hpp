#pragma once

#include <array>
#include <cstdint>

namespace rms {

// Splittable deterministic random stream.
//
// A stream is identified by a 128-bit key derived from (seed, stream id).
// child() derives sub-stream keys from the parent *key* alone, never from
// how many draws the parent has produced, so estimators that branch paths
// mid-run stay reproducible and schedule-independent. Generation is
// xoshiro256++ seeded from the key through a SplitMix64 expansion; Gaussians
// come from the Marsaglia polar method with the usual pair cache. The draw
// sequence for a given key is fixed per release.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  // Sub-stream keyed by up to three indices (e.g. replica, stage, branch).
  RngStream child(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const;

  std::uint64_t next_u64();

  // Uniform on (0, 1]; never returns 0 so log() is safe.
  double uniform01();

  // Standard normal draw.
  double gaussian();

  // Unbiased uniform integer in [0, n), n >= 1.
  std::int64_t uniform_below(std::int64_t n);

  std::uint64_t key_hi() const { return key_[0]; }
  std::uint64_t key_lo() const { return key_[1]; }

 private:
  RngStream() = default;
  void absorb(std::uint64_t v);
  void seed_state();

  std::array<std::uint64_t, 2> key_{0, 0};
  std::array<std::uint64_t, 4> state_{0, 0, 0, 0};
  double cached_gaussian_ = 0.0;
  bool has_cached_gaussian_ = false;
};

}  // namespace rms
