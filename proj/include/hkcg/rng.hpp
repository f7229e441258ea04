#pragma once

#include <array>
#include <cstdint>

namespace hkcg {

// Philox4x64-10 block function (Salmon et al., Random123). Pure function of
// a 256-bit counter and a 128-bit key.
std::array<std::uint64_t, 4> philox4x64(const std::array<std::uint64_t, 4>& counter,
                                        const std::array<std::uint64_t, 2>& key);

// Counter-based random stream.
//
// The key is (root_seed, stream_id); the first two counter words hold a
// 128-bit block counter whose upper word doubles as a "lane" so a single
// stream can be split into independent sub-sequences.  Every output is a pure
// function of (root_seed, stream_id, counter), so results do not depend on
// thread scheduling.  Algorithm identifier: kAlgorithm.
class RngStream {
 public:
  static constexpr const char* kAlgorithm = "philox4x64-10/box-muller/v1";

  RngStream(std::uint64_t root_seed, std::uint64_t stream_id);

  std::uint64_t root_seed() const { return key_[0]; }
  std::uint64_t stream_id() const { return key_[1]; }
  // 128-bit block counter as (low, high).
  std::uint64_t counter_lo() const { return counter_lo_; }
  std::uint64_t counter_hi() const { return counter_hi_; }

  // Same key, counter reset to the start of `lane`.  Lanes never overlap.
  RngStream lane(std::uint64_t lane_id) const;

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal (Box-Muller; the second variate of each pair is cached).
  double normal();

 private:
  void refill();

  std::array<std::uint64_t, 2> key_;
  std::uint64_t counter_lo_ = 0;
  std::uint64_t counter_hi_ = 0;
  std::array<std::uint64_t, 4> block_{};
  int block_pos_ = 4;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Stream i of the family rooted at `seed`.
inline RngStream substream(std::uint64_t seed, std::uint64_t i) { return RngStream(seed, i); }

}  // namespace hkcg
