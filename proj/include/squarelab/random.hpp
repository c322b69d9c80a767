// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// A stream is identified by a 64-bit key and a 64-bit stream id; block b of
// stream s is the encryption of the counter (s_lo, s_hi, b_lo, b_hi). Two
// streams never share a counter, so per-trial streams are independent of
// how trials are distributed over workers.

#pragma once

#include <array>
#include <cstdint>

namespace squarelab {

class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr const char* kName = "philox4x32-10";

  static Block encrypt(Block counter, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * counter[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * counter[2];
      counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return counter;
  }

  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

  std::uint32_t next_u32() {
    if (used_ == 4) {
      buffer_ = encrypt({static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
                         static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32)},
                        key_);
      ++block_;
      used_ = 0;
    }
    return buffer_[used_++];
  }

  /// Uniform on (0, 1) with 32 bits of resolution.
  double uniform() { return (static_cast<double>(next_u32()) + 0.5) * 0x1p-32; }

  /// Uniform index in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = (std::uint64_t{1} << 32) - ((std::uint64_t{1} << 32) % n);
    while (true) {
      const std::uint64_t x = next_u32();
      if (x < limit) return x % n;
    }
  }

 private:
  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  int used_ = 4;
};

}  // namespace squarelab
