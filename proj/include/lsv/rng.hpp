#pragma once

#include <array>
#include <bit>
#include <cstdint>

namespace lsv {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A stream is
// identified by (seed, stream id, batch index); draws inside a stream walk the
// low counter words. Streams never share state, so a batch produces the same
// numbers no matter which worker runs it.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t batch) {
    const std::uint64_t k = splitmix64(seed ^ splitmix64(stream_id + 0x5851F42D4C957F2Dull));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    ctr_ = {0u, 0u, static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(batch >> 32)};
  }

  std::uint64_t next_u64() {
    if (pos_ == 2) refill();
    const std::uint64_t v = (static_cast<std::uint64_t>(out_[2 * pos_ + 1]) << 32) | out_[2 * pos_];
    ++pos_;
    return v;
  }

  // Uniform on (0, 1): odd multiples of 2^-53, never 0 or 1.
  double uniform_open() {
    const std::uint64_t m = next_u64() >> 12;
    return (2.0 * static_cast<double>(m) + 1.0) * 0x1p-53;
  }

 private:
  void refill() {
    out_ = Philox4x32::block(ctr_, key_);
    if (++ctr_[0] == 0) ++ctr_[1];
    pos_ = 0;
  }

  Philox4x32::Key key_{};
  Philox4x32::Counter ctr_{};
  Philox4x32::Counter out_{};
  int pos_ = 2;
};

// Sets the lowest mantissa bit. Forces the doubling map to need at least 53
// steps to reach the fixed points exactly; a one-ulp shift in any start point.
inline double force_odd_mantissa(double x) {
  return std::bit_cast<double>(std::bit_cast<std::uint64_t>(x) | 1ull);
}

}  // namespace lsv
