#pragma once

// Counter-based Philox4x32-10 and a standard-normal stream on top of it.
// A stream is keyed by the master seed and addressed by (stream id, draw index),
// so any path can be regenerated independently and prefixes are stable.

#include <boost/math/special_functions/erf.hpp>

#include <array>
#include <cstdint>

namespace avgsfde::rng {

struct Philox4x32 {
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }
};

// Uniform on the open interval (0, 1) with 53 random bits.
inline double to_unit(std::uint64_t bits) { return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52; }

inline double normal_quantile(double u) {
  using namespace boost::math::policies;
  return -1.4142135623730951 * boost::math::erfc_inv(2.0 * u, make_policy(promote_double<false>()));
}

class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_lo_(static_cast<std::uint32_t>(stream)),
        stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

  // Normal number `index` of this stream, independent of call order.
  double at(std::uint64_t index) const {
    const auto blk = block(index >> 1);
    const std::uint64_t bits = (index & 1) ? (std::uint64_t{blk[2]} << 32 | blk[3]) : (std::uint64_t{blk[0]} << 32 | blk[1]);
    return normal_quantile(to_unit(bits));
  }

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      ++index_;
      return spare_;
    }
    const auto blk = block(index_ >> 1);
    spare_ = normal_quantile(to_unit(std::uint64_t{blk[2]} << 32 | blk[3]));
    have_spare_ = true;
    ++index_;
    return normal_quantile(to_unit(std::uint64_t{blk[0]} << 32 | blk[1]));
  }

  std::uint64_t position() const { return index_; }

 private:
  Philox4x32::Block block(std::uint64_t n) const {
    return Philox4x32::generate(
        {static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n >> 32), stream_lo_, stream_hi_}, key_);
  }

  Philox4x32::Key key_;
  std::uint32_t stream_lo_, stream_hi_;
  std::uint64_t index_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace avgsfde::rng
