#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace hrd {

// Philox4x32-10 counter-based generator. Streams are addressed by
// (key, stream id, block offset), so any path's random sequence can be
// regenerated in isolation and in any order. Constants and word layout
// follow the Random123 reference implementation.
class Philox4x32 {
public:
  using Block = std::array<std::uint32_t, 4>;

  Philox4x32(std::uint64_t key, std::uint64_t stream, std::uint64_t offset = 0) noexcept {
    key_[0] = static_cast<std::uint32_t>(key);
    key_[1] = static_cast<std::uint32_t>(key >> 32);
    counter_[0] = static_cast<std::uint32_t>(offset);
    counter_[1] = static_cast<std::uint32_t>(offset >> 32);
    counter_[2] = static_cast<std::uint32_t>(stream);
    counter_[3] = static_cast<std::uint32_t>(stream >> 32);
  }

  // Encrypts the current counter and advances it by one block.
  Block next_block() noexcept {
    Block ctr = counter_;
    std::uint32_t k0 = key_[0];
    std::uint32_t k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, k0, k1);
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    if (++counter_[0] == 0 && ++counter_[1] == 0 && ++counter_[2] == 0) ++counter_[3];
    return ctr;
  }

  static Block bijection(Block ctr, std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key[0], key[1]);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

private:
  static constexpr std::uint32_t kMult0 = 0xD2511F53u;
  static constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static Block single_round(const Block& ctr, std::uint32_t k0, std::uint32_t k1) noexcept {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * ctr[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
            static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
            static_cast<std::uint32_t>(p0)};
  }

  Block counter_{};
  std::array<std::uint32_t, 2> key_{};
};

// Distribution layer over one Philox stream. One instance per (seed, path)
// pair; droppings from a stream never depend on other streams, which is what
// makes ensemble generation order-independent under any parallel schedule.
class PathRng {
public:
  PathRng(std::uint64_t seed, std::uint64_t stream) noexcept : gen_(seed, stream) {}

  std::uint32_t next_u32() noexcept {
    if (pos_ == 4) {
      block_ = gen_.next_block();
      pos_ = 0;
    }
    return block_[pos_++];
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0,1); safe under log().
  double uniform_pos() noexcept {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  // Marsaglia polar method; caches the second variate.
  double normal() noexcept {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * f;
    has_cached_ = true;
    return u * f;
  }

  double exponential(double rate) noexcept { return -std::log(uniform_pos()) / rate; }

  // Standard symmetric alpha-stable variate, normalized so that alpha = 2
  // yields N(0,1); characteristic function exp(-|t|^alpha / 2). Uses the
  // Chambers-Mallows-Stuck transform (symmetric case, zero skew).
  double stable(double alpha) noexcept {
    const double v = std::numbers::pi * (uniform_pos() - 0.5);
    if (alpha == 1.0) return 0.5 * std::tan(v);
    const double w = exponential(1.0);
    const double t = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha);
    const double raw = t * std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
    return raw / std::pow(2.0, 1.0 / alpha);
  }

private:
  Philox4x32 gen_;
  Philox4x32::Block block_{};
  int pos_ = 4;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Stable mixing for deriving sub-seeds (e.g. the smoothing stream of an
// ensemble seed). splitmix64 finalizer.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace hrd
