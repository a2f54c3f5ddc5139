#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

#include "procshade/core/error.hpp"
#include "procshade/core/hash.hpp"

namespace procshade {

// Philox4x64-10 block function (Salmon et al., Random123). Counter-based:
// the output is a pure function of (counter, key), so random streams can be
// indexed and split without shared state. Matches numpy's Philox bit-exactly
// (see tests for frozen reference vectors).
struct Philox4x64 {
  static constexpr std::uint64_t kM0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kM1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kW0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kW1 = 0xBB67AE8584CAA73BULL;

  static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> ctr,
                                            std::array<std::uint64_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const __uint128_t p0 = static_cast<__uint128_t>(kM0) * ctr[0];
      const __uint128_t p1 = static_cast<__uint128_t>(kM1) * ctr[2];
      const std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64);
      const std::uint64_t lo0 = static_cast<std::uint64_t>(p0);
      const std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64);
      const std::uint64_t lo1 = static_cast<std::uint64_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

// Splittable deterministic RNG. A stream is identified by a 128-bit key;
// `derive` produces an independent child stream, so parallel consumers can be
// keyed by (global seed, shader id, frame index) without coordination.
class Rng {
 public:
  Rng() = default;
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : key_{seed, stream} {}

  static Rng keyed(std::uint64_t seed, std::string_view label) {
    return Rng(seed, fnv1a64(label));
  }

  Rng derive(std::uint64_t salt) const {
    const auto out = Philox4x64::block({salt, 0x70726f6373686164ULL, 0, 0}, key_);
    Rng child;
    child.key_ = {out[0], out[1]};
    return child;
  }

  Rng derive(std::string_view label) const { return derive(fnv1a64(label)); }

  std::uint64_t next_u64() {
    if (buf_pos_ == 4) {
      buf_ = Philox4x64::block(ctr_, key_);
      buf_pos_ = 0;
      if (++ctr_[0] == 0 && ++ctr_[1] == 0 && ++ctr_[2] == 0) ++ctr_[3];
    }
    return buf_[buf_pos_++];
  }

  std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64() >> 32); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) raise(Errc::BadParameter, "Rng::below(0)");
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  // Standard normal via Box-Muller; both values are consumed to keep the
  // stream position a pure function of the number of calls made so far.
  double normal() {
    if (have_cached_normal_) {
      have_cached_normal_ = false;
      return cached_normal_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_normal_ = r * std::sin(a);
    have_cached_normal_ = true;
    return r * std::cos(a);
  }

  // Marsaglia-Tsang for alpha >= 1, with the standard power boost below 1.
  double gamma(double alpha) {
    if (!(alpha > 0.0)) raise(Errc::BadParameter, "gamma requires alpha > 0");
    if (alpha < 1.0) {
      const double u = 1.0 - uniform01();  // (0, 1]
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = 1.0 - uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::array<std::uint64_t, 2> key_{};
  std::array<std::uint64_t, 4> ctr_{};
  std::array<std::uint64_t, 4> buf_{};
  int buf_pos_ = 4;
  double cached_normal_ = 0.0;
  bool have_cached_normal_ = false;
};

}  // namespace procshade
