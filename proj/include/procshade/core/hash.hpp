#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace procshade {

using Sha256Digest = std::array<std::uint8_t, 32>;

// Project-wide 256-bit content hash. The algorithm name is recorded in the
// manifest header so fingerprints are comparable across runs.
inline constexpr const char* kHashAlgorithm = "sha256";

inline Sha256Digest sha256(std::span<const std::uint8_t> data) {
  Sha256Digest out{};
  unsigned int out_len = 0;
  EVP_Digest(data.data(), data.size(), out.data(), &out_len, EVP_sha256(), nullptr);
  return out;
}

inline Sha256Digest sha256(std::string_view text) {
  return sha256(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline std::string to_hex(const Sha256Digest& d) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(d.size() * 2);
  for (std::uint8_t b : d) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 0xF]);
  }
  return s;
}

inline std::string sha256_hex(std::string_view text) { return to_hex(sha256(text)); }

inline std::string sha256_hex(std::span<const std::uint8_t> data) { return to_hex(sha256(data)); }

// FNV-1a, used to fold string labels into RNG keys. Not a content hash.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace procshade
