#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "procshade/core/error.hpp"
#include "procshade/core/hash.hpp"

namespace procshade {

// Rendered RGB8 raster. Rows are stored top-to-bottom (row 0 is the top of
// the image as displayed); GL-style readback is flipped before storage.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel
  std::string shader_id;
  double t = 0.0;

  static Image solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    Image img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i + 2 < img.pixels.size(); i += 3) {
      img.pixels[i] = r;
      img.pixels[i + 1] = g;
      img.pixels[i + 2] = b;
    }
    return img;
  }

  std::size_t byte_size() const { return pixels.size(); }

  bool valid() const {
    return width >= 1 && height >= 1 &&
           pixels.size() == static_cast<std::size_t>(width) * height * 3;
  }

  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
};

using ImageBatch = std::vector<Image>;

// Raw frame dump: width, height, frame count as little-endian uint32, then
// frames as contiguous RGB8.
inline void write_raw_dump(const std::filesystem::path& path, std::span<const Image> frames) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::IoError, "cannot open for writing: " + path.string());
  std::uint32_t w = frames.empty() ? 0 : static_cast<std::uint32_t>(frames[0].width);
  std::uint32_t h = frames.empty() ? 0 : static_cast<std::uint32_t>(frames[0].height);
  std::uint32_t n = static_cast<std::uint32_t>(frames.size());
  auto put_u32 = [&](std::uint32_t v) {
    std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                         static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  put_u32(w);
  put_u32(h);
  put_u32(n);
  for (const Image& f : frames) {
    if (f.width != static_cast<int>(w) || f.height != static_cast<int>(h))
      raise(Errc::DimensionMismatch, "raw dump frames must share one resolution");
    out.write(reinterpret_cast<const char*>(f.pixels.data()),
              static_cast<std::streamsize>(f.pixels.size()));
  }
  if (!out) raise(Errc::IoError, "short write: " + path.string());
}

inline ImageBatch read_raw_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot open: " + path.string());
  auto get_u32 = [&]() {
    std::uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  };
  const std::uint32_t w = get_u32();
  const std::uint32_t h = get_u32();
  const std::uint32_t n = get_u32();
  if (!in) raise(Errc::IoError, "truncated raw dump header: " + path.string());
  ImageBatch batch;
  batch.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Image img;
    img.width = static_cast<int>(w);
    img.height = static_cast<int>(h);
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!in) raise(Errc::IoError, "truncated raw dump frame: " + path.string());
    batch.push_back(std::move(img));
  }
  return batch;
}

inline std::string image_digest_hex(const Image& img) {
  return sha256_hex(std::span<const std::uint8_t>(img.pixels.data(), img.pixels.size()));
}

}  // namespace procshade
