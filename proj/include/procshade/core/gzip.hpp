#pragma once

#include <zlib.h>

#include <cstdint>
#include <span>
#include <vector>

#include "procshade/core/error.hpp"

namespace procshade {

// Size of `data` compressed to the gzip format (RFC 1952) at the default
// level. Used as an image-entropy proxy; each frame is compressed on its own.
inline std::size_t gzip_compressed_size(std::span<const std::uint8_t> data,
                                        int level = Z_DEFAULT_COMPRESSION) {
  z_stream zs{};
  if (deflateInit2(&zs, level, Z_DEFLATED, 15 + 16 /* gzip wrapper */, 8,
                   Z_DEFAULT_STRATEGY) != Z_OK)
    raise(Errc::IoError, "deflateInit2 failed");

  std::size_t total = 0;
  std::vector<std::uint8_t> out(1 << 16);
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  int rc = Z_OK;
  do {
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    rc = deflate(&zs, Z_FINISH);
    if (rc == Z_STREAM_ERROR) {
      deflateEnd(&zs);
      raise(Errc::IoError, "deflate failed");
    }
    total += out.size() - zs.avail_out;
  } while (rc != Z_STREAM_END);
  deflateEnd(&zs);
  return total;
}

}  // namespace procshade
