#pragma once

#include <jpeglib.h>

#include <csetjmp>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <vector>

#include "procshade/core/error.hpp"
#include "procshade/core/image.hpp"

namespace procshade {

inline constexpr int kDefaultJpegQuality = 90;

namespace detail {

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  jmp_buf jump;
  char msg[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit_fn(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->msg);
  longjmp(err->jump, 1);
}

}  // namespace detail

// Baseline JPEG encoding of an RGB8 image. Deterministic for a fixed libjpeg
// build and settings; the quality used is recorded in dataset manifests.
inline std::vector<std::uint8_t> encode_jpeg(const Image& img, int quality = kDefaultJpegQuality) {
  if (!img.valid()) raise(Errc::InvalidArgument, "encode_jpeg: invalid image");
  if (quality < 1 || quality > 100) raise(Errc::BadParameter, "jpeg quality must be in [1,100]");

  jpeg_compress_struct cinfo;
  detail::JpegErrorMgr jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = detail::jpeg_error_exit_fn;

  unsigned char* out_buf = nullptr;
  unsigned long out_size = 0;

  if (setjmp(jerr.jump)) {
    jpeg_destroy_compress(&cinfo);
    if (out_buf) free(out_buf);
    raise(Errc::IoError, std::string("jpeg encode failed: ") + jerr.msg);
  }

  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &out_buf, &out_size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE /* force baseline */);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    const JSAMPLE* row = img.pixels.data() + static_cast<std::size_t>(cinfo.next_scanline) * img.width * 3;
    JSAMPROW rows[1] = {const_cast<JSAMPROW>(row)};
    jpeg_write_scanlines(&cinfo, rows, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);

  std::vector<std::uint8_t> bytes(out_buf, out_buf + out_size);
  free(out_buf);
  return bytes;
}

inline Image decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  detail::JpegErrorMgr jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = detail::jpeg_error_exit_fn;

  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    raise(Errc::IoError, std::string("jpeg decode failed: ") + jerr.msg);
  }

  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);

  Image img;
  img.width = static_cast<int>(cinfo.output_width);
  img.height = static_cast<int>(cinfo.output_height);
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW rows[1] = {img.pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * img.width * 3};
    jpeg_read_scanlines(&cinfo, rows, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

}  // namespace procshade
