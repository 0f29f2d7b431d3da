// Copyright 2026 The Scene Probe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "probe/png_io.hpp"

#include <png.h>

#include <cstring>
#include <fstream>

#include "probe/error.hpp"

namespace probe {
namespace {

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes.size()) {
    png_error(png, "truncated PNG stream");
  }
  std::memcpy(out, cursor->bytes.data() + cursor->offset, length);
  cursor->offset += length;
}

void write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_callback(png_structp) {}

[[noreturn]] void error_callback(png_structp, png_const_charp message) {
  throw Error(ErrorCode::kFormat, std::string("png: ") + message);
}

void warning_callback(png_structp, png_const_charp) {}

// Returns interleaved pixels with `channels` (3 or 4) per pixel.
std::vector<std::uint8_t> decode(std::span<const std::uint8_t> bytes,
                                 int channels, int& width, int& height) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::kFormat, "png: bad signature");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           error_callback, warning_callback);
  if (png == nullptr) throw Error(ErrorCode::kIo, "png: out of memory");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};

  ReadCursor cursor{bytes, 0};
  png_set_read_fn(png, &cursor, read_callback);
  png_read_info(png, info);

  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (color_type == PNG_COLOR_TYPE_GRAY ||
      color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  const bool has_trns = png_get_valid(png, info, PNG_INFO_tRNS) != 0;
  if (channels == 4) {
    if (has_trns) png_set_tRNS_to_alpha(png);
    png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
  } else {
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);

  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  if (png_get_rowbytes(png, info) != stride) {
    throw Error(ErrorCode::kFormat, "png: unexpected row layout");
  }
  std::vector<std::uint8_t> pixels(stride * height);
  std::vector<png_bytep> rows(height);
  for (int r = 0; r < height; ++r) rows[r] = pixels.data() + stride * r;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  return pixels;
}

std::vector<std::uint8_t> encode(const std::uint8_t* pixels, int width,
                                 int height, int channels) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "png: empty image");
  }
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            error_callback, warning_callback);
  if (png == nullptr) throw Error(ErrorCode::kIo, "png: out of memory");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* png;
    png_infop* info;
    ~Guard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};

  png_set_write_fn(png, &out, write_callback, flush_callback);
  png_set_compression_level(png, 1);
  png_set_filter(png, 0, PNG_FILTER_SUB);
  png_set_IHDR(png, info, width, height, 8,
               channels == 4 ? PNG_COLOR_TYPE_RGBA : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int r = 0; r < height; ++r) {
    png_write_row(png, const_cast<png_bytep>(pixels + stride * r));
  }
  png_write_end(png, nullptr);
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
  return encode(image.data(), image.width(), image.height(), 3);
}

std::vector<std::uint8_t> encode_png(const RgbaImage& image) {
  return encode(image.pixels.data(), image.width, image.height, 4);
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels = decode(bytes, 3, width, height);
  Image image(width, height);
  std::memcpy(image.data(), pixels.data(), pixels.size());
  return image;
}

RgbaImage decode_png_rgba(std::span<const std::uint8_t> bytes) {
  RgbaImage image;
  image.pixels = decode(bytes, 4, image.width, image.height);
  return image;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

Image read_png(const std::filesystem::path& path) {
  return decode_png(read_file_bytes(path));
}

RgbaImage read_png_rgba(const std::filesystem::path& path) {
  return decode_png_rgba(read_file_bytes(path));
}

void write_png(const std::filesystem::path& path, const Image& image) {
  write_file_bytes(path, encode_png(image));
}

void write_png(const std::filesystem::path& path, const RgbaImage& image) {
  write_file_bytes(path, encode_png(image));
}

}  // namespace probe
