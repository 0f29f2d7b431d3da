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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "probe/image.hpp"

namespace probe {

// PNG codec. Encoding uses fixed zlib settings and writes no time or text
// chunks, so identical rasters always produce identical bytes.

std::vector<std::uint8_t> encode_png(const Image& image);
std::vector<std::uint8_t> encode_png(const RgbaImage& image);

/// Decodes any PNG colour type to 8-bit RGB (alpha is dropped).
Image decode_png(std::span<const std::uint8_t> bytes);
/// Decodes any PNG colour type to 8-bit RGBA (opaque if no alpha).
RgbaImage decode_png_rgba(std::span<const std::uint8_t> bytes);

Image read_png(const std::filesystem::path& path);
RgbaImage read_png_rgba(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);
void write_png(const std::filesystem::path& path, const RgbaImage& image);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

}  // namespace probe
