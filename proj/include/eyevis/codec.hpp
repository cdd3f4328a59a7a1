#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "eyevis/image.hpp"

namespace eyevis {

enum class ImageFormat { kPng, kJpeg };

// Sniffs the magic bytes; anything but PNG or JPEG is rejected.
ImageFormat detect_format(std::span<const std::uint8_t> bytes);

// Throws kInvalidImage for unsupported, truncated or corrupt data.
RasterImage decode_image(std::span<const std::uint8_t> bytes);
RasterImage read_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_image(const RasterImage& img, ImageFormat format,
                                       int jpeg_quality = 95);
// Format chosen from the extension (.png, .jpg, .jpeg).
void write_image(const std::filesystem::path& path, const RasterImage& img);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

std::string_view format_extension(ImageFormat format);

}  // namespace eyevis
