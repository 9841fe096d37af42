#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace wmbench {

struct Resolution {
  int width = 256;
  int height = 192;
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// Row-major 8-bit RGB image. Pixel (x, y) starts at byte 3 * (y * width + x).
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
  int frame_index = 0;

  Frame() = default;
  Frame(int w, int h, int index = 0);

  Resolution resolution() const { return {width, height}; }
  std::size_t byte_size() const { return static_cast<std::size_t>(width) * height * 3; }
  bool valid() const { return width > 0 && height > 0 && pixels.size() == byte_size(); }

  std::uint8_t* at(int x, int y) { return pixels.data() + 3 * (std::size_t(y) * width + x); }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (std::size_t(y) * width + x);
  }

  /// Compares dimensions and pixel bytes; frame_index is metadata only.
  bool same_pixels(const Frame& other) const {
    return width == other.width && height == other.height && pixels == other.pixels;
  }
  friend bool operator==(const Frame&, const Frame&) = default;
};

/// 64-bit FNV-1a over width and height (little-endian u32) then the pixel
/// bytes, used as a per-frame checksum.
std::uint64_t frame_checksum(const Frame& f);
std::string to_hex(std::uint64_t v);

// PNG: 8-bit RGB, non-interlaced, no ancillary chunks (so equal pixels give
// equal files for a given libpng/zlib build).
std::vector<std::uint8_t> encode_png(const Frame& f);
Frame decode_png(std::span<const std::uint8_t> bytes);
void write_png(const Frame& f, const std::filesystem::path& path);
Frame read_png(const std::filesystem::path& path);

// Raw blob: `<path>` holds width*height*3 bytes; `<path>.hdr` holds the
// single ASCII line "<width> <height>\n".
void write_raw(const Frame& f, const std::filesystem::path& path);
Frame read_raw(const std::filesystem::path& path);

/// Area-average downscale by an integer factor (both dimensions must divide).
Frame downscale(const Frame& f, int factor);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace wmbench
