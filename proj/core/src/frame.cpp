#include "wmbench/frame.hpp"

#include <png.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <sstream>

#include "wmbench/error.hpp"

namespace wmbench {

Frame::Frame(int w, int h, int index)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0), frame_index(index) {
  if (w <= 0 || h <= 0) throw ConfigError("frame resolution must be positive");
}

std::uint64_t frame_checksum(const Frame& f) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](std::uint8_t b) {
    h ^= b;
    h *= 1099511628211ull;
  };
  for (int shift = 0; shift < 32; shift += 8) mix(std::uint8_t(f.width >> shift));
  for (int shift = 0; shift < 32; shift += 8) mix(std::uint8_t(f.height >> shift));
  for (auto b : f.pixels) mix(b);
  return h;
}

std::string to_hex(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[std::size_t(i)] = kDigits[v & 0xF];
  return s;
}

namespace {

struct PngWriteBuffer {
  std::vector<std::uint8_t> bytes;
};

void png_write_cb(png_structp png, png_bytep data, png_size_t len) {
  auto* buf = static_cast<PngWriteBuffer*>(png_get_io_ptr(png));
  buf->bytes.insert(buf->bytes.end(), data, data + len);
}

void png_flush_cb(png_structp) {}

struct PngReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void png_read_cb(png_structp png, png_bytep out, png_size_t len) {
  auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cur->offset + len > cur->bytes.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, cur->bytes.data() + cur->offset, len);
  cur->offset += len;
}

[[noreturn]] void png_error_cb(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = msg;
  png_longjmp(png, 1);
}

void png_warning_cb(png_structp, png_const_charp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const Frame& f) {
  if (!f.valid()) throw ConfigError("cannot encode an invalid frame");
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_cb, png_warning_cb);
  if (!png) throw Error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  PngWriteBuffer buf;
  buf.bytes.reserve(f.byte_size() / 2);
  std::vector<png_bytep> rows(std::size_t(f.height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("PNG encode failed: " + err);
  }
  png_set_write_fn(png, &buf, png_write_cb, png_flush_cb);
  png_set_IHDR(png, info, png_uint_32(f.width), png_uint_32(f.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 1);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_SUB);
  for (int y = 0; y < f.height; ++y) rows[std::size_t(y)] = const_cast<png_bytep>(f.at(0, y));
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return std::move(buf.bytes);
}

Frame decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw FormatError("not a PNG stream");
  }
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_cb, png_warning_cb);
  if (!png) throw Error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  PngReadCursor cursor{bytes, 0};
  Frame frame;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("PNG decode failed: " + err);
  }
  png_set_read_fn(png, &cursor, png_read_cb);
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  const auto depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16) png_set_strip_16(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  const auto w = png_get_image_width(png, info);
  const auto h = png_get_image_height(png, info);
  if (png_get_rowbytes(png, info) != std::size_t(w) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("unsupported PNG pixel layout");
  }
  frame.width = int(w);
  frame.height = int(h);
  frame.pixels.assign(std::size_t(w) * h * 3, 0);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = frame.at(0, int(y));
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return frame;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw FormatError("short read from " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

void write_png(const Frame& f, const std::filesystem::path& path) {
  write_file_bytes(path, encode_png(f));
}

Frame read_png(const std::filesystem::path& path) {
  try {
    return decode_png(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_raw(const Frame& f, const std::filesystem::path& path) {
  if (!f.valid()) throw ConfigError("cannot write an invalid frame");
  write_file_bytes(path, f.pixels);
  std::ofstream hdr(path.string() + ".hdr", std::ios::trunc);
  hdr << f.width << ' ' << f.height << '\n';
  if (!hdr) throw Error("write failed: " + path.string() + ".hdr");
}

Frame read_raw(const std::filesystem::path& path) {
  std::ifstream hdr(path.string() + ".hdr");
  int w = 0, h = 0;
  if (!(hdr >> w >> h) || w <= 0 || h <= 0) {
    throw FormatError(path.string() + ".hdr: expected '<width> <height>'");
  }
  Frame f;
  f.width = w;
  f.height = h;
  f.pixels = read_file_bytes(path);
  if (f.pixels.size() != f.byte_size()) {
    throw FormatError(path.string() + ": size does not match header " + std::to_string(w) + "x" +
                      std::to_string(h));
  }
  return f;
}

Frame downscale(const Frame& f, int factor) {
  if (factor < 1) throw ConfigError("downscale factor must be >= 1");
  if (factor == 1) return f;
  if (f.width % factor || f.height % factor) {
    throw ConfigError("frame " + std::to_string(f.width) + "x" + std::to_string(f.height) +
                      " is not divisible by downscale factor " + std::to_string(factor));
  }
  Frame out(f.width / factor, f.height / factor, f.frame_index);
  const int area = factor * factor;
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        int sum = 0;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) sum += f.at(x * factor + dx, y * factor + dy)[c];
        }
        out.at(x, y)[c] = std::uint8_t((sum + area / 2) / area);
      }
    }
  }
  return out;
}

}  // namespace wmbench
