#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <cstdio>
#include <memory>

#include "io.hpp"

namespace rsu::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors by longjmp; the message is parked here and turned
// into an exception once control is back in C++ frames.
thread_local char g_png_message[256];

[[noreturn]] void png_fail(png_structp png, png_const_charp message) {
  std::snprintf(g_png_message, sizeof g_png_message, "png: %s", message);
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

}  // namespace

Frame read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw Error(ErrorCode::io, "cannot open " + path.string());
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw Error(ErrorCode::format, path.string() + " is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::io, "libpng allocation failed");
  }
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  std::vector<unsigned char> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) throw Error(ErrorCode::format, g_png_message);

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // native little-endian u16 rows
  png_read_update_info(png, info);

  const int H = static_cast<int>(png_get_image_height(png, info));
  const int W = static_cast<int>(png_get_image_width(png, info));
  const int C = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  if (C != 1 && C != 3) throw Error(ErrorCode::format, "unsupported PNG channel layout");

  const size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * H);
  rows.resize(H);
  for (int y = 0; y < H; ++y) rows[y] = buffer.data() + y * stride;
  png_read_image(png, rows.data());

  Frame frame(H, W, C);
  const double peak = out_depth == 16 ? 65535.0 : 255.0;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int c = 0; c < C; ++c) {
        const size_t i = static_cast<size_t>(x) * C + c;
        double v;
        if (out_depth == 16) {
          std::uint16_t u;
          std::memcpy(&u, rows[y] + 2 * i, 2);
          v = u;
        } else {
          v = rows[y][i];
        }
        frame(y, x, c) = v / peak;
      }
  return frame;
}

void write_png(const Frame& frame, const std::filesystem::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw Error(ErrorCode::argument, "PNG bit depth must be 8 or 16");
  const int C = frame.channels();
  if (C != 1 && C != 3) throw Error(ErrorCode::shape, "PNG output needs 1 or 3 channels");
  if (frame.empty()) throw Error(ErrorCode::shape, "cannot write an empty frame");
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw Error(ErrorCode::io, "cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::io, "libpng allocation failed");
  }
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  const size_t bytes = static_cast<size_t>(bit_depth / 8);
  std::vector<unsigned char> row(static_cast<size_t>(frame.width()) * C * bytes);
  if (setjmp(png_jmpbuf(png))) throw Error(ErrorCode::io, g_png_message);

  png_init_io(png, file.get());
  // Pinned encoder settings keep the output byte-stable.
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_set_IHDR(png, info, frame.width(), frame.height(), bit_depth,
               C == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const double peak = bit_depth == 16 ? 65535.0 : 255.0;
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x)
      for (int c = 0; c < C; ++c) {
        const double v = std::clamp(frame(y, x, c), 0.0, 1.0);
        const auto q = static_cast<unsigned>(std::lround(v * peak));
        const size_t i = (static_cast<size_t>(x) * C + c) * bytes;
        if (bytes == 2) {
          row[i] = static_cast<unsigned char>(q >> 8);
          row[i + 1] = static_cast<unsigned char>(q & 0xFF);
        } else {
          row[i] = static_cast<unsigned char>(q);
        }
      }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  if (std::fflush(file.get()) != 0) throw Error(ErrorCode::io, "short write to " + path.string());
}

}  // namespace rsu::io
