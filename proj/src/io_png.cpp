#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "orrecon/io.hpp"

namespace orrecon::io {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

[[noreturn]] void fail(const std::filesystem::path& path,
                       const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;

  PngWriter() {
    png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                  nullptr);
    if (png) info = png_create_info_struct(png);
    if (!png || !info) throw std::runtime_error("libpng allocation failed");
  }
  ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;

  PngReader() {
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                 nullptr);
    if (png) info = png_create_info_struct(png);
    if (!png || !info) throw std::runtime_error("libpng allocation failed");
  }
  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

void write_gray(const std::filesystem::path& path, int width, int height,
                int bit_depth, std::vector<png_bytep>& rows) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) fail(path, "cannot open for writing");
  PngWriter w;
  if (setjmp(png_jmpbuf(w.png))) fail(path, "libpng write error");
  png_init_io(w.png, f.get());
  png_set_IHDR(w.png, w.info, width, height, bit_depth,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  if (bit_depth == 16) png_set_swap(w.png);  // rows are host little-endian
  png_write_image(w.png, rows.data());
  png_write_end(w.png, nullptr);
}

void read_header(const std::filesystem::path& path, PngReader& r, FILE* f,
                 png_uint_32* width, png_uint_32* height, int* bit_depth,
                 int* color_type) {
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f) != 8 || png_sig_cmp(sig, 0, 8)) {
    fail(path, "not a PNG file");
  }
  png_init_io(r.png, f);
  png_set_sig_bytes(r.png, 8);
  png_read_info(r.png, r.info);
  png_get_IHDR(r.png, r.info, width, height, bit_depth, color_type, nullptr,
               nullptr, nullptr);
}

}  // namespace

void write_depth_png(const std::filesystem::path& path,
                     const DepthImage& depth, double depth_scale) {
  if (depth.width <= 0 || depth.height <= 0) {
    throw std::invalid_argument("write_depth_png: empty image");
  }
  std::vector<uint16_t> raw(depth.mm.size());
  for (size_t i = 0; i < depth.mm.size(); ++i) {
    const double v = std::llround(double(depth.mm[i]) * depth_scale);
    raw[i] = uint16_t(std::clamp(v, 0.0, 65535.0));
  }
  std::vector<png_bytep> rows(depth.height);
  for (int y = 0; y < depth.height; ++y) {
    rows[y] = reinterpret_cast<png_bytep>(raw.data() + size_t(y) * depth.width);
  }
  write_gray(path, depth.width, depth.height, 16, rows);
}

DepthImage read_depth_png(const std::filesystem::path& path,
                          double depth_scale) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) fail(path, "cannot open");
  PngReader r;
  if (setjmp(png_jmpbuf(r.png))) fail(path, "libpng read error");
  png_uint_32 width, height;
  int bit_depth, color_type;
  read_header(path, r, f.get(), &width, &height, &bit_depth, &color_type);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY) {
    fail(path, "expected 16-bit grayscale depth PNG");
  }
  png_set_swap(r.png);
  DepthImage depth{int(width), int(height)};
  std::vector<uint16_t> raw(size_t(width) * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = reinterpret_cast<png_bytep>(raw.data() + size_t(y) * width);
  }
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  for (size_t i = 0; i < raw.size(); ++i) {
    depth.mm[i] = double(raw[i]) / depth_scale;
  }
  return depth;
}

void write_mask_png(const std::filesystem::path& path, const LabelMask& mask) {
  if (mask.width <= 0 || mask.height <= 0) {
    throw std::invalid_argument("write_mask_png: empty mask");
  }
  std::vector<png_bytep> rows(mask.height);
  for (int y = 0; y < mask.height; ++y) {
    rows[y] = const_cast<png_bytep>(mask.labels.data() +
                                    size_t(y) * mask.width);
  }
  write_gray(path, mask.width, mask.height, 8, rows);
}

LabelMask read_mask_png(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) fail(path, "cannot open");
  PngReader r;
  if (setjmp(png_jmpbuf(r.png))) fail(path, "libpng read error");
  png_uint_32 width, height;
  int bit_depth, color_type;
  read_header(path, r, f.get(), &width, &height, &bit_depth, &color_type);
  if (bit_depth != 8 || color_type != PNG_COLOR_TYPE_GRAY) {
    fail(path, "expected 8-bit grayscale mask PNG");
  }
  LabelMask mask{int(width), int(height)};
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = mask.labels.data() + size_t(y) * width;
  }
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return mask;
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& image) {
  if (image.width <= 0 || image.height <= 0) {
    throw std::invalid_argument("write_rgb_png: empty image");
  }
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) fail(path, "cannot open for writing");
  PngWriter w;
  if (setjmp(png_jmpbuf(w.png))) fail(path, "libpng write error");
  png_init_io(w.png, f.get());
  png_set_IHDR(w.png, w.info, image.width, image.height, 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y) {
    rows[y] = const_cast<png_bytep>(image.rgb.data() +
                                    size_t(y) * image.width * 3);
  }
  png_write_image(w.png, rows.data());
  png_write_end(w.png, nullptr);
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) fail(path, "cannot open");
  PngReader r;
  if (setjmp(png_jmpbuf(r.png))) fail(path, "libpng read error");
  png_uint_32 width, height;
  int bit_depth, color_type;
  read_header(path, r, f.get(), &width, &height, &bit_depth, &color_type);
  if (bit_depth != 8 || color_type != PNG_COLOR_TYPE_RGB) {
    fail(path, "expected 8-bit RGB PNG");
  }
  RgbImage image{int(width), int(height)};
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = image.rgb.data() + size_t(y) * width * 3;
  }
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return image;
}

}  // namespace orrecon::io
