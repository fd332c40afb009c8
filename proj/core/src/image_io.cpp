#include "flowforge/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace flowforge {

namespace {

float from_byte(unsigned char b) { return static_cast<float>(b) / 255.0f; }

unsigned char to_byte(float v) {
  const float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return static_cast<unsigned char>(std::lround(c * 255.0f));
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Decodes any PNG into packed 8-bit RGB.
void read_png_rgb8(const std::filesystem::path& path, int& w, int& h,
                   std::vector<unsigned char>& rgb) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw MissingFileError("cannot open image: " + path.string());

  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
    throw IoError("not a PNG file: " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  w = static_cast<int>(png_get_image_width(png, info));
  h = static_cast<int>(png_get_image_height(png, info));
  const png_byte color_type = png_get_color_type(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  rgb.resize(static_cast<std::size_t>(w) * h * 3);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[y] = rgb.data() + static_cast<std::size_t>(y) * w * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
}

void write_png_bytes(const std::filesystem::path& path, int w, int h, int channels,
                     const std::vector<unsigned char>& bytes) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw IoError("cannot write image: " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_compression_level(png, 6);  // fixed settings keep bytes reproducible
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    rows[y] = const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * w * channels);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

bool has_png_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char magic[8] = {};
  in.read(reinterpret_cast<char*>(magic), 8);
  return in.gcount() == 8 && png_sig_cmp(magic, 0, 8) == 0;
}

// Binary PPM (P6) / PGM (P5), 8-bit.
void read_pnm_rgb8(const std::filesystem::path& path, int& w, int& h,
                   std::vector<unsigned char>& rgb) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError("cannot open image: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P6" && magic != "P5") throw IoError("unsupported image format: " + path.string());
  auto next_int = [&in, &path]() {
    // skip whitespace and '#' comments
    for (;;) {
      const int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    int v = -1;
    in >> v;
    if (v < 0) throw IoError("malformed PNM header: " + path.string());
    return v;
  };
  w = next_int();
  h = next_int();
  const int maxval = next_int();
  if (maxval != 255) throw IoError("only 8-bit PNM supported: " + path.string());
  in.get();  // single whitespace after header

  const bool gray = magic == "P5";
  const std::size_t n = static_cast<std::size_t>(w) * h * (gray ? 1 : 3);
  std::vector<unsigned char> raw(n);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw TruncatedFileError("truncated PNM file: " + path.string());

  rgb.resize(static_cast<std::size_t>(w) * h * 3);
  if (gray) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) {
      rgb[i * 3] = rgb[i * 3 + 1] = rgb[i * 3 + 2] = raw[i];
    }
  } else {
    rgb = std::move(raw);
  }
}

std::vector<unsigned char> decode_any(const std::filesystem::path& path, int& w, int& h) {
  std::vector<unsigned char> rgb;
  if (has_png_magic(path)) {
    read_png_rgb8(path, w, h, rgb);
  } else {
    read_pnm_rgb8(path, w, h, rgb);
  }
  return rgb;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  int w = 0, h = 0;
  const std::vector<unsigned char> rgb = decode_any(path, w, h);
  Image img(w, h);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = from_byte(rgb[i]);
  return img;
}

AlphaMask read_mask(const std::filesystem::path& path) {
  int w = 0, h = 0;
  const std::vector<unsigned char> rgb = decode_any(path, w, h);
  AlphaMask m(w, h);
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    // Rec. 601 luminance
    m.data[i] = 0.299f * from_byte(rgb[i * 3]) + 0.587f * from_byte(rgb[i * 3 + 1]) +
                0.114f * from_byte(rgb[i * 3 + 2]);
  }
  return m;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  std::vector<unsigned char> bytes(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) bytes[i] = to_byte(img.data[i]);
  write_png_bytes(path, img.width, img.height, 3, bytes);
}

void write_png(const std::filesystem::path& path, const AlphaMask& mask) {
  std::vector<unsigned char> bytes(mask.data.size());
  for (std::size_t i = 0; i < mask.data.size(); ++i) bytes[i] = to_byte(mask.data[i]);
  write_png_bytes(path, mask.width, mask.height, 1, bytes);
}

Image resize(const Image& img, int w, int h) {
  if (w < 1 || h < 1) throw InvalidParamsError("resize target must be at least 1x1");
  if (w == img.width && h == img.height) return img;
  Image out(w, h);
  const double sx = static_cast<double>(img.width) / w;
  const double sy = static_cast<double>(img.height) / h;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto rgb = bilinear_sample(img, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = rgb[c];
    }
  }
  return out;
}

}  // namespace flowforge
