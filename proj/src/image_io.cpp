#include "edgevo/image_io.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>

#include <png.h>

namespace edgevo {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Raw decoded image: 1 or 3 channels, 8 or 16 bits.
struct RawImage {
  int width = 0, height = 0, channels = 0, bit_depth = 0;
  std::vector<uint16_t> data;  // channel-interleaved
};

RawImage read_png(const std::string& path, std::FILE* f) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("png: allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("png: allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("png: failed to decode " + path);
  }
  png_init_io(png, f);
  png_read_info(png, info);

  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  RawImage img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.bit_depth = png_get_bit_depth(png, info);
  img.channels = png_get_channels(png, info);

  const size_t row_bytes = png_get_rowbytes(png, info);
  std::vector<uint8_t> bytes(row_bytes * img.height);
  std::vector<png_bytep> rows(img.height);
  for (int r = 0; r < img.height; ++r) rows[r] = bytes.data() + row_bytes * r;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  const size_t n = static_cast<size_t>(img.width) * img.height * img.channels;
  img.data.resize(n);
  if (img.bit_depth == 16) {
    for (size_t i = 0; i < n; ++i)  // PNG stores 16-bit big-endian
      img.data[i] = static_cast<uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1]);
  } else {
    for (size_t i = 0; i < n; ++i) img.data[i] = bytes[i];
  }
  return img;
}

RawImage read_pnm(const std::string& path, std::FILE* f) {
  std::fclose(f);  // reopen through streams for the ASCII header
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6") throw DataError("pnm: unsupported format in " + path);

  auto next_token = [&]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw DataError("pnm: truncated header in " + path);
  };

  RawImage img;
  img.width = std::stoi(next_token());
  img.height = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  img.channels = magic == "P6" ? 3 : 1;
  img.bit_depth = maxval > 255 ? 16 : 8;
  in.get();  // single whitespace before the raster

  const size_t n = static_cast<size_t>(img.width) * img.height * img.channels;
  img.data.resize(n);
  if (img.bit_depth == 16) {
    std::vector<uint8_t> bytes(2 * n);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw DataError("pnm: truncated raster in " + path);
    for (size_t i = 0; i < n; ++i)
      img.data[i] = static_cast<uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1]);
  } else {
    std::vector<uint8_t> bytes(n);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw DataError("pnm: truncated raster in " + path);
    for (size_t i = 0; i < n; ++i) img.data[i] = bytes[i];
  }
  return img;
}

RawImage read_raw(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw DataError("cannot open image " + path);
  uint8_t sig[8] = {};
  const size_t got = std::fread(sig, 1, 8, f.get());
  std::rewind(f.get());
  if (got >= 8 && !png_sig_cmp(sig, 0, 8)) return read_png(path, f.get());
  if (got >= 2 && sig[0] == 'P' && (sig[1] == '5' || sig[1] == '6'))
    return read_pnm(path, f.release());
  throw DataError("unsupported image format: " + path);
}

}  // namespace

GrayImage load_image_gray(const std::string& path) {
  const RawImage raw = read_raw(path);
  GrayImage out(raw.width, raw.height);
  const size_t px = static_cast<size_t>(raw.width) * raw.height;
  if (raw.channels == 3) {
    for (size_t i = 0; i < px; ++i)
      out.data()[i] = 0.299f * raw.data[3 * i] + 0.587f * raw.data[3 * i + 1] +
                      0.114f * raw.data[3 * i + 2];
  } else {
    for (size_t i = 0; i < px; ++i) out.data()[i] = raw.data[i];
  }
  return out;
}

DepthImage load_depth_image(const std::string& path, double depth_scale) {
  if (!(depth_scale > 0.0)) throw InvalidInput("load_depth_image: depth_scale must be > 0");
  const RawImage raw = read_raw(path);
  if (raw.channels != 1) throw DataError("depth image must be single-channel: " + path);
  DepthImage out(raw.width, raw.height);
  const size_t px = static_cast<size_t>(raw.width) * raw.height;
  for (size_t i = 0; i < px; ++i)
    out.data()[i] = raw.data[i] == 0 ? 0.0f : static_cast<float>(raw.data[i] / depth_scale);
  return out;
}

void save_pgm8(const GrayImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<uint8_t> row(img.width());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c)
      row[c] = static_cast<uint8_t>(std::clamp(img.at(r, c), 0.0f, 255.0f));
    out.write(reinterpret_cast<const char*>(row.data()), img.width());
  }
  if (!out) throw DataError("failed writing " + path);
}

void save_pgm16(const Image<uint16_t>& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "P5\n" << img.width() << " " << img.height() << "\n65535\n";
  std::vector<uint8_t> row(2 * img.width());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      row[2 * c] = static_cast<uint8_t>(img.at(r, c) >> 8);
      row[2 * c + 1] = static_cast<uint8_t>(img.at(r, c) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()), 2 * img.width());
  }
  if (!out) throw DataError("failed writing " + path);
}

void save_normalized_pgm(const Image<float>& img, const std::string& path) {
  float mn = std::numeric_limits<float>::infinity(), mx = -mn;
  for (float v : img.data()) {
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  const float scale = mx > mn ? 255.0f / (mx - mn) : 0.0f;
  GrayImage scaled(img.width(), img.height());
  for (size_t i = 0; i < img.size(); ++i) scaled.data()[i] = (img.data()[i] - mn) * scale;
  save_pgm8(scaled, path);
}

void save_index_csv(const Image<int32_t>& img, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      if (c) out << ',';
      out << img.at(r, c);
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace edgevo
