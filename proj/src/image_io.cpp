#include "moda/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <fstream>
#include <memory>

namespace moda {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  if (path.empty()) throw IoError("empty path");
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open '" + path + "'");
  return f;
}

}  // namespace

FlowField load_flo(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  float tag = 0.0f;
  std::int32_t width = 0;
  std::int32_t height = 0;
  in.read(reinterpret_cast<char*>(&tag), 4);
  in.read(reinterpret_cast<char*>(&width), 4);
  in.read(reinterpret_cast<char*>(&height), 4);
  if (!in) throw FormatError(path + ": truncated FLO header");
  if (tag != kFloTag) throw FormatError(path + ": wrong FLO tag");
  if (width < 1 || width > 99999 || height < 1 || height > 99999) {
    throw FormatError(path + ": illegal FLO size " + std::to_string(width) + "x" +
                      std::to_string(height));
  }
  FlowField flow(height, width, 2);
  const auto bytes = static_cast<std::streamsize>(flow.data().size_bytes());
  in.read(reinterpret_cast<char*>(flow.data().data()), bytes);
  if (in.gcount() != bytes) throw FormatError(path + ": FLO file is too short");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path + ": FLO file is too long");
  return flow;
}

void save_flo(const FlowField& flow, const std::string& path) {
  require_channels(flow, 2, "save_flo");
  if (path.empty()) throw IoError("empty path");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const auto width = static_cast<std::int32_t>(flow.width());
  const auto height = static_cast<std::int32_t>(flow.height());
  out.write("PIEH", 4);
  out.write(reinterpret_cast<const char*>(&width), 4);
  out.write(reinterpret_cast<const char*>(&height), 4);
  out.write(reinterpret_cast<const char*>(flow.data().data()),
            static_cast<std::streamsize>(flow.data().size_bytes()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

LabelMap load_label_png(const std::string& path) {
  auto file = open_file(path, "rb");
  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw FormatError(path + ": not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  LabelMap labels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path + ": corrupt PNG");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const auto width = png_get_image_width(png, info);
  const auto height = png_get_image_height(png, info);
  const auto color = png_get_color_type(png, info);
  const auto depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path + ": label PNG must be 8-bit single channel");
  }
  labels = LabelMap(static_cast<Index>(height), static_cast<Index>(width), 1);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = &labels(static_cast<Index>(r), 0);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return labels;
}

void save_label_png(const LabelMap& labels, const std::string& path) {
  require_channels(labels, 1, "save_label_png");
  if (labels.height() < 1 || labels.width() < 1) throw ShapeError("cannot write empty PNG");
  auto file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("write failed for '" + path + "'");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(labels.width()),
               static_cast<png_uint_32>(labels.height()), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (Index r = 0; r < labels.height(); ++r) {
    png_write_row(png, const_cast<png_bytep>(&labels(r, 0)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace moda
