#include "moda/npy.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <numeric>
#include <regex>

namespace moda {

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are read and written as little-endian");

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLength = 6;

std::optional<NpyDtype> parse_descr(const std::string& descr) {
  if (descr == "<f4") return NpyDtype::Float32;
  if (descr == "|u1" || descr == "<u1" || descr == "u1") return NpyDtype::UInt8;
  if (descr == "<u4") return NpyDtype::UInt32;
  return std::nullopt;
}

std::vector<std::size_t> parse_shape(const std::string& text) {
  std::vector<std::size_t> shape;
  static const std::regex dim(R"((\d+))");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), dim); it != std::sregex_iterator();
       ++it) {
    shape.push_back(static_cast<std::size_t>(std::stoull((*it)[1].str())));
  }
  return shape;
}

std::string shape_literal(const std::vector<std::size_t>& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  if (shape.size() == 1) out += ",";
  out += ")";
  return out;
}

}  // namespace

std::size_t NpyArray::element_count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::size_t dtype_size(NpyDtype dtype) {
  switch (dtype) {
    case NpyDtype::Float32: return 4;
    case NpyDtype::UInt8: return 1;
    case NpyDtype::UInt32: return 4;
  }
  return 0;
}

const char* dtype_descr(NpyDtype dtype) {
  switch (dtype) {
    case NpyDtype::Float32: return "<f4";
    case NpyDtype::UInt8: return "|u1";
    case NpyDtype::UInt32: return "<u4";
  }
  return "?";
}

NpyArray parse_npy(std::span<const std::byte> bytes) {
  if (bytes.size() < kMagicLength + 4 ||
      std::memcmp(bytes.data(), kMagic, kMagicLength) != 0) {
    throw FormatError("missing NPY magic string");
  }
  const auto major = static_cast<unsigned>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t header_start = 0;
  if (major == 1) {
    header_len = static_cast<std::size_t>(bytes[8]) | (static_cast<std::size_t>(bytes[9]) << 8);
    header_start = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) throw FormatError("truncated NPY v2 preamble");
    for (int i = 0; i < 4; ++i) header_len |= static_cast<std::size_t>(bytes[8 + i]) << (8 * i);
    header_start = 12;
  } else {
    throw FormatError("unsupported NPY version " + std::to_string(major));
  }
  if (header_start + header_len > bytes.size()) throw FormatError("truncated NPY header");

  const std::string header(reinterpret_cast<const char*>(bytes.data() + header_start), header_len);
  static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
  static const std::regex order_re(R"('fortran_order'\s*:\s*(True|False))");
  static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");
  std::smatch m;

  NpyArray array;
  if (!std::regex_search(header, m, descr_re)) throw FormatError("NPY header lacks descr");
  const auto dtype = parse_descr(m[1].str());
  if (!dtype) throw FormatError("unsupported NPY dtype '" + m[1].str() + "'");
  array.dtype = *dtype;

  if (!std::regex_search(header, m, order_re)) throw FormatError("NPY header lacks fortran_order");
  if (m[1].str() == "True") throw FormatError("Fortran-order NPY arrays are not supported");

  if (!std::regex_search(header, m, shape_re)) throw FormatError("NPY header lacks shape");
  array.shape = parse_shape(m[1].str());

  const std::size_t payload_start = header_start + header_len;
  const std::size_t expected = array.element_count() * dtype_size(array.dtype);
  if (bytes.size() - payload_start != expected) {
    throw FormatError("NPY payload holds " + std::to_string(bytes.size() - payload_start) +
                      " bytes, shape requires " + std::to_string(expected));
  }
  array.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(payload_start), bytes.end());
  return array;
}

NpyArray read_npy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_npy(std::as_bytes(std::span(raw)));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::vector<std::byte> serialize_npy(const NpyArray& array) {
  if (array.payload.size() != array.element_count() * dtype_size(array.dtype)) {
    throw ShapeError("NPY payload size disagrees with shape");
  }
  std::string header = std::string("{'descr': '") + dtype_descr(array.dtype) +
                       "', 'fortran_order': False, 'shape': " + shape_literal(array.shape) + ", }";
  // magic(6) + version(2) + length(2) + header + '\n' must be a multiple of 64
  const std::size_t unpadded = kMagicLength + 4 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');
  if (header.size() > 0xFFFF) throw FormatError("NPY header too long for version 1.0");

  std::vector<std::byte> out;
  out.reserve(kMagicLength + 4 + header.size() + array.payload.size());
  for (std::size_t i = 0; i < kMagicLength; ++i) out.push_back(static_cast<std::byte>(kMagic[i]));
  out.push_back(std::byte{1});
  out.push_back(std::byte{0});
  out.push_back(static_cast<std::byte>(header.size() & 0xFF));
  out.push_back(static_cast<std::byte>((header.size() >> 8) & 0xFF));
  for (char ch : header) out.push_back(static_cast<std::byte>(ch));
  out.insert(out.end(), array.payload.begin(), array.payload.end());
  return out;
}

void write_npy(const std::string& path, const NpyArray& array) {
  if (path.empty()) throw IoError("empty output path");
  const auto bytes = serialize_npy(array);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

ImageMap load_image(const std::string& path) {
  auto image = load_tensor<float>(path, 3);
  validate_image(image);
  return image;
}

DepthMap load_depth(const std::string& path) {
  auto depth = load_tensor<float>(path, 2);
  validate_depth(depth);
  return depth;
}

MotionMap load_motion(const std::string& path) {
  auto motion = load_tensor<float>(path, 3);
  validate_motion(motion);
  return motion;
}

FeatureMap load_features(const std::string& path) {
  auto features = load_tensor<float>(path, 3);
  for (float v : features.data()) {
    if (!std::isfinite(v)) throw DomainError(path + ": non-finite feature value");
  }
  return features;
}

PredictionMap load_prediction(const std::string& path) {
  auto pred = load_tensor<float>(path, 3);
  validate_prediction(pred);
  return pred;
}

BinaryMask load_mask(const std::string& path) {
  auto mask = load_tensor<std::uint8_t>(path, 2);
  validate_binary(mask);
  return mask;
}

}  // namespace moda
