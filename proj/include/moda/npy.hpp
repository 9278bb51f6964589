#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "moda/grid.hpp"

namespace moda {

enum class NpyDtype { Float32, UInt8, UInt32 };

/// Raw contents of an NPY file: C-order little-endian payload plus shape.
struct NpyArray {
  NpyDtype dtype = NpyDtype::Float32;
  std::vector<std::size_t> shape;
  std::vector<std::byte> payload;

  std::size_t element_count() const;
};

std::size_t dtype_size(NpyDtype dtype);
const char* dtype_descr(NpyDtype dtype);

/// Reads NPY format versions 1.0, 2.0 and 3.0. Throws IoError, FormatError.
NpyArray read_npy(const std::string& path);
NpyArray parse_npy(std::span<const std::byte> bytes);

/// Writes NPY version 1.0 with the header padded to a 64-byte boundary.
void write_npy(const std::string& path, const NpyArray& array);
std::vector<std::byte> serialize_npy(const NpyArray& array);

template <typename Scalar>
constexpr NpyDtype dtype_of() {
  if constexpr (std::is_same_v<Scalar, float>) {
    return NpyDtype::Float32;
  } else if constexpr (std::is_same_v<Scalar, std::uint8_t>) {
    return NpyDtype::UInt8;
  } else {
    static_assert(std::is_same_v<Scalar, std::uint32_t>, "unsupported NPY scalar");
    return NpyDtype::UInt32;
  }
}

/// Converts a decoded array into a grid. Rank 2 arrays become single-channel
/// grids, rank 3 arrays (H, W, C) keep their channel count.
template <typename Scalar>
Grid<Scalar> to_grid(const NpyArray& array, std::optional<int> expected_rank = std::nullopt) {
  const int rank = static_cast<int>(array.shape.size());
  if (expected_rank && rank != *expected_rank) {
    throw ShapeError("expected rank " + std::to_string(*expected_rank) + " array, got rank " +
                     std::to_string(rank));
  }
  if (rank != 2 && rank != 3) {
    throw ShapeError("dense maps need rank 2 or 3, got rank " + std::to_string(rank));
  }
  if (array.dtype != dtype_of<Scalar>()) {
    throw FormatError(std::string("dtype mismatch: file holds ") + dtype_descr(array.dtype) +
                      ", caller wants " + dtype_descr(dtype_of<Scalar>()));
  }
  const auto h = static_cast<Index>(array.shape[0]);
  const auto w = static_cast<Index>(array.shape[1]);
  const auto c = rank == 3 ? static_cast<Index>(array.shape[2]) : Index{1};
  if (c < 1) throw ShapeError("zero-channel array");
  std::vector<Scalar> values(array.element_count());
  if (!values.empty()) std::memcpy(values.data(), array.payload.data(), array.payload.size());
  return Grid<Scalar>(h, w, c, std::move(values));
}

/// Single-channel grids are written as (H, W), others as (H, W, C).
template <typename Scalar>
NpyArray to_npy(const Grid<Scalar>& grid) {
  NpyArray array;
  array.dtype = dtype_of<Scalar>();
  array.shape = {static_cast<std::size_t>(grid.height()), static_cast<std::size_t>(grid.width())};
  if (grid.channels() != 1) array.shape.push_back(static_cast<std::size_t>(grid.channels()));
  const auto bytes = grid.data().size_bytes();
  array.payload.resize(bytes);
  if (bytes) std::memcpy(array.payload.data(), grid.data().data(), bytes);
  return array;
}

template <typename Scalar>
Grid<Scalar> load_tensor(const std::string& path, std::optional<int> expected_rank = std::nullopt) {
  return to_grid<Scalar>(read_npy(path), expected_rank);
}

template <typename Scalar>
void save_tensor(const Grid<Scalar>& grid, const std::string& path) {
  write_npy(path, to_npy(grid));
}

// Typed loaders: decode, check rank, then check the map's value invariants.
ImageMap load_image(const std::string& path);
DepthMap load_depth(const std::string& path);
MotionMap load_motion(const std::string& path);
FeatureMap load_features(const std::string& path);
PredictionMap load_prediction(const std::string& path);
BinaryMask load_mask(const std::string& path);

}  // namespace moda
