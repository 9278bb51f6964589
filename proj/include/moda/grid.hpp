#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "moda/errors.hpp"

namespace moda {

using Index = Eigen::Index;

/// Dense H×W×C map stored row-major with interleaved channels, i.e. element
/// (r, c, k) lives at ((r * W) + c) * C + k. This is the layout of a C-order
/// NPY array of shape (H, W, C).
template <typename Scalar_>
class Grid {
 public:
  using Scalar = Scalar_;
  using PixelMap = Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;
  using ConstPixelMap = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;

  Grid() = default;

  Grid(Index height, Index width, Index channels = 1, Scalar fill = Scalar{0})
      : height_(height), width_(width), channels_(channels) {
    if (height < 0 || width < 0 || channels < 1) {
      throw ShapeError("grid dimensions must be non-negative with at least one channel");
    }
    data_.assign(static_cast<std::size_t>(height * width * channels), fill);
  }

  Grid(Index height, Index width, Index channels, std::vector<Scalar> data)
      : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    if (height < 0 || width < 0 || channels < 1) {
      throw ShapeError("grid dimensions must be non-negative with at least one channel");
    }
    if (static_cast<Index>(data_.size()) != height * width * channels) {
      throw ShapeError("grid payload length " + std::to_string(data_.size()) +
                       " does not match " + std::to_string(height) + "x" +
                       std::to_string(width) + "x" + std::to_string(channels));
    }
  }

  Index height() const { return height_; }
  Index width() const { return width_; }
  Index channels() const { return channels_; }
  Index pixels() const { return height_ * width_; }
  bool empty() const { return data_.empty(); }

  bool contains(Index row, Index col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }

  Scalar& operator()(Index row, Index col, Index ch = 0) { return data_[offset(row, col, ch)]; }
  const Scalar& operator()(Index row, Index col, Index ch = 0) const {
    return data_[offset(row, col, ch)];
  }

  PixelMap pixel(Index row, Index col) { return PixelMap(&data_[offset(row, col, 0)], channels_); }
  ConstPixelMap pixel(Index row, Index col) const {
    return ConstPixelMap(&data_[offset(row, col, 0)], channels_);
  }

  std::span<Scalar> data() { return data_; }
  std::span<const Scalar> data() const { return data_; }

  bool same_extent(const Grid& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }
  template <typename Other>
  bool same_extent(const Grid<Other>& other) const {
    return height_ == other.height() && width_ == other.width();
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.channels_ == b.channels_ &&
           a.data_ == b.data_;
  }

 private:
  std::size_t offset(Index row, Index col, Index ch) const {
    return static_cast<std::size_t>((row * width_ + col) * channels_ + ch);
  }

  Index height_ = 0;
  Index width_ = 0;
  Index channels_ = 1;
  std::vector<Scalar> data_;
};

using ImageMap = Grid<float>;        // H×W×3 RGB in [0,1]
using DepthMap = Grid<float>;        // H×W, metres, > 0
using MotionMap = Grid<float>;       // H×W×3 object displacement
using FeatureMap = Grid<float>;      // H'×W'×V
using PredictionMap = Grid<float>;   // H×W×C softmax probabilities
using FlowField = Grid<float>;       // H×W×2 (u, v)
using BinaryMask = Grid<std::uint8_t>;
using LabelMap = Grid<std::uint8_t>;
using ComponentLabelMap = Grid<std::uint32_t>;

inline constexpr std::uint8_t kIgnoreLabel = 255;

template <typename A, typename B>
void require_same_extent(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ShapeError(std::string(what) + ": extent mismatch " + std::to_string(a.height()) + "x" +
                     std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                     std::to_string(b.width()));
  }
}

template <typename Scalar>
void require_channels(const Grid<Scalar>& g, Index channels, const char* what) {
  if (g.channels() != channels) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(channels) +
                     " channels, got " + std::to_string(g.channels()));
  }
}

/// Number of set pixels of a {0,1} mask.
inline Index mask_area(const BinaryMask& mask) {
  Index n = 0;
  for (auto v : mask.data()) n += v != 0;
  return n;
}

// Invariant checks for the typed maps. Each throws DomainError/ShapeError.
void validate_image(const ImageMap& image);
void validate_depth(const DepthMap& depth);
void validate_motion(const MotionMap& motion);
void validate_prediction(const PredictionMap& pred, float tolerance = 1e-4f);
void validate_flow(const FlowField& flow);
void validate_binary(const BinaryMask& mask);
void validate_labels(const LabelMap& labels, Index classes);

}  // namespace moda
