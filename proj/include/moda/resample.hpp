#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>

#include "moda/grid.hpp"

namespace moda {

// Resampling follows the align-corners=false convention: pixel k of a length-n
// axis has its centre at continuous coordinate k, and output pixel j of a
// resize n -> m reads source coordinate (j + 0.5) * n / m - 0.5.

namespace detail {

struct AxisTap {
  Index lo;
  Index hi;
  double frac;  // weight of hi
};

inline AxisTap resize_tap(Index dst, Index in_size, Index out_size) {
  const double scale = static_cast<double>(in_size) / static_cast<double>(out_size);
  const double src = std::max(0.0, (static_cast<double>(dst) + 0.5) * scale - 0.5);
  const auto lo = std::min(static_cast<Index>(std::floor(src)), in_size - 1);
  const auto hi = std::min(lo + 1, in_size - 1);
  return {lo, hi, hi == lo ? 0.0 : src - static_cast<double>(lo)};
}

}  // namespace detail

/// Bilinear resize of every channel. Output scalar equals input scalar; for
/// integer scalars the interpolated value is rounded to nearest.
template <typename Scalar>
Grid<Scalar> bilinear_resize(const Grid<Scalar>& map, Index new_height, Index new_width) {
  if (new_height < 1 || new_width < 1) throw ShapeError("bilinear_resize: target must be >= 1x1");
  if (map.height() < 1 || map.width() < 1) throw ShapeError("bilinear_resize: empty source");
  Grid<Scalar> out(new_height, new_width, map.channels());
  for (Index r = 0; r < new_height; ++r) {
    const auto ty = detail::resize_tap(r, map.height(), new_height);
    for (Index c = 0; c < new_width; ++c) {
      const auto tx = detail::resize_tap(c, map.width(), new_width);
      for (Index k = 0; k < map.channels(); ++k) {
        const double top = (1.0 - tx.frac) * static_cast<double>(map(ty.lo, tx.lo, k)) +
                           tx.frac * static_cast<double>(map(ty.lo, tx.hi, k));
        const double bottom = (1.0 - tx.frac) * static_cast<double>(map(ty.hi, tx.lo, k)) +
                              tx.frac * static_cast<double>(map(ty.hi, tx.hi, k));
        const double v = (1.0 - ty.frac) * top + ty.frac * bottom;
        if constexpr (std::is_integral_v<Scalar>) {
          out(r, c, k) = static_cast<Scalar>(std::lround(v));
        } else {
          out(r, c, k) = static_cast<Scalar>(v);
        }
      }
    }
  }
  return out;
}

/// Bilinear sample at continuous pixel coordinates (x = column, y = row),
/// written into `out` (size = channels). Returns false, leaving `out`
/// untouched, when any contributing neighbour lies outside the grid. A
/// neighbour contributes only when its weight is non-zero, so integer
/// coordinates on the last row/column are valid and exact.
template <typename Scalar, typename OutScalar>
bool bilinear_sample_into(const Grid<Scalar>& map, double x, double y, std::span<OutScalar> out) {
  if (!std::isfinite(x) || !std::isfinite(y)) return false;
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const double ax = x - fx0;
  const double ay = y - fy0;
  // Reject far-away coordinates before converting to Index.
  if (fx0 < -1.0 || fy0 < -1.0 || fx0 > static_cast<double>(map.width()) ||
      fy0 > static_cast<double>(map.height())) {
    return false;
  }
  const auto x0 = static_cast<Index>(fx0);
  const auto y0 = static_cast<Index>(fy0);
  const Index x1 = ax > 0.0 ? x0 + 1 : x0;
  const Index y1 = ay > 0.0 ? y0 + 1 : y0;
  if (x0 < 0 || y0 < 0 || x1 >= map.width() || y1 >= map.height()) return false;
  for (Index k = 0; k < map.channels(); ++k) {
    const double top = (1.0 - ax) * static_cast<double>(map(y0, x0, k)) +
                       (ax > 0.0 ? ax * static_cast<double>(map(y0, x1, k)) : 0.0);
    const double bottom = ay > 0.0 ? (1.0 - ax) * static_cast<double>(map(y1, x0, k)) +
                                         (ax > 0.0 ? ax * static_cast<double>(map(y1, x1, k)) : 0.0)
                                   : 0.0;
    out[static_cast<std::size_t>(k)] =
        static_cast<OutScalar>(ay > 0.0 ? (1.0 - ay) * top + ay * bottom : top);
  }
  return true;
}

/// Returns std::nullopt (Invalid) when the sample needs an out-of-bounds neighbour.
template <typename Scalar>
std::optional<Eigen::VectorXd> bilinear_sample(const Grid<Scalar>& map, double x, double y) {
  Eigen::VectorXd value(map.channels());
  if (!bilinear_sample_into(map, x, y, std::span<double>(value.data(), value.size()))) {
    return std::nullopt;
  }
  return value;
}

/// Nearest-neighbour resize with half-pixel centres; preserves the value set.
template <typename Scalar>
Grid<Scalar> nearest_resize(const Grid<Scalar>& map, Index new_height, Index new_width) {
  if (new_height < 1 || new_width < 1) throw ShapeError("nearest_resize: target must be >= 1x1");
  if (map.height() < 1 || map.width() < 1) throw ShapeError("nearest_resize: empty source");
  auto source_index = [](Index dst, Index in_size, Index out_size) {
    const auto src = static_cast<Index>(std::floor((static_cast<double>(dst) + 0.5) *
                                                   static_cast<double>(in_size) /
                                                   static_cast<double>(out_size)));
    return std::clamp<Index>(src, 0, in_size - 1);
  };
  Grid<Scalar> out(new_height, new_width, map.channels());
  for (Index r = 0; r < new_height; ++r) {
    const Index sr = source_index(r, map.height(), new_height);
    for (Index c = 0; c < new_width; ++c) {
      const Index sc = source_index(c, map.width(), new_width);
      for (Index k = 0; k < map.channels(); ++k) out(r, c, k) = map(sr, sc, k);
    }
  }
  return out;
}

/// Element-wise cast between scalar types (e.g. mask -> float for interpolation).
template <typename To, typename From>
Grid<To> cast_grid(const Grid<From>& src) {
  std::vector<To> values(src.data().size());
  std::transform(src.data().begin(), src.data().end(), values.begin(),
                 [](From v) { return static_cast<To>(v); });
  return Grid<To>(src.height(), src.width(), src.channels(), std::move(values));
}

}  // namespace moda
