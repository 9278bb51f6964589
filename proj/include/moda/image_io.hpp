#pragma once

#include <string>

#include "moda/grid.hpp"

namespace moda {

/// Middlebury ".flo": f32 tag 202021.25 ("PIEH"), i32 width, i32 height,
/// then interleaved (u, v) f32 pairs in row order.
inline constexpr float kFloTag = 202021.25f;

FlowField load_flo(const std::string& path);
void save_flo(const FlowField& flow, const std::string& path);

/// 8-bit single-channel PNG; pixel value is the class index, 255 is ignore.
LabelMap load_label_png(const std::string& path);
void save_label_png(const LabelMap& labels, const std::string& path);

}  // namespace moda
