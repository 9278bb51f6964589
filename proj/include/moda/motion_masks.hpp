#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "moda/grid.hpp"

namespace moda {

/// How the three motion components are combined when thresholding.
enum class MaskMode {
  Any,  // some component exceeds epsilon
  All,  // every component exceeds epsilon
};

enum class Connectivity : int { Four = 4, Eight = 8 };

MaskMode parse_mask_mode(const std::string& text);
std::string to_string(MaskMode mode);
Connectivity connectivity_from_int(int neighbours);

/// 1 where |motion(i, d)| > epsilon for some (Any) or every (All) d.
BinaryMask extract_binary_mask(const MotionMap& motion, float epsilon, MaskMode mode = MaskMode::Any);

struct ComponentLabels {
  ComponentLabelMap labels;  // 0 = background, 1..count in raster first-encounter order
  std::uint32_t count = 0;
};

ComponentLabels label_components(const BinaryMask& mask, Connectivity connectivity = Connectivity::Eight);

/// Instance-level motion masks, one per surviving component, ordered by component id.
struct InstanceMaskSet {
  std::vector<BinaryMask> masks;
  std::vector<std::uint32_t> component_ids;

  std::size_t count() const { return masks.size(); }
};

InstanceMaskSet split_instances(const ComponentLabels& components, Index min_area);

}  // namespace moda
