#include "moda/motion_masks.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace moda {

namespace {

/// Union-find over provisional labels with path halving.
class DisjointSet {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Keep the smaller root so roots stay the earliest provisional label.
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace

MaskMode parse_mask_mode(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) {
    return static_cast<char>(std::tolower(ch));
  });
  if (lower == "any") return MaskMode::Any;
  if (lower == "all") return MaskMode::All;
  throw DomainError("mask mode must be 'any' or 'all', got '" + text + "'");
}

std::string to_string(MaskMode mode) { return mode == MaskMode::Any ? "any" : "all"; }

Connectivity connectivity_from_int(int neighbours) {
  if (neighbours == 4) return Connectivity::Four;
  if (neighbours == 8) return Connectivity::Eight;
  throw DomainError("connectivity must be 4 or 8, got " + std::to_string(neighbours));
}

BinaryMask extract_binary_mask(const MotionMap& motion, float epsilon, MaskMode mode) {
  if (!(epsilon >= 0.0f)) throw DomainError("extract_binary_mask: epsilon must be >= 0");
  BinaryMask mask(motion.height(), motion.width(), 1);
  for (Index r = 0; r < motion.height(); ++r) {
    for (Index c = 0; c < motion.width(); ++c) {
      const auto v = motion.pixel(r, c).cwiseAbs();
      const bool moving = mode == MaskMode::Any ? (v.array() > epsilon).any()
                                                : (v.array() > epsilon).all();
      mask(r, c) = moving ? 1 : 0;
    }
  }
  return mask;
}

ComponentLabels label_components(const BinaryMask& mask, Connectivity connectivity) {
  const Index h = mask.height();
  const Index w = mask.width();
  ComponentLabels out{ComponentLabelMap(h, w, 1), 0};
  if (h == 0 || w == 0) return out;

  // First pass: provisional labels (offset by one, 0 = background) and
  // equivalences from the already-visited neighbours.
  DisjointSet sets;
  sets.make();  // slot 0 unused
  auto& labels = out.labels;
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      if (!mask(r, c)) continue;
      std::uint32_t assigned = 0;
      auto visit = [&](Index nr, Index nc) {
        if (!mask.contains(nr, nc) || !labels(nr, nc)) return;
        const auto neighbour = labels(nr, nc);
        if (!assigned) {
          assigned = neighbour;
        } else {
          sets.unite(assigned, neighbour);
        }
      };
      visit(r, c - 1);
      visit(r - 1, c);
      if (connectivity == Connectivity::Eight) {
        visit(r - 1, c - 1);
        visit(r - 1, c + 1);
      }
      labels(r, c) = assigned ? assigned : sets.make();
    }
  }

  // Second pass: resolve roots and renumber in raster first-encounter order.
  std::vector<std::uint32_t> final_id;
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      auto& v = labels(r, c);
      if (!v) continue;
      const auto root = sets.find(v);
      if (root >= final_id.size()) final_id.resize(root + 1, 0);
      if (!final_id[root]) final_id[root] = ++out.count;
      v = final_id[root];
    }
  }
  return out;
}

InstanceMaskSet split_instances(const ComponentLabels& components, Index min_area) {
  std::vector<Index> area(components.count + 1, 0);
  for (auto v : components.labels.data()) ++area[v];

  InstanceMaskSet set;
  std::vector<std::int64_t> slot(components.count + 1, -1);
  for (std::uint32_t id = 1; id <= components.count; ++id) {
    if (area[id] < std::max<Index>(min_area, 1)) continue;
    slot[id] = static_cast<std::int64_t>(set.masks.size());
    set.masks.emplace_back(components.labels.height(), components.labels.width(), 1);
    set.component_ids.push_back(id);
  }
  const auto& labels = components.labels;
  for (Index r = 0; r < labels.height(); ++r) {
    for (Index c = 0; c < labels.width(); ++c) {
      const auto id = labels(r, c);
      if (id && slot[id] >= 0) set.masks[static_cast<std::size_t>(slot[id])](r, c) = 1;
    }
  }
  return set;
}

}  // namespace moda
