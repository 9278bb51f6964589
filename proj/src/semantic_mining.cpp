#include "moda/semantic_mining.hpp"

#include <algorithm>

#include "moda/losses.hpp"

namespace moda {

MovingCategorySet::MovingCategorySet(std::vector<int> classes) : classes_(std::move(classes)) {
  std::sort(classes_.begin(), classes_.end());
  classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
  if (classes_.empty()) throw DomainError("moving category set must not be empty");
  if (classes_.front() < 0) throw DomainError("moving category indices must be >= 0");
}

MovingCategorySet MovingCategorySet::cityscapes() {
  return MovingCategorySet({11, 12, 13, 14, 15, 16, 17, 18});
}

bool MovingCategorySet::contains(int cls) const {
  return std::binary_search(classes_.begin(), classes_.end(), cls);
}

void MovingCategorySet::validate(Index num_classes) const {
  if (classes_.back() >= num_classes) {
    throw DomainError("moving class " + std::to_string(classes_.back()) + " >= class count " +
                      std::to_string(num_classes));
  }
}

std::optional<int> dominant_category(const LabelMap& pseudo, const BinaryMask& object_mask,
                                     const MovingCategorySet& moving) {
  require_same_extent(pseudo, object_mask, "dominant_category");
  std::vector<Index> counts(256, 0);
  const auto labels = pseudo.data();
  const auto mask = object_mask.data();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (mask[i] && labels[i] != kIgnoreLabel && moving.contains(labels[i])) ++counts[labels[i]];
  }
  const auto best = std::max_element(counts.begin(), counts.end());  // first max = smaller index
  if (*best == 0) return std::nullopt;
  return static_cast<int>(best - counts.begin());
}

Grid<float> mining_weight(std::span<const GuidedMask> masks, float lambda, Index height,
                          Index width, Index classes) {
  if (!(lambda >= 0.0f)) throw DomainError("mining_weight: lambda must be >= 0");
  Grid<float> weight(height, width, classes);
  for (const auto& guided : masks) {
    if (!guided.category) continue;
    const int cls = *guided.category;
    if (cls < 0 || cls >= classes) throw DomainError("mining_weight: category outside class range");
    if (guided.mask.height() != height || guided.mask.width() != width) {
      throw ShapeError("mining_weight: mask extent mismatch");
    }
    for (Index r = 0; r < height; ++r) {
      for (Index c = 0; c < width; ++c) {
        if (guided.mask(r, c)) weight(r, c, cls) = std::max(weight(r, c, cls), lambda);
      }
    }
  }
  return weight;
}

LabelMap refine_labels(const PredictionMap& pred, const Grid<float>& weight) {
  require_same_extent(pred, weight, "refine_labels");
  require_channels(weight, pred.channels(), "refine_labels weight");
  LabelMap labels(pred.height(), pred.width(), 1);
  for (Index r = 0; r < pred.height(); ++r) {
    for (Index c = 0; c < pred.width(); ++c) {
      Index best = 0;
      double best_value = (static_cast<double>(weight(r, c, 0)) + 1.0) * pred(r, c, 0);
      for (Index k = 1; k < pred.channels(); ++k) {
        const double value = (static_cast<double>(weight(r, c, k)) + 1.0) * pred(r, c, k);
        if (value > best_value) {
          best_value = value;
          best = k;
        }
      }
      labels(r, c) = static_cast<std::uint8_t>(best);
    }
  }
  return labels;
}

LabelMap refine_frame(const PredictionMap& pred, const LabelMap& pseudo,
                      std::span<const BinaryMask> object_masks, const MovingCategorySet& moving,
                      float lambda) {
  require_same_extent(pred, pseudo, "refine_frame");
  std::vector<GuidedMask> guided;
  guided.reserve(object_masks.size());
  for (const auto& mask : object_masks) {
    guided.push_back({mask, dominant_category(pseudo, mask, moving)});
  }
  const auto weight = mining_weight(guided, lambda, pred.height(), pred.width(), pred.channels());
  return refine_labels(pred, weight);
}

double moda_loss(const PredictionMap& pred, const LabelMap& refined) {
  return cross_entropy(pred, refined);
}

}  // namespace moda
