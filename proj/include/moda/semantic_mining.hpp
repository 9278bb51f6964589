#pragma once

#include <optional>
#include <span>
#include <vector>

#include "moda/grid.hpp"

namespace moda {

/// Classes that can move on their own. Sorted, unique, non-empty.
class MovingCategorySet {
 public:
  explicit MovingCategorySet(std::vector<int> classes);

  /// person, rider, car, truck, bus, train, motorcycle, bicycle in the
  /// 19-class Cityscapes ordering.
  static MovingCategorySet cityscapes();

  bool contains(int cls) const;
  const std::vector<int>& classes() const { return classes_; }
  void validate(Index num_classes) const;

 private:
  std::vector<int> classes_;
};

/// Most frequent moving class among pseudo labels under the mask; ties go to
/// the smaller class index. std::nullopt when no moving pixel is covered.
std::optional<int> dominant_category(const LabelMap& pseudo, const BinaryMask& object_mask,
                                     const MovingCategorySet& moving);

struct GuidedMask {
  BinaryMask mask;
  std::optional<int> category;
};

/// H x W x C weights: lambda at (i, c) when some mask with dominant class c
/// covers i, else 0. Overlaps combine by max.
Grid<float> mining_weight(std::span<const GuidedMask> masks, float lambda, Index height,
                          Index width, Index classes);

/// argmax_c (w(i, c) + 1) * p(i, c), ties to the smaller class. Softmax is
/// monotone per pixel, so it does not change the argmax and is skipped.
LabelMap refine_labels(const PredictionMap& pred, const Grid<float>& weight);

/// Dominant classes from the initial pseudo map, then one refinement pass.
LabelMap refine_frame(const PredictionMap& pred, const LabelMap& pseudo,
                      std::span<const BinaryMask> object_masks, const MovingCategorySet& moving,
                      float lambda);

/// Mean of -log p(i, refined(i)) over non-ignore pixels, p clamped at 1e-12.
double moda_loss(const PredictionMap& pred, const LabelMap& refined);

}  // namespace moda
