#pragma once

#include <Eigen/Core>

#include <vector>

#include "moda/grid.hpp"

namespace moda {

struct GridPos {
  Index row = 0;
  Index col = 0;

  friend bool operator==(const GridPos&, const GridPos&) = default;
};

/// Feature vectors covered by an instance mask, one row per entry, with
/// the feature-grid position each came from (raster order).
struct MaskedFeatures {
  Index grid_height = 0;
  Index grid_width = 0;
  std::vector<GridPos> positions;
  Eigen::MatrixXf vectors;  // E x V

  Index count() const { return static_cast<Index>(positions.size()); }
};

/// Queries picked from the masked features; `entries` indexes MaskedFeatures rows.
struct QuerySet {
  std::vector<Index> entries;
  Eigen::MatrixXf vectors;  // F x V

  Index count() const { return static_cast<Index>(entries.size()); }
};

/// Rows = queries, columns = keys, values are cosine similarities.
using ObjectnessScoreMap = Eigen::MatrixXf;

struct ScoredMask {
  BinaryMask mask;  // feature-grid resolution, or image resolution after discovery
  float score = 0.0f;
  Index order = 0;  // construction order, used as the final NMS tie-break

  Index area() const { return mask_area(mask); }
};

struct DiscoveryConfig {
  float tau = 0.5f;
  Index query_grid = 4;
  float iou_threshold = 0.5f;
};

struct DiscoveryResult {
  std::vector<ScoredMask> objects;  // image-resolution masks, each a subset of the instance mask
  bool fallback = false;            // true when the instance mask was returned as the only object
};

/// Bilinearly shrinks the instance mask to the feature grid, keeps cells
/// >= 0.5 and gathers their feature vectors. Throws EmptySelection.
MaskedFeatures select_masked_features(const FeatureMap& features, const BinaryMask& instance_mask);

/// Lays a g x g grid of cell centres over the bounding box of the selected
/// positions. Each centre takes the nearest selected entry within one grid
/// cell (per axis); ties go to the earlier entry. Duplicates are dropped.
QuerySet build_queries(const MaskedFeatures& selected, Index query_grid);

/// Cosine similarity of every query with every key. Throws DomainError on
/// zero vectors or mismatched dimensions.
ObjectnessScoreMap objectness_scores(const Eigen::MatrixXf& queries, const Eigen::MatrixXf& keys);

/// Per row: min-max normalise to [0, 1] (constant rows become all ones),
/// keep keys with normalised score >= tau, paint them on the feature grid
/// and score the mask by the mean normalised score of its members.
std::vector<ScoredMask> masks_from_scores(const ObjectnessScoreMap& scores,
                                          const MaskedFeatures& keys, float tau);

double mask_iou(const BinaryMask& a, const BinaryMask& b);

/// Sort by score (desc), then area (desc), then construction order; keep a
/// mask iff its IoU with every kept mask is below the threshold.
std::vector<ScoredMask> rank_and_nms(std::vector<ScoredMask> candidates, float iou_threshold);

DiscoveryResult discover_objects(const FeatureMap& features, const BinaryMask& instance_mask,
                                 const DiscoveryConfig& config = {});

}  // namespace moda
