#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "moda/grid.hpp"

namespace moda {

inline constexpr double kProbabilityFloor = 1e-12;

/// Mean of -log p(i, label(i)) over non-ignore pixels; 0 if all are ignored.
double cross_entropy(const PredictionMap& pred, const LabelMap& labels);

/// Propagates pred1 to frame 2 by backward sampling, pred1(x - flow(x)),
/// and averages the L2 distance to pred2 over in-bounds pixels.
double ofr_loss(const PredictionMap& pred1, const PredictionMap& pred2, const FlowField& flow_1to2);

/// C x C pixel counts; rows are ground truth, columns prediction.
using ConfusionMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

ConfusionMatrix confusion(const LabelMap& gt, const LabelMap& pred, Index classes,
                          std::uint8_t ignore_label = kIgnoreLabel);

struct IouReport {
  std::vector<double> per_class;  // NaN for classes absent from both gt and prediction
  double mean = 0.0;              // NaN when no class is present
  Index present = 0;
};

IouReport miou(const ConfusionMatrix& cm);

}  // namespace moda
