#include "moda/losses.hpp"

#include <cmath>
#include <limits>

#include "moda/resample.hpp"

namespace moda {

double cross_entropy(const PredictionMap& pred, const LabelMap& labels) {
  require_same_extent(pred, labels, "cross_entropy");
  require_channels(labels, 1, "cross_entropy labels");
  double total = 0.0;
  Index counted = 0;
  for (Index r = 0; r < pred.height(); ++r) {
    for (Index c = 0; c < pred.width(); ++c) {
      const auto label = labels(r, c);
      if (label == kIgnoreLabel) continue;
      if (label >= pred.channels()) {
        throw DomainError("cross_entropy: label " + std::to_string(label) + " >= class count");
      }
      total -= std::log(std::max(static_cast<double>(pred(r, c, label)), kProbabilityFloor));
      ++counted;
    }
  }
  return counted ? total / static_cast<double>(counted) : 0.0;
}

double ofr_loss(const PredictionMap& pred1, const PredictionMap& pred2, const FlowField& flow_1to2) {
  require_same_extent(pred1, pred2, "ofr_loss");
  require_same_extent(pred1, flow_1to2, "ofr_loss flow");
  require_channels(pred2, pred1.channels(), "ofr_loss");
  require_channels(flow_1to2, 2, "ofr_loss flow");

  Eigen::VectorXd propagated(pred1.channels());
  std::span<double> out(propagated.data(), static_cast<std::size_t>(propagated.size()));
  double total = 0.0;
  Index valid = 0;
  for (Index r = 0; r < pred1.height(); ++r) {
    for (Index c = 0; c < pred1.width(); ++c) {
      const double x = static_cast<double>(c) - flow_1to2(r, c, 0);
      const double y = static_cast<double>(r) - flow_1to2(r, c, 1);
      if (!bilinear_sample_into(pred1, x, y, out)) continue;
      total += (propagated - pred2.pixel(r, c).cast<double>()).norm();
      ++valid;
    }
  }
  return valid ? total / static_cast<double>(valid) : 0.0;
}

ConfusionMatrix confusion(const LabelMap& gt, const LabelMap& pred, Index classes,
                          std::uint8_t ignore_label) {
  require_same_extent(gt, pred, "confusion");
  ConfusionMatrix cm = ConfusionMatrix::Zero(classes, classes);
  const auto g = gt.data();
  const auto p = pred.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] == ignore_label) continue;
    if (g[i] >= classes || p[i] >= classes) {
      throw DomainError("confusion: label outside [0, " + std::to_string(classes) + ")");
    }
    ++cm(g[i], p[i]);
  }
  return cm;
}

IouReport miou(const ConfusionMatrix& cm) {
  if (cm.rows() != cm.cols()) throw ShapeError("miou: confusion matrix must be square");
  IouReport report;
  report.per_class.assign(static_cast<std::size_t>(cm.rows()),
                          std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  for (Index c = 0; c < cm.rows(); ++c) {
    const auto tp = cm(c, c);
    const auto denom = cm.row(c).sum() + cm.col(c).sum() - tp;
    if (denom == 0) continue;
    const double iou = static_cast<double>(tp) / static_cast<double>(denom);
    report.per_class[static_cast<std::size_t>(c)] = iou;
    sum += iou;
    ++report.present;
  }
  report.mean = report.present ? sum / static_cast<double>(report.present)
                               : std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace moda
