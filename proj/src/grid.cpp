#include "moda/grid.hpp"

#include <cmath>

namespace moda {

namespace {

void require_finite(std::span<const float> values, const char* what) {
  for (float v : values) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite value");
  }
}

}  // namespace

void validate_image(const ImageMap& image) {
  require_channels(image, 3, "image");
  for (float v : image.data()) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw DomainError("image: values must lie in [0, 1]");
    }
  }
}

void validate_depth(const DepthMap& depth) {
  require_channels(depth, 1, "depth");
  for (float v : depth.data()) {
    if (!std::isfinite(v) || v <= 0.0f) throw DomainError("depth: values must be finite and > 0");
  }
}

void validate_motion(const MotionMap& motion) {
  require_channels(motion, 3, "motion");
  require_finite(motion.data(), "motion");
}

void validate_prediction(const PredictionMap& pred, float tolerance) {
  for (Index r = 0; r < pred.height(); ++r) {
    for (Index c = 0; c < pred.width(); ++c) {
      double sum = 0.0;
      for (Index k = 0; k < pred.channels(); ++k) {
        const float p = pred(r, c, k);
        if (!std::isfinite(p) || p < 0.0f || p > 1.0f) {
          throw DomainError("prediction: probabilities must lie in [0, 1]");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > tolerance) {
        throw DomainError("prediction: pixel (" + std::to_string(r) + ", " + std::to_string(c) +
                          ") sums to " + std::to_string(sum));
      }
    }
  }
}

void validate_flow(const FlowField& flow) {
  require_channels(flow, 2, "flow");
  for (float v : flow.data()) {
    if (!std::isfinite(v) || std::abs(v) >= 1e9f) throw DomainError("flow: unknown or non-finite vector");
  }
}

void validate_binary(const BinaryMask& mask) {
  require_channels(mask, 1, "mask");
  for (auto v : mask.data()) {
    if (v > 1) throw DomainError("mask: values must be 0 or 1");
  }
}

void validate_labels(const LabelMap& labels, Index classes) {
  require_channels(labels, 1, "labels");
  for (auto v : labels.data()) {
    if (v != kIgnoreLabel && v >= classes) {
      throw DomainError("labels: class " + std::to_string(v) + " outside [0, " +
                        std::to_string(classes) + ")");
    }
  }
}

}  // namespace moda
