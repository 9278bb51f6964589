#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "moda/geometry.hpp"
#include "moda/grid.hpp"

namespace moda {

/// A textured fronto-parallel rectangle. (x, y, width, height) is its pixel
/// footprint in frame 1; `motion` is its 3-D displacement between frames.
struct SceneObject {
  Index x = 0;
  Index y = 0;
  Index width = 0;
  Index height = 0;
  double depth = 10.0;
  Vector3<double> motion = Vector3<double>::Zero();
  int class_id = 13;
};

/// Synthetic dynamic scene description plus the knobs used to fabricate
/// network-like outputs (features, softmax predictions) for it.
struct SceneSpec {
  Index height = 96;
  Index width = 128;
  double background_depth = 20.0;
  int background_class = 0;
  std::vector<SceneObject> objects;
  EgoPose ego;
  Intrinsics intrinsics{100.0, 100.0, 63.5, 47.5};
  double texture_period = 12.0;

  int num_classes = 19;
  std::uint64_t seed = 7;
  double confusion = 0.3;          // fraction of object pixels with a corrupted prediction
  double corrupt_true_prob = 0.4;  // p(true class) on corrupted pixels
  double clean_true_prob = 0.8;    // p(true class) elsewhere
  Index feature_stride = 4;
  Index feature_dim = 8;
  double feature_noise = 0.0;      // uniform noise amplitude added to feature vectors

  /// Throws SpecError on a degenerate description.
  void validate() const;
};

/// Reads a scene description; absent keys keep their defaults, unknown keys
/// raise SpecError. `intrinsics` defaults to f = 100 px, principal point at
/// the image centre.
SceneSpec scene_spec_from_json(const nlohmann::json& doc);
nlohmann::json scene_spec_to_json(const SceneSpec& spec);

/// The spec used by `synth` when no file is given: one 32x32 moving rectangle.
SceneSpec default_scene_spec();

struct SyntheticScene {
  ImageMap frame1;
  ImageMap frame2;
  DepthMap depth1;
  MotionMap motion;
  EgoPose ego;
  Intrinsics intrinsics;
  LabelMap gt_labels;
  BinaryMask gt_object_mask;
  ComponentLabelMap surface_ids;  // 0 = background, j + 1 = object j (frame 1)
};

/// Ray-casts both frames: nearest surface along each pixel ray wins. Frame 2
/// sees every object moved by ego (R, t) and by its own motion.
SyntheticScene synth_scene(const SceneSpec& spec);

/// Feature grid of (H / stride) x (W / stride) x feature_dim: one constant
/// vector per surface (sampled at each cell's centre pixel) plus noise.
FeatureMap synth_features(const SyntheticScene& scene, const SceneSpec& spec);

/// Softened ground truth: p(true) = clean_true_prob and the remainder on a
/// rival class; a `confusion` fraction of object pixels instead get
/// p(true) = corrupt_true_prob. The rival of an object pixel is the
/// background class.
PredictionMap synth_predictions(const SyntheticScene& scene, const SceneSpec& spec);

/// Per-pixel argmax with ties to the smaller class index.
LabelMap argmax_labels(const PredictionMap& pred);

}  // namespace moda
