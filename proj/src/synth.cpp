#include "moda/synth.hpp"

#include <array>
#include <limits>
#include <numbers>
#include <random>
#include <set>

namespace moda {

namespace {

constexpr std::array<std::array<double, 3>, 6> kSurfaceBase = {{
    {0.45, 0.50, 0.55},
    {0.70, 0.35, 0.30},
    {0.30, 0.65, 0.35},
    {0.35, 0.40, 0.70},
    {0.65, 0.60, 0.30},
    {0.55, 0.35, 0.65},
}};
constexpr double kTextureAmplitude = 0.2;

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Smooth checkerboard: product of sines in frame-1 pixel coordinates, with a
/// per-surface phase so neighbouring planes do not share a pattern.
void texture(std::size_t surface, double u1, double v1, double period, float* rgb) {
  const auto& base = kSurfaceBase[surface % kSurfaceBase.size()];
  const double phase = 2.7 * static_cast<double>(surface);
  const double w = 2.0 * std::numbers::pi / period;
  const double a = std::sin(w * (u1 + phase));
  const double b = std::sin(w * (v1 - phase));
  const double c = std::sin(0.5 * w * (u1 + v1) + phase);
  rgb[0] = static_cast<float>(base[0] + kTextureAmplitude * a * b);
  rgb[1] = static_cast<float>(base[1] + kTextureAmplitude * (0.6 * a * b + 0.4 * c));
  rgb[2] = static_cast<float>(base[2] - kTextureAmplitude * (0.5 * a * b - 0.5 * c));
}

struct Surface {
  double depth;
  Vector3<double> motion;
  bool bounded;
  double u_min, u_max, v_min, v_max;  // frame-1 pixel footprint (half-open)
};

struct Render {
  ImageMap image;
  DepthMap depth;
  ComponentLabelMap surface;
};

/// Renders the view after applying (R, t) to every surface and each
/// surface's own motion on top: a frame-1 point P appears at R P + t + m.
Render render(const SceneSpec& spec, const std::vector<Surface>& surfaces, const Matrix3<double>& R,
              const Vector3<double>& t, bool apply_motion) {
  const auto& K = spec.intrinsics;
  const Matrix3<double> Rt = R.transpose();
  Render out{ImageMap(spec.height, spec.width, 3), DepthMap(spec.height, spec.width, 1),
             ComponentLabelMap(spec.height, spec.width, 1)};
  for (Index r = 0; r < spec.height; ++r) {
    for (Index c = 0; c < spec.width; ++c) {
      const Vector3<double> ray((static_cast<double>(c) - K.cx) / K.fx,
                                (static_cast<double>(r) - K.cy) / K.fy, 1.0);
      const Vector3<double> ray_back = Rt * ray;
      if (!(ray_back.z() > 0.0)) continue;
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_surface = 0;
      double best_u = 0.0;
      double best_v = 0.0;
      for (std::size_t s = 0; s < surfaces.size(); ++s) {
        const auto& surf = surfaces[s];
        const Vector3<double> offset = Rt * (apply_motion ? Vector3<double>(t + surf.motion) : t);
        const double along = (surf.depth + offset.z()) / ray_back.z();
        if (!(along > 0.0) || along >= best) continue;
        const Vector3<double> P = along * ray_back - offset;
        const double u1 = K.fx * P.x() / surf.depth + K.cx;
        const double v1 = K.fy * P.y() / surf.depth + K.cy;
        if (surf.bounded &&
            (u1 < surf.u_min || u1 >= surf.u_max || v1 < surf.v_min || v1 >= surf.v_max)) {
          continue;
        }
        best = along;
        best_surface = s;
        best_u = u1;
        best_v = v1;
      }
      if (!std::isfinite(best)) continue;
      texture(best_surface, best_u, best_v, spec.texture_period, &out.image(r, c, 0));
      out.depth(r, c) = static_cast<float>(best);
      out.surface(r, c) = static_cast<std::uint32_t>(best_surface);
    }
  }
  return out;
}

template <typename T>
T get_or(const nlohmann::json& doc, const char* key, T fallback) {
  return doc.contains(key) ? doc.at(key).get<T>() : fallback;
}

Vector3<double> vec3_from(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw SpecError(std::string(what) + " must be a 3-array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void reject_unknown(const nlohmann::json& doc, std::initializer_list<const char*> keys,
                    const char* where) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) throw SpecError(std::string(where) + ": unknown key '" + key + "'");
  }
}

}  // namespace

void SceneSpec::validate() const {
  if (height < 1 || width < 1) throw SpecError("scene size must be at least 1x1");
  if (!(background_depth > 0.0)) throw SpecError("background_depth must be > 0");
  if (num_classes < 2 || num_classes > 255) throw SpecError("num_classes must be in [2, 255]");
  if (background_class < 0 || background_class >= num_classes) {
    throw SpecError("background_class outside [0, num_classes)");
  }
  if (!(texture_period > 0.0)) throw SpecError("texture_period must be > 0");
  if (confusion < 0.0 || confusion > 1.0) throw SpecError("confusion must lie in [0, 1]");
  if (!(corrupt_true_prob > 0.0 && corrupt_true_prob <= 1.0) ||
      !(clean_true_prob > 0.0 && clean_true_prob <= 1.0)) {
    throw SpecError("class probabilities must lie in (0, 1]");
  }
  if (feature_stride < 1 || feature_dim < 1) throw SpecError("feature_stride/dim must be >= 1");
  if (feature_noise < 0.0) throw SpecError("feature_noise must be >= 0");
  try {
    intrinsics.validate();
    ego.validate();
  } catch (const DomainError& e) {
    throw SpecError(e.what());
  }
  for (std::size_t j = 0; j < objects.size(); ++j) {
    const auto& o = objects[j];
    const auto tag = "object " + std::to_string(j);
    if (o.width < 1 || o.height < 1) throw SpecError(tag + ": zero-area rectangle");
    const Index x0 = std::max<Index>(o.x, 0);
    const Index y0 = std::max<Index>(o.y, 0);
    const Index x1 = std::min<Index>(o.x + o.width, width);
    const Index y1 = std::min<Index>(o.y + o.height, height);
    if (x1 <= x0 || y1 <= y0) throw SpecError(tag + ": rectangle lies outside the image");
    if (!(o.depth > 0.0) || o.depth >= background_depth) {
      throw SpecError(tag + ": depth must lie in (0, background_depth)");
    }
    if (!o.motion.allFinite()) throw SpecError(tag + ": non-finite motion");
    if (o.class_id < 0 || o.class_id >= num_classes || o.class_id == background_class) {
      throw SpecError(tag + ": class_id must be a non-background class < num_classes");
    }
  }
}

SceneSpec default_scene_spec() {
  SceneSpec spec;
  SceneObject car;
  car.x = 48;
  car.y = 32;
  car.width = 32;
  car.height = 32;
  car.depth = 10.0;
  car.motion = Vector3<double>(0.3, 0.0, -0.4);
  car.class_id = 13;
  spec.objects.push_back(car);
  spec.ego.rotation = Vector3<double>(0.0, 0.01, 0.0);
  spec.ego.translation = Vector3<double>(0.1, 0.0, -0.5);
  return spec;
}

SceneSpec scene_spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SpecError("scene spec must be an object");
  reject_unknown(doc,
                 {"size", "background_depth", "background_class", "objects", "ego", "intrinsics",
                  "texture_period", "num_classes", "seed", "confusion", "corrupt_true_prob",
                  "clean_true_prob", "feature_stride", "feature_dim", "feature_noise"},
                 "scene");
  SceneSpec spec;
  try {
    if (doc.contains("size")) {
      const auto& size = doc.at("size");
      if (size.is_array() && size.size() == 2) {
        spec.height = size[0].get<Index>();
        spec.width = size[1].get<Index>();
      } else if (size.is_object()) {
        spec.height = size.at("height").get<Index>();
        spec.width = size.at("width").get<Index>();
      } else {
        throw SpecError("size must be [height, width] or {height, width}");
      }
    }
    spec.background_depth = get_or(doc, "background_depth", spec.background_depth);
    spec.background_class = get_or(doc, "background_class", spec.background_class);
    spec.texture_period = get_or(doc, "texture_period", spec.texture_period);
    spec.num_classes = get_or(doc, "num_classes", spec.num_classes);
    spec.seed = get_or(doc, "seed", spec.seed);
    spec.confusion = get_or(doc, "confusion", spec.confusion);
    spec.corrupt_true_prob = get_or(doc, "corrupt_true_prob", spec.corrupt_true_prob);
    spec.clean_true_prob = get_or(doc, "clean_true_prob", spec.clean_true_prob);
    spec.feature_stride = get_or(doc, "feature_stride", spec.feature_stride);
    spec.feature_dim = get_or(doc, "feature_dim", spec.feature_dim);
    spec.feature_noise = get_or(doc, "feature_noise", spec.feature_noise);

    spec.intrinsics = Intrinsics{100.0, 100.0, (static_cast<double>(spec.width) - 1.0) / 2.0,
                                 (static_cast<double>(spec.height) - 1.0) / 2.0};
    if (doc.contains("intrinsics")) {
      const auto& k = doc.at("intrinsics");
      reject_unknown(k, {"fx", "fy", "cx", "cy"}, "intrinsics");
      spec.intrinsics.fx = get_or(k, "fx", spec.intrinsics.fx);
      spec.intrinsics.fy = get_or(k, "fy", spec.intrinsics.fy);
      spec.intrinsics.cx = get_or(k, "cx", spec.intrinsics.cx);
      spec.intrinsics.cy = get_or(k, "cy", spec.intrinsics.cy);
    }
    if (doc.contains("ego")) {
      const auto& ego = doc.at("ego");
      reject_unknown(ego, {"rotation", "translation"}, "ego");
      if (ego.contains("rotation")) spec.ego.rotation = vec3_from(ego.at("rotation"), "ego.rotation");
      if (ego.contains("translation")) {
        spec.ego.translation = vec3_from(ego.at("translation"), "ego.translation");
      }
    }
    if (doc.contains("objects")) {
      for (const auto& o : doc.at("objects")) {
        reject_unknown(o, {"rect", "depth", "motion", "class_id"}, "object");
        SceneObject obj;
        const auto& rect = o.at("rect");
        if (!rect.is_array() || rect.size() != 4) throw SpecError("rect must be [x, y, width, height]");
        obj.x = rect[0].get<Index>();
        obj.y = rect[1].get<Index>();
        obj.width = rect[2].get<Index>();
        obj.height = rect[3].get<Index>();
        obj.depth = get_or(o, "depth", obj.depth);
        if (o.contains("motion")) obj.motion = vec3_from(o.at("motion"), "motion");
        obj.class_id = get_or(o, "class_id", obj.class_id);
        spec.objects.push_back(obj);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(std::string("scene spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

nlohmann::json scene_spec_to_json(const SceneSpec& spec) {
  auto vec = [](const Vector3<double>& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); };
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : spec.objects) {
    objects.push_back({{"rect", {o.x, o.y, o.width, o.height}},
                       {"depth", o.depth},
                       {"motion", vec(o.motion)},
                       {"class_id", o.class_id}});
  }
  return {{"size", {spec.height, spec.width}},
          {"background_depth", spec.background_depth},
          {"background_class", spec.background_class},
          {"objects", objects},
          {"ego", {{"rotation", vec(spec.ego.rotation)}, {"translation", vec(spec.ego.translation)}}},
          {"intrinsics",
           {{"fx", spec.intrinsics.fx},
            {"fy", spec.intrinsics.fy},
            {"cx", spec.intrinsics.cx},
            {"cy", spec.intrinsics.cy}}},
          {"texture_period", spec.texture_period},
          {"num_classes", spec.num_classes},
          {"seed", spec.seed},
          {"confusion", spec.confusion},
          {"corrupt_true_prob", spec.corrupt_true_prob},
          {"clean_true_prob", spec.clean_true_prob},
          {"feature_stride", spec.feature_stride},
          {"feature_dim", spec.feature_dim},
          {"feature_noise", spec.feature_noise}};
}

SyntheticScene synth_scene(const SceneSpec& spec) {
  spec.validate();
  std::vector<Surface> surfaces;
  surfaces.push_back({spec.background_depth, Vector3<double>::Zero(), false, 0, 0, 0, 0});
  for (const auto& o : spec.objects) {
    surfaces.push_back({o.depth, o.motion, true, static_cast<double>(o.x) - 0.5,
                        static_cast<double>(o.x + o.width) - 0.5, static_cast<double>(o.y) - 0.5,
                        static_cast<double>(o.y + o.height) - 0.5});
  }

  Render first = render(spec, surfaces, Matrix3<double>::Identity(), Vector3<double>::Zero(), false);
  Render second =
      render(spec, surfaces, rotation_matrix(spec.ego.rotation), spec.ego.translation, true);

  SyntheticScene scene;
  scene.frame1 = std::move(first.image);
  scene.frame2 = std::move(second.image);
  scene.depth1 = std::move(first.depth);
  scene.surface_ids = std::move(first.surface);
  scene.ego = spec.ego;
  scene.intrinsics = spec.intrinsics;
  scene.motion = MotionMap(spec.height, spec.width, 3);
  scene.gt_labels = LabelMap(spec.height, spec.width, 1, static_cast<std::uint8_t>(spec.background_class));
  scene.gt_object_mask = BinaryMask(spec.height, spec.width, 1);
  for (Index r = 0; r < spec.height; ++r) {
    for (Index c = 0; c < spec.width; ++c) {
      const auto s = scene.surface_ids(r, c);
      if (s == 0) continue;
      const auto& obj = spec.objects[s - 1];
      scene.motion.pixel(r, c) = obj.motion.cast<float>();
      scene.gt_labels(r, c) = static_cast<std::uint8_t>(obj.class_id);
      scene.gt_object_mask(r, c) = 1;
    }
  }
  return scene;
}

FeatureMap synth_features(const SyntheticScene& scene, const SceneSpec& spec) {
  const Index stride = spec.feature_stride;
  const Index fh = std::max<Index>(1, scene.surface_ids.height() / stride);
  const Index fw = std::max<Index>(1, scene.surface_ids.width() / stride);
  const Index dim = spec.feature_dim;
  std::mt19937_64 rng(spec.seed + 1);
  FeatureMap features(fh, fw, dim);
  for (Index r = 0; r < fh; ++r) {
    for (Index c = 0; c < fw; ++c) {
      const Index pr = std::min(r * stride + stride / 2, scene.surface_ids.height() - 1);
      const Index pc = std::min(c * stride + stride / 2, scene.surface_ids.width() - 1);
      const auto surface = static_cast<Index>(scene.surface_ids(pr, pc));
      for (Index k = 0; k < dim; ++k) {
        double v = 0.1 + (k == surface % dim ? 1.0 : 0.0);
        if (spec.feature_noise > 0.0) v += spec.feature_noise * (2.0 * unit_uniform(rng) - 1.0);
        features(r, c, k) = static_cast<float>(v);
      }
    }
  }
  return features;
}

PredictionMap synth_predictions(const SyntheticScene& scene, const SceneSpec& spec) {
  const auto& gt = scene.gt_labels;
  std::vector<Index> object_pixels;
  for (Index i = 0; i < gt.pixels(); ++i) {
    if (scene.gt_object_mask.data()[static_cast<std::size_t>(i)]) object_pixels.push_back(i);
  }
  // Fisher-Yates over raw engine output keeps the choice portable.
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = object_pixels.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(object_pixels[i - 1], object_pixels[j]);
  }
  const auto corrupted_count = static_cast<std::size_t>(
      std::llround(spec.confusion * static_cast<double>(object_pixels.size())));
  std::vector<std::uint8_t> corrupted(static_cast<std::size_t>(gt.pixels()), 0);
  for (std::size_t i = 0; i < corrupted_count; ++i) {
    corrupted[static_cast<std::size_t>(object_pixels[i])] = 1;
  }

  const int classes = spec.num_classes;
  const int background_rival = (spec.background_class + 1) % classes;
  PredictionMap pred(gt.height(), gt.width(), classes);
  for (Index r = 0; r < gt.height(); ++r) {
    for (Index c = 0; c < gt.width(); ++c) {
      const int truth = gt(r, c);
      const int rival = truth == spec.background_class ? background_rival : spec.background_class;
      const double p_true = corrupted[static_cast<std::size_t>(r * gt.width() + c)]
                                ? spec.corrupt_true_prob
                                : spec.clean_true_prob;
      pred(r, c, truth) = static_cast<float>(p_true);
      pred(r, c, rival) += static_cast<float>(1.0 - p_true);
    }
  }
  return pred;
}

LabelMap argmax_labels(const PredictionMap& pred) {
  LabelMap labels(pred.height(), pred.width(), 1);
  for (Index r = 0; r < pred.height(); ++r) {
    for (Index c = 0; c < pred.width(); ++c) {
      Index best = 0;
      for (Index k = 1; k < pred.channels(); ++k) {
        if (pred(r, c, k) > pred(r, c, best)) best = k;
      }
      labels(r, c) = static_cast<std::uint8_t>(best);
    }
  }
  return labels;
}

}  // namespace moda
