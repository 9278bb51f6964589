#include "moda/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include "moda/image_io.hpp"
#include "moda/losses.hpp"
#include "moda/npy.hpp"
#include "moda/toml_lite.hpp"

namespace fs = std::filesystem;

namespace moda {

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string lower_extension(const std::string& path) {
  auto ext = fs::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json iou_json(const IouReport& report) {
  nlohmann::json per_class = nlohmann::json::array();
  for (double v : report.per_class) per_class.push_back(number_or_null(v));
  return {{"per_class_iou", per_class}, {"miou", number_or_null(report.mean)}};
}

std::string frame_number(std::size_t i) {
  std::ostringstream ss;
  ss << std::setw(3) << std::setfill('0') << i;
  return ss.str();
}

/// Runs `task(i)` for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& task) {
  const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::vector<std::string> sorted_files(const std::string& dir, const std::string& prefix,
                                      const std::string& extension) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: '" + dir + "'");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && entry.path().extension() == extension) {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

Vector3<double> vec3(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(what) + " must be a 3-array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json vec3_json(const Vector3<double>& v) {
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

std::string resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path.string() : (base / path).string();
}

}  // namespace

// ---------------------------------------------------------------- config

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError(what); };
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) fail("epsilon must be finite and >= 0");
  if (connectivity != 4 && connectivity != 8) fail("connectivity must be 4 or 8");
  if (min_area < 0) fail("min_area must be >= 0");
  if (!(tau >= 0.0 && tau <= 1.0)) fail("tau must lie in [0, 1]");
  if (query_grid < 1 || query_grid > 64) fail("query_grid must lie in [1, 64]");
  if (!(nms_iou > 0.0 && nms_iou <= 1.0)) fail("nms_iou must lie in (0, 1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be finite and >= 0");
  if (moving_classes.empty()) fail("moving_classes must not be empty");
  for (int c : moving_classes) {
    if (c < 0 || c > 254) fail("moving_classes entries must lie in [0, 254]");
  }
  if (ignore_label < 0 || ignore_label > 255) fail("ignore_label must lie in [0, 255]");
}

void apply_config(PipelineConfig& config, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a table/object");
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "epsilon") {
        config.epsilon = value.get<double>();
      } else if (key == "mask_mode") {
        config.mask_mode = parse_mask_mode(value.get<std::string>());
      } else if (key == "connectivity") {
        config.connectivity = value.get<int>();
      } else if (key == "min_area") {
        config.min_area = value.get<Index>();
      } else if (key == "tau") {
        config.tau = value.get<double>();
      } else if (key == "query_grid") {
        config.query_grid = value.get<Index>();
      } else if (key == "nms_iou") {
        config.nms_iou = value.get<double>();
      } else if (key == "lambda") {
        config.lambda = value.get<double>();
      } else if (key == "moving_classes") {
        config.moving_classes = value.get<std::vector<int>>();
      } else if (key == "ignore_label") {
        config.ignore_label = value.get<int>();
      } else if (key == "paths") {
        if (!value.is_object()) throw ConfigError("paths must be a table");
        for (const auto& [pkey, pvalue] : value.items()) {
          if (pkey != "out_dir") throw ConfigError("unknown config key 'paths." + pkey + "'");
          config.out_dir = pvalue.get<std::string>();
        }
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  config.validate();
}

nlohmann::json config_to_json(const PipelineConfig& config) {
  return {{"epsilon", config.epsilon},
          {"mask_mode", to_string(config.mask_mode)},
          {"connectivity", config.connectivity},
          {"min_area", config.min_area},
          {"tau", config.tau},
          {"query_grid", config.query_grid},
          {"nms_iou", config.nms_iou},
          {"lambda", config.lambda},
          {"moving_classes", config.moving_classes},
          {"ignore_label", config.ignore_label},
          {"paths", {{"out_dir", config.out_dir}}}};
}

PipelineConfig load_config(const std::string& path) {
  const std::string text = read_text(path);
  const std::string ext = lower_extension(path);
  nlohmann::json doc;
  if (ext == ".toml") {
    doc = parse_toml(text);
  } else if (ext == ".json") {
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path + ": " + e.what());
    }
  } else {
    doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) doc = parse_toml(text);
  }
  PipelineConfig config;
  apply_config(config, doc);
  return config;
}

// ---------------------------------------------------------------- manifest

FrameRecord frame_record_from_json(const nlohmann::json& doc) {
  static const std::set<std::string> known = {
      "frame_id", "motion_path", "feature_path", "pred_path",   "pseudo_path", "gt_path",
      "flow_path", "frame1_path", "frame2_path", "depth_path", "ego",         "intrinsics"};
  if (!doc.is_object()) throw ConfigError("manifest record must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw ConfigError("unknown manifest key '" + key + "'");
  }
  FrameRecord rec;
  try {
    rec.frame_id = doc.at("frame_id").get<std::string>();
    auto opt = [&](const char* key) -> std::optional<std::string> {
      if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
      return doc.at(key).get<std::string>();
    };
    rec.motion_path = opt("motion_path").value_or("");
    rec.feature_path = opt("feature_path").value_or("");
    rec.pred_path = opt("pred_path").value_or("");
    rec.pseudo_path = opt("pseudo_path").value_or("");
    rec.gt_path = opt("gt_path");
    rec.flow_path = opt("flow_path");
    rec.frame1_path = opt("frame1_path");
    rec.frame2_path = opt("frame2_path");
    rec.depth_path = opt("depth_path");
    if (doc.contains("ego")) {
      EgoPose ego;
      const auto& e = doc.at("ego");
      if (e.contains("rotation")) ego.rotation = vec3(e.at("rotation"), "ego.rotation");
      if (e.contains("translation")) ego.translation = vec3(e.at("translation"), "ego.translation");
      rec.ego = ego;
    }
    if (doc.contains("intrinsics")) {
      const auto& k = doc.at("intrinsics");
      rec.intrinsics = Intrinsics{k.at("fx").get<double>(), k.at("fy").get<double>(),
                                  k.at("cx").get<double>(), k.at("cy").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest record: ") + e.what());
  }
  if (rec.frame_id.empty()) throw ConfigError("manifest record has an empty frame_id");
  if (rec.frame_id.find_first_of("/\\") != std::string::npos || rec.frame_id == "." ||
      rec.frame_id == "..") {
    throw ConfigError("frame_id '" + rec.frame_id + "' must be a plain file name");
  }
  return rec;
}

nlohmann::json frame_record_to_json(const FrameRecord& rec) {
  nlohmann::json doc = {{"frame_id", rec.frame_id},
                        {"motion_path", rec.motion_path},
                        {"feature_path", rec.feature_path},
                        {"pred_path", rec.pred_path},
                        {"pseudo_path", rec.pseudo_path}};
  auto put = [&](const char* key, const std::optional<std::string>& v) {
    if (v) doc[key] = *v;
  };
  put("gt_path", rec.gt_path);
  put("flow_path", rec.flow_path);
  put("frame1_path", rec.frame1_path);
  put("frame2_path", rec.frame2_path);
  put("depth_path", rec.depth_path);
  if (rec.ego) {
    doc["ego"] = {{"rotation", vec3_json(rec.ego->rotation)},
                  {"translation", vec3_json(rec.ego->translation)}};
  }
  if (rec.intrinsics) {
    doc["intrinsics"] = {{"fx", rec.intrinsics->fx},
                         {"fy", rec.intrinsics->fy},
                         {"cx", rec.intrinsics->cx},
                         {"cy", rec.intrinsics->cy}};
  }
  return doc;
}

std::vector<FrameRecord> load_manifest(const std::string& path) {
  std::istringstream in(read_text(path));
  const fs::path base = fs::path(path).parent_path();
  std::vector<FrameRecord> records;
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": invalid JSON");
    }
    FrameRecord rec;
    try {
      rec = frame_record_from_json(doc);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(rec.frame_id).second) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": duplicate frame_id '" +
                        rec.frame_id + "'");
    }
    auto fix = [&](std::string& p) {
      if (!p.empty()) p = resolve(base, p);
    };
    auto fix_opt = [&](std::optional<std::string>& p) {
      if (p) fix(*p);
    };
    fix(rec.motion_path);
    fix(rec.feature_path);
    fix(rec.pred_path);
    fix(rec.pseudo_path);
    fix_opt(rec.gt_path);
    fix_opt(rec.flow_path);
    fix_opt(rec.frame1_path);
    fix_opt(rec.frame2_path);
    fix_opt(rec.depth_path);
    records.push_back(std::move(rec));
  }
  return records;
}

// ---------------------------------------------------------------- refinement

FrameRefinement refine_frame_from_motion(const MotionMap& motion, const FeatureMap& features,
                                         const PredictionMap& pred, const LabelMap& pseudo,
                                         const PipelineConfig& config) {
  require_same_extent(motion, pred, "motion/prediction");
  require_same_extent(pseudo, pred, "pseudo/prediction");
  const auto moving = config.moving();
  moving.validate(pred.channels());

  FrameRefinement out;
  const auto binary = extract_binary_mask(motion, static_cast<float>(config.epsilon), config.mask_mode);
  const auto components = label_components(binary, connectivity_from_int(config.connectivity));
  out.instances = split_instances(components, config.min_area);
  for (const auto& instance : out.instances.masks) {
    auto discovered = discover_objects(features, instance, config.discovery());
    out.fallbacks += discovered.fallback ? 1 : 0;
    for (auto& obj : discovered.objects) {
      out.objects.push_back(std::move(obj.mask));
      out.object_scores.push_back(obj.score);
    }
  }
  out.refined = refine_frame(pred, pseudo, out.objects, moving, static_cast<float>(config.lambda));
  return out;
}

std::size_t RunReport::failed() const {
  return static_cast<std::size_t>(
      std::count_if(frames.begin(), frames.end(), [](const FrameOutcome& f) { return !f.ok; }));
}

namespace {

nlohmann::json frames_json(const std::vector<FrameOutcome>& outcomes) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : outcomes) {
    nlohmann::json entry = {{"frame_id", f.frame_id}, {"status", f.ok ? "ok" : "failed"}};
    if (!f.ok) entry["error"] = f.error;
    for (const auto& [key, value] : f.details.items()) entry[key] = value;
    frames.push_back(std::move(entry));
  }
  return frames;
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) throw IoError("output directory not set");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir + "'");
}

}  // namespace

RunReport run_refine(const std::vector<FrameRecord>& manifest, const PipelineConfig& config,
                     const std::string& out_dir, int jobs) {
  config.validate();
  ensure_dir(out_dir);
  RunReport report;
  report.frames.resize(manifest.size());

  parallel_for(manifest.size(), jobs, [&](std::size_t i) {
    const auto& rec = manifest[i];
    auto& outcome = report.frames[i];
    outcome.frame_id = rec.frame_id;
    try {
      const auto motion = load_motion(rec.motion_path);
      const auto features = load_features(rec.feature_path);
      const auto pred = load_prediction(rec.pred_path);
      const auto pseudo = load_label_png(rec.pseudo_path);
      validate_labels(pseudo, pred.channels());
      const auto result = refine_frame_from_motion(motion, features, pred, pseudo, config);

      const std::string file = rec.frame_id + ".png";
      save_label_png(result.refined, (fs::path(out_dir) / file).string());
      outcome.details = {{"refined", file},
                         {"M", result.instances.count()},
                         {"J", result.objects.size()},
                         {"fallbacks", result.fallbacks}};
      if (rec.gt_path) {
        const auto gt = load_label_png(*rec.gt_path);
        const auto classes = pred.channels();
        const auto ignore = static_cast<std::uint8_t>(config.ignore_label);
        const auto before = miou(confusion(gt, pseudo, classes, ignore));
        const auto after = miou(confusion(gt, result.refined, classes, ignore));
        outcome.details["miou_before"] = number_or_null(before.mean);
        outcome.details["miou_after"] = number_or_null(after.mean);
      }
      outcome.ok = true;
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.error = e.what();
      outcome.details = nlohmann::json::object();
    }
  });

  report.summary = {{"schema_version", kSchemaVersion},
                    {"command", "refine"},
                    {"config", config_to_json(config)},
                    {"frames", frames_json(report.frames)},
                    {"frames_total", manifest.size()},
                    {"frames_failed", report.failed()}};
  write_text((fs::path(out_dir) / "summary.json").string(), dump_json(report.summary));
  return report;
}

RunReport run_warp_check(const std::vector<FrameRecord>& manifest, const PipelineConfig& config,
                         const std::string& out_dir, int jobs) {
  config.validate();
  RunReport report;
  report.frames.resize(manifest.size());
  parallel_for(manifest.size(), jobs, [&](std::size_t i) {
    const auto& rec = manifest[i];
    auto& outcome = report.frames[i];
    outcome.frame_id = rec.frame_id;
    try {
      if (!rec.frame1_path || !rec.frame2_path || !rec.depth_path || !rec.ego || !rec.intrinsics) {
        throw ConfigError("warp-check needs frame1_path, frame2_path, depth_path, ego, intrinsics");
      }
      rec.ego->validate();
      const auto frame1 = load_image(*rec.frame1_path);
      const auto frame2 = load_image(*rec.frame2_path);
      const auto depth = load_depth(*rec.depth_path);
      const auto motion = rec.motion_path.empty() ? MotionMap(depth.height(), depth.width(), 3)
                                                  : load_motion(rec.motion_path);
      const auto warp = inverse_warp(frame2, depth, *rec.ego, motion, *rec.intrinsics);
      const double loss = photometric_loss(warp.image, frame1, warp.validity);
      outcome.details = {{"photometric_loss", loss},
                         {"valid_fraction", static_cast<double>(mask_area(warp.validity)) /
                                                static_cast<double>(std::max<Index>(1, depth.pixels()))}};
      outcome.ok = true;
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.error = e.what();
      outcome.details = nlohmann::json::object();
    }
  });
  report.summary = {{"schema_version", kSchemaVersion},
                    {"command", "warp-check"},
                    {"config", config_to_json(config)},
                    {"frames", frames_json(report.frames)},
                    {"frames_total", manifest.size()},
                    {"frames_failed", report.failed()}};
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    write_text((fs::path(out_dir) / "warp_report.json").string(), dump_json(report.summary));
  }
  return report;
}

// ---------------------------------------------------------------- synth

std::vector<SceneSpec> scene_specs_from_json(const nlohmann::json& doc) {
  std::vector<SceneSpec> specs;
  if (doc.is_object() && doc.contains("scenes")) {
    if (doc.size() != 1) throw SpecError("a scene list document may only hold 'scenes'");
    for (const auto& scene : doc.at("scenes")) specs.push_back(scene_spec_from_json(scene));
  } else {
    specs.push_back(scene_spec_from_json(doc));
  }
  if (specs.empty()) throw SpecError("scene document holds no scenes");
  return specs;
}

std::vector<SceneSpec> load_scene_specs(const std::string& path) {
  const std::string text = read_text(path);
  nlohmann::json doc;
  if (lower_extension(path) == ".toml") {
    doc = parse_toml(text);
  } else {
    doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw SpecError(path + ": invalid JSON");
  }
  return scene_specs_from_json(doc);
}

std::string run_synth(const std::vector<SceneSpec>& specs, const std::string& out_dir) {
  ensure_dir(out_dir);
  std::string manifest;
  nlohmann::json echo = nlohmann::json::array();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    const auto scene = synth_scene(spec);
    const auto features = synth_features(scene, spec);
    const auto pred = synth_predictions(scene, spec);
    const auto pseudo = argmax_labels(pred);

    const std::string id = "scene_" + frame_number(i);
    const fs::path dir = fs::path(out_dir) / id;
    ensure_dir(dir.string());
    save_tensor(scene.frame1, (dir / "frame1.npy").string());
    save_tensor(scene.frame2, (dir / "frame2.npy").string());
    save_tensor(scene.depth1, (dir / "depth.npy").string());
    save_tensor(scene.motion, (dir / "motion.npy").string());
    save_tensor(scene.gt_object_mask, (dir / "object_mask.npy").string());
    save_tensor(features, (dir / "features.npy").string());
    save_tensor(pred, (dir / "pred.npy").string());
    save_label_png(pseudo, (dir / "pseudo.png").string());
    save_label_png(scene.gt_labels, (dir / "gt.png").string());

    FrameRecord rec;
    rec.frame_id = id;
    rec.motion_path = id + "/motion.npy";
    rec.feature_path = id + "/features.npy";
    rec.pred_path = id + "/pred.npy";
    rec.pseudo_path = id + "/pseudo.png";
    rec.gt_path = id + "/gt.png";
    rec.frame1_path = id + "/frame1.npy";
    rec.frame2_path = id + "/frame2.npy";
    rec.depth_path = id + "/depth.npy";
    rec.ego = scene.ego;
    rec.intrinsics = scene.intrinsics;
    manifest += frame_record_to_json(rec).dump() + "\n";
    echo.push_back(scene_spec_to_json(spec));
  }
  write_text((fs::path(out_dir) / "scenes.json").string(),
             dump_json({{"schema_version", kSchemaVersion}, {"scenes", echo}}));
  const auto manifest_path = (fs::path(out_dir) / "manifest.jsonl").string();
  write_text(manifest_path, manifest);
  return manifest_path;
}

// ---------------------------------------------------------------- single-step subcommands

nlohmann::json run_masks(const std::string& motion_path, const PipelineConfig& config,
                         const std::string& out_dir) {
  config.validate();
  ensure_dir(out_dir);
  const auto motion = load_motion(motion_path);
  const auto binary = extract_binary_mask(motion, static_cast<float>(config.epsilon), config.mask_mode);
  const auto components = label_components(binary, connectivity_from_int(config.connectivity));
  const auto instances = split_instances(components, config.min_area);
  save_tensor(components.labels, (fs::path(out_dir) / "components.npy").string());

  nlohmann::json listing = nlohmann::json::array();
  for (std::size_t m = 0; m < instances.count(); ++m) {
    const std::string file = "instance_" + frame_number(m) + ".npy";
    save_tensor(instances.masks[m], (fs::path(out_dir) / file).string());
    listing.push_back({{"file", file},
                       {"component", instances.component_ids[m]},
                       {"area", mask_area(instances.masks[m])}});
  }
  nlohmann::json summary = {{"schema_version", kSchemaVersion},
                            {"components", components.count},
                            {"M", instances.count()},
                            {"instances", listing}};
  write_text((fs::path(out_dir) / "instances.json").string(), dump_json(summary));
  return summary;
}

nlohmann::json run_discover(const std::string& features_path, const std::string& instance_dir,
                            const PipelineConfig& config, const std::string& out_dir) {
  config.validate();
  ensure_dir(out_dir);
  const auto features = load_features(features_path);
  const auto instance_files = sorted_files(instance_dir, "instance_", ".npy");

  nlohmann::json objects = nlohmann::json::array();
  for (std::size_t m = 0; m < instance_files.size(); ++m) {
    const auto instance = load_mask(instance_files[m]);
    const auto result = discover_objects(features, instance, config.discovery());
    for (std::size_t j = 0; j < result.objects.size(); ++j) {
      const std::string file = "object_" + frame_number(m) + "_" + frame_number(j) + ".npy";
      save_tensor(result.objects[j].mask, (fs::path(out_dir) / file).string());
      objects.push_back({{"file", file},
                         {"instance", fs::path(instance_files[m]).filename().string()},
                         {"score", result.objects[j].score},
                         {"area", mask_area(result.objects[j].mask)},
                         {"fallback", result.fallback}});
    }
  }
  nlohmann::json manifest = {{"schema_version", kSchemaVersion},
                             {"config", config_to_json(config)},
                             {"J", objects.size()},
                             {"objects", objects}};
  write_text((fs::path(out_dir) / "objects.json").string(), dump_json(manifest));
  return manifest;
}

void run_refine_single(const std::string& pred_path, const std::string& pseudo_path,
                       const std::string& objects_dir, const PipelineConfig& config,
                       const std::string& out_path) {
  config.validate();
  const auto pred = load_prediction(pred_path);
  const auto pseudo = load_label_png(pseudo_path);
  validate_labels(pseudo, pred.channels());
  const auto moving = config.moving();
  moving.validate(pred.channels());
  std::vector<BinaryMask> objects;
  for (const auto& file : sorted_files(objects_dir, "object_", ".npy")) {
    objects.push_back(load_mask(file));
  }
  save_label_png(refine_frame(pred, pseudo, objects, moving, static_cast<float>(config.lambda)), out_path);
}

nlohmann::json run_eval(const std::string& gt_dir, const std::string& pred_dir, Index classes,
                        int ignore_label) {
  if (classes < 1 || classes > 255) throw ConfigError("classes must lie in [1, 255]");
  if (ignore_label < 0 || ignore_label > 255) throw ConfigError("ignore label must lie in [0, 255]");
  ConfusionMatrix total = ConfusionMatrix::Zero(classes, classes);
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& gt_file : sorted_files(gt_dir, "", ".png")) {
    const auto name = fs::path(gt_file).filename();
    const auto gt = load_label_png(gt_file);
    const auto pred = load_label_png((fs::path(pred_dir) / name).string());
    const auto cm = confusion(gt, pred, classes, static_cast<std::uint8_t>(ignore_label));
    total += cm;
    frames.push_back({{"file", name.string()}, {"miou", number_or_null(miou(cm).mean)}});
  }
  const auto report = miou(total);
  nlohmann::json counts = nlohmann::json::array();
  for (Index c = 0; c < classes; ++c) counts.push_back(total.row(c).sum());
  nlohmann::json out = iou_json(report);
  out["schema_version"] = kSchemaVersion;
  out["pixel_counts"] = counts;
  out["classes"] = classes;
  out["frames"] = frames;
  return out;
}

std::string dump_json(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) throw IoError("empty output path");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace moda
