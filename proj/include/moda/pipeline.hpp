#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moda/geometry.hpp"
#include "moda/grid.hpp"
#include "moda/motion_masks.hpp"
#include "moda/object_discovery.hpp"
#include "moda/semantic_mining.hpp"
#include "moda/synth.hpp"

namespace moda {

inline constexpr int kSchemaVersion = 1;

/// Every tunable of the refinement pipeline. Defaults are the documented ones.
struct PipelineConfig {
  double epsilon = 1e-2;
  MaskMode mask_mode = MaskMode::Any;
  int connectivity = 8;
  Index min_area = 64;
  double tau = 0.5;
  Index query_grid = 4;
  double nms_iou = 0.5;
  double lambda = 0.8;
  std::vector<int> moving_classes = {11, 12, 13, 14, 15, 16, 17, 18};
  int ignore_label = 255;
  std::string out_dir;  // [paths] out_dir

  /// Throws ConfigError when a field is outside its documented range.
  void validate() const;
  DiscoveryConfig discovery() const {
    return {static_cast<float>(tau), query_grid, static_cast<float>(nms_iou)};
  }
  MovingCategorySet moving() const { return MovingCategorySet(moving_classes); }
};

/// Overlays the keys of `doc` on `config`. Unknown keys raise ConfigError.
void apply_config(PipelineConfig& config, const nlohmann::json& doc);
nlohmann::json config_to_json(const PipelineConfig& config);

/// Loads a TOML (".toml") or JSON config file on top of the defaults. Other
/// extensions are tried as JSON first, then TOML.
PipelineConfig load_config(const std::string& path);

/// One line of a JSON-lines frame manifest. Relative paths are resolved
/// against the manifest's directory when loaded.
struct FrameRecord {
  std::string frame_id;
  std::string motion_path;
  std::string feature_path;
  std::string pred_path;
  std::string pseudo_path;
  std::optional<std::string> gt_path;
  std::optional<std::string> flow_path;
  std::optional<std::string> frame1_path;
  std::optional<std::string> frame2_path;
  std::optional<std::string> depth_path;
  std::optional<EgoPose> ego;
  std::optional<Intrinsics> intrinsics;
};

FrameRecord frame_record_from_json(const nlohmann::json& doc);
nlohmann::json frame_record_to_json(const FrameRecord& record);

/// Throws ConfigError on malformed lines or duplicate frame ids.
std::vector<FrameRecord> load_manifest(const std::string& path);

/// In-memory result of the full motion -> masks -> objects -> refinement chain.
struct FrameRefinement {
  LabelMap refined;
  InstanceMaskSet instances;
  std::vector<BinaryMask> objects;
  std::vector<float> object_scores;
  std::size_t fallbacks = 0;
};

FrameRefinement refine_frame_from_motion(const MotionMap& motion, const FeatureMap& features,
                                         const PredictionMap& pred, const LabelMap& pseudo,
                                         const PipelineConfig& config);

struct FrameOutcome {
  std::string frame_id;
  bool ok = false;
  std::string error;
  nlohmann::json details = nlohmann::json::object();
};

struct RunReport {
  std::vector<FrameOutcome> frames;
  nlohmann::json summary;

  std::size_t failed() const;
  int exit_code() const { return failed() ? 1 : 0; }
};

/// Refines every manifest frame, writing <out_dir>/<frame_id>.png and
/// <out_dir>/summary.json. A failing frame is recorded and skipped. Frames
/// run on up to `jobs` threads; results are merged in manifest order.
RunReport run_refine(const std::vector<FrameRecord>& manifest, const PipelineConfig& config,
                     const std::string& out_dir, int jobs = 1);

/// Per-frame photometric loss of the inverse-warp reconstruction; writes
/// <out_dir>/warp_report.json when out_dir is non-empty.
RunReport run_warp_check(const std::vector<FrameRecord>& manifest, const PipelineConfig& config,
                         const std::string& out_dir, int jobs = 1);

/// Parses a scene document: either one scene object or {"scenes": [...]}.
std::vector<SceneSpec> scene_specs_from_json(const nlohmann::json& doc);
std::vector<SceneSpec> load_scene_specs(const std::string& path);

/// Renders every scene into <out_dir>/scene_NNN/ and writes
/// <out_dir>/manifest.jsonl. Returns the manifest path.
std::string run_synth(const std::vector<SceneSpec>& specs, const std::string& out_dir);

/// `masks` subcommand: components.npy plus instance_NNN.npy per instance.
nlohmann::json run_masks(const std::string& motion_path, const PipelineConfig& config,
                         const std::string& out_dir);

/// `discover` subcommand: object_III_JJ.npy masks plus objects.json.
nlohmann::json run_discover(const std::string& features_path, const std::string& instance_dir,
                            const PipelineConfig& config, const std::string& out_dir);

/// `refine` subcommand on a single frame.
void run_refine_single(const std::string& pred_path, const std::string& pseudo_path,
                       const std::string& objects_dir, const PipelineConfig& config,
                       const std::string& out_path);

/// `eval` subcommand: accumulates one confusion matrix over every PNG of
/// gt_dir matched by file name in pred_dir.
nlohmann::json run_eval(const std::string& gt_dir, const std::string& pred_dir, Index classes,
                        int ignore_label);

/// Byte-exact JSON text used for every file the pipeline writes.
std::string dump_json(const nlohmann::json& doc);
void write_text(const std::string& path, const std::string& text);

}  // namespace moda
