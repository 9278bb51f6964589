// moda: motion-guided pseudo-label refinement tools.
//
// Exit codes: 0 success, 1 one or more frames/files failed, 2 invalid
// configuration or arguments.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include "moda/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

struct Overrides {
  std::string config_path;
  std::optional<double> epsilon;
  std::optional<std::string> mode;
  std::optional<int> connectivity;
  std::optional<moda::Index> min_area;
  std::optional<double> tau;
  std::optional<moda::Index> query_grid;
  std::optional<double> nms_iou;
  std::optional<double> lambda;
  std::optional<std::string> moving_classes;
  std::optional<std::string> out_dir;

  moda::PipelineConfig resolve() const {
    moda::PipelineConfig config =
        config_path.empty() ? moda::PipelineConfig{} : moda::load_config(config_path);
    nlohmann::json flags = nlohmann::json::object();
    if (epsilon) flags["epsilon"] = *epsilon;
    if (mode) flags["mask_mode"] = *mode;
    if (connectivity) flags["connectivity"] = *connectivity;
    if (min_area) flags["min_area"] = *min_area;
    if (tau) flags["tau"] = *tau;
    if (query_grid) flags["query_grid"] = *query_grid;
    if (nms_iou) flags["nms_iou"] = *nms_iou;
    if (lambda) flags["lambda"] = *lambda;
    if (moving_classes) flags["moving_classes"] = parse_csv(*moving_classes);
    if (out_dir) flags["paths"] = {{"out_dir", *out_dir}};
    moda::apply_config(config, flags);
    return config;
  }

  static std::vector<int> parse_csv(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      try {
        std::size_t used = 0;
        out.push_back(std::stoi(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw moda::ConfigError("moving classes must be comma-separated integers, got '" + item + "'");
      }
    }
    return out;
  }
};

void add_config_option(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "TOML or JSON pipeline config");
}

void add_mask_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--epsilon", o.epsilon, "motion magnitude threshold");
  cmd->add_option("--mode", o.mode, "any | all: components that must exceed epsilon");
  cmd->add_option("--connectivity", o.connectivity, "4 or 8");
  cmd->add_option("--min-area", o.min_area, "smallest kept instance, pixels");
}

void add_discovery_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--tau", o.tau, "objectness threshold in [0, 1]");
  cmd->add_option("--query-grid", o.query_grid, "query grid size g (at most g*g queries)");
  cmd->add_option("--nms-iou", o.nms_iou, "mask NMS IoU threshold");
}

void add_mining_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--lambda", o.lambda, "semantic mining weight");
  cmd->add_option("--moving-classes", o.moving_classes, "comma-separated moving class ids");
}

int default_jobs() {
  if (const char* env = std::getenv("MODA_JOBS")) {
    try {
      const int jobs = std::stoi(env);
      if (jobs >= 1) return jobs;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid MODA_JOBS='" << env << "'\n";
  }
  return 1;
}

std::string require_out_dir(const moda::PipelineConfig& config) {
  if (config.out_dir.empty()) throw moda::ConfigError("no output directory (--out-dir or paths.out_dir)");
  return config.out_dir;
}

void print_failures(const moda::RunReport& report) {
  for (const auto& f : report.frames) {
    if (!f.ok) std::cerr << "frame " << f.frame_id << " failed: " << f.error << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion-guided pseudo-label refinement"};
  app.require_subcommand(1);

  Overrides o;
  int jobs = default_jobs();

  std::string motion_path;
  auto* masks = app.add_subcommand("masks", "motion map -> component labels + instance masks");
  masks->add_option("--motion", motion_path, "H x W x 3 f32 motion NPY")->required();
  masks->add_option("--out-dir", o.out_dir, "output directory");
  add_mask_options(masks, o);
  add_config_option(masks, o);

  std::string features_path;
  std::string instance_dir;
  auto* discover = app.add_subcommand("discover", "instance masks + features -> object masks");
  discover->add_option("--features", features_path, "H' x W' x V f32 feature NPY")->required();
  discover->add_option("--instance-masks", instance_dir, "directory of instance_*.npy")->required();
  discover->add_option("--out-dir", o.out_dir, "output directory");
  add_discovery_options(discover, o);
  add_config_option(discover, o);

  std::string manifest_path;
  std::string pred_path;
  std::string pseudo_path;
  std::string objects_dir;
  std::string out_path;
  auto* refine = app.add_subcommand(
      "refine", "refine pseudo labels: one frame (--pred/--pseudo/--objects/--out) or a manifest");
  refine->add_option("--manifest", manifest_path, "JSON-lines frame manifest (batch mode)");
  refine->add_option("--pred", pred_path, "H x W x C f32 softmax NPY");
  refine->add_option("--pseudo", pseudo_path, "pseudo-label PNG");
  refine->add_option("--objects", objects_dir, "directory of object_*.npy masks");
  refine->add_option("--out", out_path, "refined label PNG");
  refine->add_option("--out-dir", o.out_dir, "batch output directory");
  refine->add_option("--jobs", jobs, "frames processed concurrently (default $MODA_JOBS or 1)");
  add_mask_options(refine, o);
  add_discovery_options(refine, o);
  add_mining_options(refine, o);
  add_config_option(refine, o);

  std::string gt_dir;
  std::string pred_dir;
  moda::Index classes = 19;
  int ignore = 255;
  std::string eval_out;
  auto* eval = app.add_subcommand("eval", "per-class IoU and mIoU of label PNGs");
  eval->add_option("--gt-dir", gt_dir, "ground-truth PNG directory")->required();
  eval->add_option("--pred-dir", pred_dir, "prediction PNG directory")->required();
  eval->add_option("--classes", classes, "number of classes");
  eval->add_option("--ignore", ignore, "ignore label");
  eval->add_option("--out", eval_out, "also write the JSON report here");

  auto* warp = app.add_subcommand("warp-check", "photometric loss of the inverse-warp reconstruction");
  warp->add_option("--manifest", manifest_path, "JSON-lines frame manifest")->required();
  warp->add_option("--out-dir", o.out_dir, "write warp_report.json here");
  warp->add_option("--jobs", jobs, "frames processed concurrently (default $MODA_JOBS or 1)");
  add_config_option(warp, o);

  std::string spec_path;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "render a synthetic fixture and its manifest");
  synth->add_option("--spec", spec_path, "scene spec (JSON or TOML); built-in default if omitted");
  synth->add_option("--out-dir", synth_out, "fixture directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (masks->parsed()) {
      const auto config = o.resolve();
      std::cout << moda::dump_json(moda::run_masks(motion_path, config, require_out_dir(config)));
      return kExitOk;
    }
    if (discover->parsed()) {
      const auto config = o.resolve();
      std::cout << moda::dump_json(
          moda::run_discover(features_path, instance_dir, config, require_out_dir(config)));
      return kExitOk;
    }
    if (refine->parsed()) {
      const auto config = o.resolve();
      if (!manifest_path.empty()) {
        const auto manifest = moda::load_manifest(manifest_path);
        const auto report = moda::run_refine(manifest, config, require_out_dir(config), jobs);
        print_failures(report);
        std::cout << moda::dump_json(report.summary);
        return report.exit_code();
      }
      if (pred_path.empty() || pseudo_path.empty() || objects_dir.empty() || out_path.empty()) {
        throw moda::ConfigError("refine needs --manifest, or all of --pred --pseudo --objects --out");
      }
      moda::run_refine_single(pred_path, pseudo_path, objects_dir, config, out_path);
      return kExitOk;
    }
    if (eval->parsed()) {
      const auto report = moda::run_eval(gt_dir, pred_dir, classes, ignore);
      const auto text = moda::dump_json(report);
      if (!eval_out.empty()) moda::write_text(eval_out, text);
      std::cout << text;
      return kExitOk;
    }
    if (warp->parsed()) {
      const auto config = o.resolve();
      const auto manifest = moda::load_manifest(manifest_path);
      const auto report = moda::run_warp_check(manifest, config, config.out_dir, jobs);
      print_failures(report);
      std::cout << moda::dump_json(report.summary);
      return report.exit_code();
    }
    if (synth->parsed()) {
      const auto specs = spec_path.empty() ? std::vector<moda::SceneSpec>{moda::default_scene_spec()}
                                           : moda::load_scene_specs(spec_path);
      std::cout << moda::run_synth(specs, synth_out) << "\n";
      return kExitOk;
    }
  } catch (const moda::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const moda::SpecError& e) {
    std::cerr << "invalid scene spec: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitOk;
}
