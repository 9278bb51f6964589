#include <gtest/gtest.h>

#include <fstream>

#include "moda/pipeline.hpp"
#include "moda/toml_lite.hpp"
#include "test_support.hpp"

namespace moda {
namespace {

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

TEST(Toml, Subset) {
  const auto doc = parse_toml(R"(
# pipeline
epsilon = 0.05
mask_mode = "all"   # trailing comment
min_area = 1_000
moving_classes = [
  11, 12,  # people
  13,
]
[paths]
out_dir = 'out # not a comment'
[a.b]
flag = true
)");
  EXPECT_DOUBLE_EQ(doc["epsilon"].get<double>(), 0.05);
  EXPECT_EQ(doc["mask_mode"], "all");
  EXPECT_EQ(doc["min_area"], 1000);
  EXPECT_EQ(doc["moving_classes"], nlohmann::json({11, 12, 13}));
  EXPECT_EQ(doc["paths"]["out_dir"], "out # not a comment");
  EXPECT_EQ(doc["a"]["b"]["flag"], true);
}

TEST(Toml, Errors) {
  EXPECT_THROW(parse_toml("x = "), ConfigError);
  EXPECT_THROW(parse_toml("x = 1\nx = 2"), ConfigError);
  EXPECT_THROW(parse_toml("x = {a = 1}"), ConfigError);
  EXPECT_THROW(parse_toml("just words"), ConfigError);
  EXPECT_THROW(parse_toml("x = \"open"), ConfigError);
  try {
    parse_toml("a = 1\n\nb = 1.2.3");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(Config, DefaultsAreValid) {
  const PipelineConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.connectivity, 8);
  EXPECT_EQ(c.min_area, 64);
  EXPECT_DOUBLE_EQ(c.lambda, 0.8);
}

TEST(Config, LoadsTomlAndJson) {
  const auto dir = test::scratch_dir();
  write(dir / "c.toml", "lambda = 0.6\nconnectivity = 4\n[paths]\nout_dir = \"o\"\n");
  const auto t = load_config((dir / "c.toml").string());
  EXPECT_DOUBLE_EQ(t.lambda, 0.6);
  EXPECT_EQ(t.connectivity, 4);
  EXPECT_EQ(t.out_dir, "o");

  write(dir / "c.json", R"({"tau": 0.25, "moving_classes": [13]})");
  const auto j = load_config((dir / "c.json").string());
  EXPECT_DOUBLE_EQ(j.tau, 0.25);
  EXPECT_EQ(j.moving_classes, std::vector<int>{13});

  write(dir / "c.cfg", "nms_iou = 0.7\n");
  EXPECT_DOUBLE_EQ(load_config((dir / "c.cfg").string()).nms_iou, 0.7);
}

TEST(Config, Rejections) {
  PipelineConfig c;
  EXPECT_THROW(apply_config(c, {{"lamda", 0.8}}), ConfigError);
  EXPECT_THROW(apply_config(c, {{"connectivity", 6}}), ConfigError);
  EXPECT_THROW(apply_config(c, {{"tau", 1.5}}), ConfigError);
  EXPECT_THROW(apply_config(c, {{"nms_iou", 0.0}}), ConfigError);
  EXPECT_THROW(apply_config(c, {{"epsilon", -1.0}}), ConfigError);
  EXPECT_THROW(apply_config(c, {{"mask_mode", "some"}}), ConfigError);
  EXPECT_THROW(apply_config(c, {{"min_area", "big"}}), ConfigError);
  EXPECT_THROW(apply_config(c, {{"moving_classes", nlohmann::json::array()}}), ConfigError);
  EXPECT_THROW(apply_config(c, {{"paths", {{"in_dir", "x"}}}}), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  PipelineConfig c;
  apply_config(c, {{"epsilon", 0.02}, {"mask_mode", "all"}, {"paths", {{"out_dir", "x"}}}});
  PipelineConfig d;
  apply_config(d, config_to_json(c));
  EXPECT_EQ(config_to_json(d), config_to_json(c));
  EXPECT_EQ(config_to_json(c)["epsilon"].dump(), "0.02");
}

TEST(Manifest, ParsesAndResolvesPaths) {
  const auto dir = test::scratch_dir();
  write(dir / "m.jsonl",
        R"({"frame_id": "a", "motion_path": "a/m.npy", "feature_path": "/abs/f.npy", "pred_path": "p.npy", "pseudo_path": "s.png", "ego": {"rotation": [0, 0.1, 0], "translation": [1, 2, 3]}, "intrinsics": {"fx": 1, "fy": 2, "cx": 3, "cy": 4}}

{"frame_id": "b", "motion_path": "m.npy", "feature_path": "f.npy", "pred_path": "p.npy", "pseudo_path": "s.png", "gt_path": "g.png"}
)");
  const auto m = load_manifest((dir / "m.jsonl").string());
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].motion_path, (dir / "a/m.npy").string());
  EXPECT_EQ(m[0].feature_path, "/abs/f.npy");
  ASSERT_TRUE(m[0].ego);
  EXPECT_DOUBLE_EQ(m[0].ego->rotation.y(), 0.1);
  EXPECT_DOUBLE_EQ(m[0].intrinsics->cy, 4.0);
  EXPECT_FALSE(m[0].gt_path);
  EXPECT_EQ(*m[1].gt_path, (dir / "g.png").string());

  const auto j = frame_record_to_json(m[0]);
  EXPECT_EQ(frame_record_to_json(frame_record_from_json(j)), j);
}

TEST(Manifest, Rejections) {
  const auto dir = test::scratch_dir();
  write(dir / "dup.jsonl", "{\"frame_id\": \"a\"}\n{\"frame_id\": \"a\"}\n");
  EXPECT_THROW(load_manifest((dir / "dup.jsonl").string()), ConfigError);
  write(dir / "bad.jsonl", "{\"frame_id\": \"a\"\n");
  EXPECT_THROW(load_manifest((dir / "bad.jsonl").string()), ConfigError);
  EXPECT_THROW(frame_record_from_json({{"frame_id", "a"}, {"colour", 1}}), ConfigError);
  EXPECT_THROW(frame_record_from_json({{"frame_id", "../x"}}), ConfigError);
  EXPECT_THROW(frame_record_from_json({{"motion_path", "m"}}), ConfigError);
  EXPECT_THROW(load_manifest((dir / "missing.jsonl").string()), IoError);
}

}  // namespace
}  // namespace moda
