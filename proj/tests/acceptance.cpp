// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "flood_fill.hpp"
#include "moda/geometry.hpp"
#include "moda/image_io.hpp"
#include "moda/losses.hpp"
#include "moda/npy.hpp"
#include "moda/pipeline.hpp"
#include "nms_oracle.hpp"

namespace fs = std::filesystem;
using namespace moda;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void criterion(const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = dt < limit_s;
  const bool pass = out.ok && in_time;
  failures += pass ? 0 : 1;
  std::printf("%s  %-28s %7.3f s (limit %g s)  %s%s\n", pass ? "PASS" : "FAIL", name, dt, limit_s,
              out.detail.c_str(), in_time ? "" : "  [too slow]");
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

PredictionMap random_prediction(std::mt19937& rng, Index h, Index w, Index classes) {
  std::uniform_real_distribution<float> logit(-3.0f, 3.0f);
  PredictionMap p(h, w, classes);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      auto px = p.pixel(r, c);
      for (Index k = 0; k < classes; ++k) px[k] = std::exp(logit(rng));
      px /= px.sum();
    }
  }
  return p;
}

BinaryMask random_mask(std::mt19937& rng, Index h, Index w, double density) {
  std::bernoulli_distribution on(density);
  BinaryMask m(h, w);
  for (auto& v : m.data()) v = on(rng) ? 1 : 0;
  return m;
}

BinaryMask box(Index h, Index w, Index r0, Index c0, Index r1, Index c1) {
  BinaryMask m(h, w);
  for (Index r = r0; r < r1; ++r) {
    for (Index c = c0; c < c1; ++c) m(r, c) = 1;
  }
  return m;
}

/// The synthetic fixtures every fixture-level criterion runs on.
std::vector<SceneSpec> fixture_specs() {
  std::vector<SceneSpec> specs;
  specs.push_back(default_scene_spec());

  SceneSpec two = default_scene_spec();
  two.seed = 21;
  two.objects.push_back(SceneObject{8, 60, 24, 24, 12.0, {-0.2, 0.0, 0.3}, 17});
  specs.push_back(two);

  SceneSpec wide = default_scene_spec();
  wide.height = 80;
  wide.width = 160;
  wide.intrinsics = {120.0, 120.0, 79.5, 39.5};
  wide.seed = 5;
  wide.ego.rotation = {0.0, -0.02, 0.005};
  wide.ego.translation = {-0.2, 0.05, -0.8};
  wide.objects = {SceneObject{20, 20, 40, 28, 8.0, {0.4, 0.0, 0.2}, 11},
                  SceneObject{100, 36, 36, 36, 14.0, {0.0, 0.1, -0.6}, 15}};
  specs.push_back(wide);

  SceneSpec near = default_scene_spec();
  near.seed = 99;
  near.background_depth = 15.0;
  near.ego.rotation = {0.01, 0.0, 0.0};
  near.ego.translation = {0.0, 0.2, -0.3};
  near.objects = {SceneObject{36, 24, 48, 40, 6.0, {-0.3, 0.0, 0.0}, 14}};
  specs.push_back(near);
  return specs;
}

struct Fixture {
  SceneSpec spec;
  SyntheticScene scene;
  FeatureMap features;
  PredictionMap pred;
  LabelMap pseudo;
};

std::vector<Fixture> build_fixtures() {
  std::vector<Fixture> out;
  for (const auto& spec : fixture_specs()) {
    Fixture f{spec, synth_scene(spec), {}, {}, {}};
    f.features = synth_features(f.scene, spec);
    f.pred = synth_predictions(f.scene, spec);
    f.pseudo = argmax_labels(f.pred);
    out.push_back(std::move(f));
  }
  return out;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) files[e.path().filename().string()] = read_bytes(e.path());
  return files;
}

}  // namespace

int main() {
  const auto fixtures = build_fixtures();

  criterion("lambda0_identity", 1.0, [] {
    std::mt19937 rng(100);
    const auto moving = MovingCategorySet::cityscapes();
    for (int i = 0; i < 100; ++i) {
      const auto pred = random_prediction(rng, 8, 8, 19);
      const auto pseudo = argmax_labels(pred);
      LabelMap guide = pseudo;
      std::uniform_int_distribution<int> cls(11, 18);
      for (auto& v : guide.data()) v = static_cast<std::uint8_t>(cls(rng));
      const std::vector<BinaryMask> masks = {random_mask(rng, 8, 8, 0.5), random_mask(rng, 8, 8, 0.3)};
      if (!(refine_frame(pred, guide, masks, moving, 0.0f) == pseudo)) {
        return Outcome{false, "map " + std::to_string(i) + " differs from argmax"};
      }
    }
    return Outcome{true, "100/100 maps equal argmax"};
  });

  criterion("large_lambda_limit", 1.0, [&] {
    PipelineConfig config;
    config.lambda = 1e6;
    const auto moving = config.moving();
    Index checked = 0;
    for (const auto& f : fixtures) {
      const auto res = refine_frame_from_motion(f.scene.motion, f.features, f.pred, f.pseudo, config);
      if (res.objects.empty()) return Outcome{false, "fixture without object masks"};
      for (const auto& mask : res.objects) {
        const auto cstar = dominant_category(f.pseudo, mask, moving);
        if (!cstar) continue;
        for (Index r = 0; r < mask.height(); ++r) {
          for (Index c = 0; c < mask.width(); ++c) {
            if (!mask(r, c) || !(f.pred(r, c, *cstar) > 0.0f)) continue;
            ++checked;
            if (res.refined(r, c) != *cstar) {
              return Outcome{false, "pixel (" + std::to_string(r) + "," + std::to_string(c) + ") not c*"};
            }
          }
        }
      }
    }
    return Outcome{checked > 0, std::to_string(fixtures.size()) + " fixtures, " + std::to_string(checked) +
                                    " covered pixels all c*"};
  });

  criterion("components_vs_floodfill", 5.0, [] {
    std::mt19937 rng(2025);
    std::uniform_real_distribution<double> density(0.05, 0.8);
    for (int i = 0; i < 1000; ++i) {
      const auto m = random_mask(rng, 16, 16, density(rng));
      for (int conn : {4, 8}) {
        const auto ours = label_components(m, connectivity_from_int(conn));
        if (!test::same_partition(ours.labels, test::flood_fill(m, conn))) {
          return Outcome{false, "mask " + std::to_string(i) + " conn " + std::to_string(conn)};
        }
      }
    }
    return Outcome{true, "1000 masks x {4,8} partitions equal"};
  });

  criterion("nms_vs_bruteforce", 5.0, [] {
    std::mt19937 rng(31337);
    std::uniform_int_distribution<int> count(1, 20), coord(0, 15), level(0, 8);
    std::uniform_real_distribution<float> thr(0.05f, 1.0f);
    for (int s = 0; s < 500; ++s) {
      std::vector<ScoredMask> cands;
      const int n = count(rng);
      for (int k = 0; k < n; ++k) {
        int r0 = coord(rng), r1 = coord(rng), c0 = coord(rng), c1 = coord(rng);
        if (r0 > r1) std::swap(r0, r1);
        if (c0 > c1) std::swap(c0, c1);
        // Coarse score levels force frequent ties in score and area.
        cands.push_back({box(16, 16, r0, c0, r1 + 1, c1 + 1), 0.125f * static_cast<float>(level(rng)), k});
      }
      const float t = thr(rng);
      std::vector<Index> got;
      for (const auto& m : rank_and_nms(cands, t)) got.push_back(m.order);
      if (got != test::brute_force_nms(cands, t)) return Outcome{false, "set " + std::to_string(s)};
    }
    return Outcome{true, "500 candidate sets identical"};
  });

  criterion("geometry", 5.0, [] {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> focal(50.0, 2000.0), centre(0.0, 1000.0), px(-200.0, 1200.0),
        depth(0.05, 200.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const Intrinsics K{focal(rng), focal(rng), centre(rng), centre(rng)};
      const double u = px(rng), v = px(rng);
      const auto uv = project(backproject(u, v, depth(rng), K), K);
      worst = std::max({worst, std::abs(uv.x() - u), std::abs(uv.y() - v)});
    }
    if (worst > 1e-5) return Outcome{false, fmt("round trip error %.3g px", worst)};

    const Intrinsics K{100.0, 100.0, 50.0, 50.0};
    EgoPose ego;
    ego.translation = {1.0, 0.0, 0.0};
    const auto uv = warp_coordinates(DepthMap(20, 30, 1, 10.0f), ego, MotionMap(20, 30, 3), K);
    double shift_err = 0.0;
    for (Index r = 0; r < 20; ++r) {
      for (Index c = 0; c < 30; ++c) {
        shift_err = std::max({shift_err, std::abs(uv(r, c, 0) - (c + 10.0)), std::abs(uv(r, c, 1) - r)});
      }
    }
    if (shift_err > 1e-4) return Outcome{false, fmt("shift error %.3g px", shift_err)};

    std::uniform_real_distribution<float> col(0.0f, 1.0f);
    ImageMap frame(24, 32, 3);
    for (auto& x : frame.data()) x = col(rng);
    const auto w = inverse_warp(frame, DepthMap(24, 32, 1, 7.0f), EgoPose{}, MotionMap(24, 32, 3), K);
    const double loss = photometric_loss(w.image, frame, w.validity);
    if (loss != 0.0) return Outcome{false, fmt("identity warp loss %.3g", loss)};
    return Outcome{true, fmt("max round trip %.2g px", worst) + fmt(", max shift err %.2g px", shift_err) +
                             ", identity loss 0"};
  });

  criterion("synthetic_end_to_end", 10.0, [&] {
    const auto& f = fixtures.front();
    const auto& gt = f.scene.gt_labels;
    const auto& obj = f.scene.gt_object_mask;
    Index n_obj = 0, corrupted = 0, eligible = 0, correct = 0;
    for (Index r = 0; r < gt.height(); ++r) {
      for (Index c = 0; c < gt.width(); ++c) {
        if (!obj(r, c)) continue;
        ++n_obj;
        corrupted += f.pseudo(r, c) != gt(r, c);
        if (f.pred(r, c, gt(r, c)) < 0.3f) return Outcome{false, "p(c*) < 0.3 under the mask"};
      }
    }
    const auto res = refine_frame_from_motion(f.scene.motion, f.features, f.pred, f.pseudo, PipelineConfig{});
    for (Index r = 0; r < gt.height(); ++r) {
      for (Index c = 0; c < gt.width(); ++c) {
        if (!obj(r, c)) continue;
        const int cstar = gt(r, c);
        float rival = 0.0f;
        for (Index k = 0; k < f.pred.channels(); ++k) {
          if (k != cstar) rival = std::max(rival, f.pred(r, c, k));
        }
        if (1.8f * f.pred(r, c, cstar) > rival) {
          ++eligible;
          correct += res.refined(r, c) == cstar;
        }
      }
    }
    const auto classes = f.pred.channels();
    const double before = miou(confusion(gt, f.pseudo, classes)).mean;
    const double after = miou(confusion(gt, res.refined, classes)).mean;
    std::ostringstream d;
    d << "corrupted " << corrupted << "/" << n_obj << ", eligible " << eligible << ", correct " << correct
      << fmt(", mIoU %.4f", before) << fmt(" -> %.4f", after);
    const bool ok = std::abs(static_cast<double>(corrupted) / static_cast<double>(n_obj) - 0.3) < 0.01 &&
                    eligible == n_obj && correct == eligible && after > before;
    return Outcome{ok, d.str()};
  });

  criterion("warp_ordering", 10.0, [&] {
    double worst_margin = std::numeric_limits<double>::infinity();
    int perturbed = 0;
    for (const auto& f : fixtures) {
      const auto& s = f.scene;
      auto loss = [&](const EgoPose& pose) {
        const auto w = inverse_warp(s.frame2, s.depth1, pose, s.motion, s.intrinsics);
        return photometric_loss(w.image, s.frame1, w.validity);
      };
      const double truth = loss(s.ego);
      for (int axis = 0; axis < 3; ++axis) {
        for (double sign : {-1.0, 1.0}) {
          EgoPose t = s.ego;
          t.translation[axis] += sign * 0.5;
          EgoPose r = s.ego;
          r.rotation[axis] += sign * 0.05;
          for (const auto& pose : {t, r}) {
            ++perturbed;
            worst_margin = std::min(worst_margin, loss(pose) - truth);
          }
        }
      }
    }
    return Outcome{worst_margin > 0.0, std::to_string(fixtures.size()) + " fixtures x 12 perturbations" +
                                           fmt(", min loss gap %.4f", worst_margin)};
  });

  criterion("cosine_invariances", 1.0, [] {
    std::mt19937 rng(7);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f), scale(0.01f, 100.0f);
    std::uniform_int_distribution<int> dim(1, 64);
    double worst_sym = 0.0, worst_scale = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const int v = dim(rng);
      Eigen::MatrixXf a(1, v), b(1, v);
      for (int j = 0; j < v; ++j) {
        a(0, j) = u(rng);
        b(0, j) = u(rng);
      }
      a(0, 0) += a(0, 0) >= 0 ? 0.1f : -0.1f;
      b(0, 0) += b(0, 0) >= 0 ? 0.1f : -0.1f;
      const double ab = objectness_scores(a, b)(0, 0);
      worst_sym = std::max(worst_sym, std::abs(ab - objectness_scores(b, a)(0, 0)));
      worst_scale = std::max(worst_scale, std::abs(ab - objectness_scores(scale(rng) * a, scale(rng) * b)(0, 0)));
    }
    return Outcome{worst_sym <= 1e-6 && worst_scale <= 1e-6,
                   fmt("max symmetry err %.2g", worst_sym) + fmt(", max scale err %.2g", worst_scale)};
  });

  criterion("ofr_loss", 1.0, [] {
    std::mt19937 rng(3);
    const auto p = random_prediction(rng, 6, 6, 4);
    const double same = ofr_loss(p, p, FlowField(6, 6, 2));
    FlowField flow(6, 6, 2);
    std::uniform_real_distribution<float> u(-3.0f, 3.0f);
    for (auto& x : flow.data()) x = u(rng);
    PredictionMap constant(6, 6, 4, 0.25f);
    const double flat = ofr_loss(constant, constant, flow);

    auto halves = [](Index boundary) {
      PredictionMap h(4, 4, 2, 0.0f);
      for (Index r = 0; r < 4; ++r) {
        for (Index c = 0; c < 4; ++c) h(r, c, c < boundary ? 0 : 1) = 1.0f;
      }
      return h;
    };
    FlowField one(4, 4, 2);
    for (Index r = 0; r < 4; ++r) {
      for (Index c = 0; c < 4; ++c) one(r, c, 0) = 1.0f;
    }
    const double shifted = ofr_loss(halves(2), halves(3), one);
    const double boundary = ofr_loss(halves(2), halves(2), one);
    const double want = std::sqrt(2.0) / 3.0;
    const bool ok = same == 0.0 && flat == 0.0 && shifted == 0.0 && std::abs(boundary - want) <= 1e-5;
    return Outcome{ok, fmt("zero cases %g", same + flat + shifted) + fmt(", 4x4 %.6f", boundary) +
                           fmt(" vs %.6f", want)};
  });

  criterion("determinism", 10.0, [] {
    const auto root = fs::temp_directory_path() / "moda_acceptance";
    fs::remove_all(root);
    const auto manifest = load_manifest(run_synth(fixture_specs(), (root / "fixture").string()));
    const auto out = (root / "out").string();
    run_refine(manifest, PipelineConfig{}, out, 1);
    const auto first = snapshot(out);
    run_refine(manifest, PipelineConfig{}, out, 1);
    const auto second = snapshot(out);
    run_refine(manifest, PipelineConfig{}, out, 4);
    const auto threaded = snapshot(out);
    fs::remove_all(root);
    const bool ok = first.size() == manifest.size() + 1 && first == second && first == threaded;
    return Outcome{ok, std::to_string(first.size()) + " files byte-identical across 3 runs (jobs 1,1,4)"};
  });

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
