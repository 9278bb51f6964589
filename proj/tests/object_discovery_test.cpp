#include <gtest/gtest.h>

#include <set>

#include "moda/object_discovery.hpp"
#include "nms_oracle.hpp"
#include "test_support.hpp"

namespace moda {
namespace {

FeatureMap constant_features(Index h, Index w, Index v) {
  FeatureMap f(h, w, v, 0.0f);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) f(r, c, 0) = 1.0f;
  }
  return f;
}

BinaryMask rect(Index h, Index w, Index r0, Index c0, Index r1, Index c1) {
  BinaryMask m(h, w);
  for (Index r = r0; r < r1; ++r) {
    for (Index c = c0; c < c1; ++c) m(r, c) = 1;
  }
  return m;
}

ScoredMask scored(BinaryMask m, float s, Index order) { return {std::move(m), s, order}; }

TEST(SelectMaskedFeatures, FullMaskTakesEverything) {
  const auto sel = select_masked_features(constant_features(4, 5, 3), BinaryMask(16, 20, 1, 1));
  EXPECT_EQ(sel.count(), 20);
  EXPECT_EQ(sel.vectors.rows(), 20);
  EXPECT_EQ(sel.vectors.cols(), 3);
}

TEST(SelectMaskedFeatures, EmptyMaskThrows) {
  EXPECT_THROW(select_masked_features(constant_features(4, 4, 2), BinaryMask(16, 16)), EmptySelection);
}

TEST(SelectMaskedFeatures, TopLeftQuadrant) {
  const auto sel = select_masked_features(constant_features(4, 4, 2), rect(16, 16, 0, 0, 8, 8));
  const std::vector<GridPos> want = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  EXPECT_EQ(sel.positions, want);
}

TEST(BuildQueries, GridSizes) {
  const auto sel = select_masked_features(constant_features(4, 4, 2), BinaryMask(4, 4, 1, 1));
  const auto one = build_queries(sel, 1);
  ASSERT_EQ(one.count(), 1);
  EXPECT_EQ(sel.positions[static_cast<std::size_t>(one.entries[0])], (GridPos{1, 1}));

  const auto four = build_queries(sel, 2);
  ASSERT_EQ(four.count(), 4);
  std::set<std::pair<Index, Index>> quadrants;
  for (auto e : four.entries) {
    const auto p = sel.positions[static_cast<std::size_t>(e)];
    quadrants.emplace(p.row / 2, p.col / 2);
  }
  EXPECT_EQ(quadrants.size(), 4u);
  EXPECT_EQ(four.vectors.rows(), 4);
}

TEST(BuildQueries, SingleEntry) {
  const auto sel = select_masked_features(constant_features(4, 4, 2), rect(4, 4, 2, 3, 3, 4));
  for (Index g : {1, 3, 8}) EXPECT_EQ(build_queries(sel, g).count(), 1);
}

TEST(ObjectnessScores, Cosines) {
  Eigen::MatrixXf q(1, 2), k(3, 2);
  q << 1, 0;
  k << 1, 0, 0, 1, 1, 1;
  const auto s = objectness_scores(q, k);
  EXPECT_NEAR(s(0, 0), 1.0f, 1e-6);
  EXPECT_NEAR(s(0, 1), 0.0f, 1e-6);
  EXPECT_NEAR(s(0, 2), 0.70711f, 1e-5);
}

TEST(ObjectnessScores, Errors) {
  Eigen::MatrixXf q = Eigen::MatrixXf::Zero(1, 2), k = Eigen::MatrixXf::Ones(1, 2);
  EXPECT_THROW(objectness_scores(q, k), DomainError);
  EXPECT_THROW(objectness_scores(k, Eigen::MatrixXf::Ones(1, 3)), DomainError);
}

TEST(ObjectnessScores, ScaleInvariantAndSymmetric) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f), s(0.01f, 100.0f);
  for (int i = 0; i < 200; ++i) {
    Eigen::MatrixXf a(1, 16), b(1, 16);
    for (Index j = 0; j < 16; ++j) {
      a(0, j) = u(rng);
      b(0, j) = u(rng);
    }
    const float ab = objectness_scores(a, b)(0, 0);
    EXPECT_NEAR(ab, objectness_scores(b, a)(0, 0), 1e-6);
    EXPECT_NEAR(ab, objectness_scores(s(rng) * a, s(rng) * b)(0, 0), 1e-6);
  }
}

MaskedFeatures row_keys(Index n) {
  MaskedFeatures keys;
  keys.grid_height = 1;
  keys.grid_width = n;
  for (Index c = 0; c < n; ++c) keys.positions.push_back({0, c});
  keys.vectors = Eigen::MatrixXf::Ones(n, 1);
  return keys;
}

TEST(MasksFromScores, NormalisedThreshold) {
  Eigen::MatrixXf s(1, 3);
  s << 1.0f, 0.5f, 0.0f;
  const auto masks = masks_from_scores(s, row_keys(3), 0.5f);
  ASSERT_EQ(masks.size(), 1u);
  EXPECT_EQ(masks[0].mask, test::mask_from(1, 3, {1, 1, 0}));
  EXPECT_NEAR(masks[0].score, 0.75f, 1e-6);

  const auto all = masks_from_scores(s, row_keys(3), 0.0f);
  EXPECT_EQ(all[0].mask, test::mask_from(1, 3, {1, 1, 1}));
}

TEST(MasksFromScores, ConstantRowKeepsEverything) {
  Eigen::MatrixXf s(1, 1);
  s << 0.3f;
  const auto masks = masks_from_scores(s, row_keys(1), 0.5f);
  ASSERT_EQ(masks.size(), 1u);
  EXPECT_EQ(mask_area(masks[0].mask), 1);
  EXPECT_FLOAT_EQ(masks[0].score, 1.0f);
}

TEST(RankAndNms, Cases) {
  const auto a = rect(4, 4, 0, 0, 2, 2);
  const auto b = rect(4, 4, 2, 2, 4, 4);
  EXPECT_EQ(rank_and_nms({scored(a, 0.1f, 0)}, 0.5f).size(), 1u);

  const auto dup = rank_and_nms({scored(a, 0.8f, 0), scored(a, 0.9f, 1)}, 0.5f);
  ASSERT_EQ(dup.size(), 1u);
  EXPECT_FLOAT_EQ(dup[0].score, 0.9f);

  EXPECT_EQ(rank_and_nms({scored(a, 0.1f, 0), scored(b, 0.9f, 1)}, 0.5f).size(), 2u);
  EXPECT_EQ(rank_and_nms({scored(a, 1.0f, 0), scored(a, 1.0f, 1)}, 1.0f).size(), 1u);
  EXPECT_THROW(rank_and_nms({}, 0.0f), DomainError);
}

TEST(RankAndNms, MatchesBruteForce) {
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> count(1, 20), coord(0, 7);
  std::uniform_int_distribution<int> level(0, 4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ScoredMask> cands;
    const int n = count(rng);
    for (int k = 0; k < n; ++k) {
      int r0 = coord(rng), r1 = coord(rng), c0 = coord(rng), c1 = coord(rng);
      if (r0 > r1) std::swap(r0, r1);
      if (c0 > c1) std::swap(c0, c1);
      cands.push_back(scored(rect(8, 8, r0, c0, r1 + 1, c1 + 1), 0.25f * static_cast<float>(level(rng)), k));
    }
    const float thr = trial % 2 ? 0.5f : 0.3f;
    std::vector<Index> got;
    for (const auto& m : rank_and_nms(cands, thr)) got.push_back(m.order);
    ASSERT_EQ(got, test::brute_force_nms(cands, thr)) << "trial " << trial;
  }
}

TEST(DiscoverObjects, IdenticalFeaturesGiveTheInstance) {
  const auto inst = rect(32, 32, 8, 8, 24, 28);
  const auto res = discover_objects(constant_features(8, 8, 4), inst);
  ASSERT_EQ(res.objects.size(), 1u);
  EXPECT_EQ(res.objects[0].mask, inst);
}

TEST(DiscoverObjects, TwoObjectsInOneMotionMask) {
  // Rider over motorcycle: one connected motion mask, two feature clusters.
  FeatureMap f(8, 8, 3, 0.0f);
  for (Index r = 0; r < 8; ++r) {
    for (Index c = 0; c < 8; ++c) f(r, c, 2) = 1.0f;
  }
  const auto rider = rect(32, 32, 4, 8, 16, 20);
  const auto bike = rect(32, 32, 16, 8, 28, 20);
  for (Index r = 1; r < 4; ++r) {
    for (Index c = 2; c < 5; ++c) {
      f(r, c, 2) = 0.0f;
      f(r, c, 0) = 1.0f;
    }
  }
  for (Index r = 4; r < 7; ++r) {
    for (Index c = 2; c < 5; ++c) {
      f(r, c, 2) = 0.0f;
      f(r, c, 1) = 1.0f;
    }
  }
  BinaryMask inst(32, 32);
  for (std::size_t i = 0; i < inst.data().size(); ++i) inst.data()[i] = rider.data()[i] | bike.data()[i];

  const auto res = discover_objects(f, inst);
  EXPECT_FALSE(res.fallback);
  ASSERT_EQ(res.objects.size(), 2u);
  const bool straight = res.objects[0].mask == rider;
  EXPECT_EQ(res.objects[straight ? 0 : 1].mask, rider);
  EXPECT_EQ(res.objects[straight ? 1 : 0].mask, bike);
}

TEST(DiscoverObjects, SubPixelInstanceFallsBack) {
  const auto inst = rect(32, 32, 0, 0, 1, 1);
  const auto res = discover_objects(constant_features(8, 8, 2), inst);
  EXPECT_TRUE(res.fallback);
  ASSERT_EQ(res.objects.size(), 1u);
  EXPECT_EQ(res.objects[0].mask, inst);
}

TEST(DiscoverObjects, ZeroFeaturesFallBack) {
  const auto inst = rect(16, 16, 0, 0, 8, 8);
  const auto res = discover_objects(FeatureMap(4, 4, 2, 0.0f), inst);
  EXPECT_TRUE(res.fallback);
  EXPECT_EQ(res.objects[0].mask, inst);
}

TEST(DiscoverObjects, ObjectsStayInsideTheInstance) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (int trial = 0; trial < 20; ++trial) {
    FeatureMap f(8, 8, 4);
    for (auto& v : f.data()) v = u(rng) + 0.01f;
    const auto inst = test::random_mask(rng, 32, 32, 0.6);
    for (const auto& o : discover_objects(f, inst).objects) {
      for (std::size_t i = 0; i < inst.data().size(); ++i) ASSERT_LE(o.mask.data()[i], inst.data()[i]);
      EXPECT_GT(o.area(), 0);
    }
  }
}

}  // namespace
}  // namespace moda
