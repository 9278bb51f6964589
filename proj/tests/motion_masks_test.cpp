#include <gtest/gtest.h>

#include "flood_fill.hpp"
#include "moda/motion_masks.hpp"
#include "test_support.hpp"

namespace moda {
namespace {

TEST(ExtractBinaryMask, ZeroMotionIsEmpty) {
  EXPECT_EQ(mask_area(extract_binary_mask(MotionMap(5, 5, 3), 0.01f)), 0);
}

TEST(ExtractBinaryMask, AnyVersusAll) {
  MotionMap m(2, 2, 3);
  m(0, 0, 0) = 0.5f;
  m(0, 0, 2) = 0.2f;
  EXPECT_EQ(extract_binary_mask(m, 0.1f, MaskMode::Any), test::mask_from(2, 2, {1, 0, 0, 0}));
  EXPECT_EQ(mask_area(extract_binary_mask(m, 0.1f, MaskMode::All)), 0);
  m(0, 0, 1) = -0.3f;
  EXPECT_EQ(extract_binary_mask(m, 0.1f, MaskMode::All), test::mask_from(2, 2, {1, 0, 0, 0}));
}

TEST(ExtractBinaryMask, ThresholdIsStrict) {
  MotionMap m(1, 1, 3);
  m(0, 0, 0) = 0.5f;
  EXPECT_EQ(mask_area(extract_binary_mask(m, 0.5f)), 0);
  EXPECT_THROW(extract_binary_mask(m, -1.0f), DomainError);
}

TEST(MaskMode, Parsing) {
  EXPECT_EQ(parse_mask_mode("all"), MaskMode::All);
  EXPECT_EQ(parse_mask_mode("ANY"), MaskMode::Any);
  EXPECT_THROW(parse_mask_mode("some"), DomainError);
  EXPECT_THROW(connectivity_from_int(6), DomainError);
}

TEST(LabelComponents, Trivial) {
  const auto none = label_components(BinaryMask(3, 3));
  EXPECT_EQ(none.count, 0u);
  const auto all = label_components(BinaryMask(3, 3, 1, 1));
  EXPECT_EQ(all.count, 1u);
  for (auto v : all.labels.data()) EXPECT_EQ(v, 1u);
}

TEST(LabelComponents, DiagonalBlobs) {
  const auto m = test::mask_from(4, 4, {1, 1, 0, 0,
                                        1, 1, 0, 0,
                                        0, 0, 1, 1,
                                        0, 0, 1, 1});
  EXPECT_EQ(label_components(m, Connectivity::Eight).count, 1u);
  const auto four = label_components(m, Connectivity::Four);
  EXPECT_EQ(four.count, 2u);
  EXPECT_EQ(four.labels(0, 0), 1u);
  EXPECT_EQ(four.labels(3, 3), 2u);
}

TEST(LabelComponents, FirstEncounterOrder) {
  // A U shape merges late in the raster scan; ids must still be 1..count.
  const auto m = test::mask_from(3, 5, {1, 0, 1, 0, 1,
                                        1, 0, 1, 0, 0,
                                        1, 1, 1, 0, 0});
  const auto cl = label_components(m, Connectivity::Four);
  EXPECT_EQ(cl.count, 2u);
  EXPECT_EQ(cl.labels(0, 0), 1u);
  EXPECT_EQ(cl.labels(0, 2), 1u);
  EXPECT_EQ(cl.labels(0, 4), 2u);
}

TEST(LabelComponents, MatchesFloodFill) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = test::random_mask(rng, 16, 16, 0.2 + 0.5 * (trial % 5) / 4.0);
    for (int conn : {4, 8}) {
      const auto ours = label_components(m, connectivity_from_int(conn));
      const auto oracle = test::flood_fill(m, conn);
      ASSERT_TRUE(test::same_partition(ours.labels, oracle)) << "trial " << trial << " conn " << conn;
      ASSERT_EQ(ours.labels, oracle);
    }
  }
}

TEST(SplitInstances, Cases) {
  EXPECT_EQ(split_instances(label_components(BinaryMask(4, 4)), 0).count(), 0u);

  BinaryMask m(20, 20);
  for (Index r = 0; r < 10; ++r) {
    for (Index c = 0; c < 10; ++c) m(r, c) = 1;
  }
  m(15, 15) = m(15, 16) = m(16, 15) = 1;
  const auto cl = label_components(m);
  const auto kept = split_instances(cl, 10);
  ASSERT_EQ(kept.count(), 1u);
  EXPECT_EQ(mask_area(kept.masks[0]), 100);
  EXPECT_EQ(kept.component_ids[0], 1u);
}

TEST(SplitInstances, ZeroMinAreaPartitionsTheMask) {
  std::mt19937 rng(8);
  const auto m = test::random_mask(rng, 16, 16, 0.4);
  const auto set = split_instances(label_components(m), 0);
  BinaryMask uni(16, 16);
  for (const auto& inst : set.masks) {
    for (std::size_t i = 0; i < uni.data().size(); ++i) {
      ASSERT_FALSE(uni.data()[i] && inst.data()[i]) << "instances overlap";
      uni.data()[i] |= inst.data()[i];
    }
  }
  EXPECT_EQ(uni, m);
}

}  // namespace
}  // namespace moda
