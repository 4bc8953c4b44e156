#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "colordet/boxes.hpp"
#include "support/oracles.hpp"

using namespace colordet;
using colordet::testing::nms_reference;

namespace {

Box random_box(std::mt19937& rng, double extent = 20) {
  std::uniform_real_distribution<double> pos(0, extent), size(extent / 40, extent / 2);
  const double x = pos(rng), y = pos(rng);
  return {x, y, x + size(rng), y + size(rng)};
}

}  // namespace

TEST(Anchors, SingleCell) {
  BoxSet a = gen_anchors(1, 1, AnchorConfig{{16}, {1.0}, 16});
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a.boxes[0], (Box{0, 0, 16, 16}));
}

TEST(Anchors, CountAndCenters) {
  AnchorConfig cfg;
  cfg.stride = 8;
  BoxSet a = gen_anchors(2, 2, cfg);
  ASSERT_EQ(a.size(), 36u);
  // Last anchor belongs to cell (1,1).
  EXPECT_NEAR(a.boxes.back().cx(), 12.0, 1e-12);
  EXPECT_NEAR(a.boxes.back().cy(), 12.0, 1e-12);
}

TEST(Anchors, AspectPreservesArea) {
  for (double r : {0.5, 1.0, 2.0, 3.0}) {
    BoxSet a = gen_anchors(1, 1, AnchorConfig{{40}, {r}, 16});
    EXPECT_NEAR(a.boxes[0].height() / a.boxes[0].width(), r, 1e-12);
    EXPECT_NEAR(a.boxes[0].area(), 1600.0, 1e-9);
  }
}

TEST(Iou, Examples) {
  const Box a{0, 0, 2, 2};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, Box{5, 5, 6, 6}), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, Box{2, 0, 4, 2}), 0.0);
  EXPECT_NEAR(iou(a, Box{1, 1, 3, 3}), 1.0 / 7.0, 1e-15);
}

TEST(Iou, SymmetricAndBounded) {
  std::mt19937 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const Box a = random_box(rng), b = random_box(rng);
    const double v = iou(a, b);
    EXPECT_EQ(v, iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_NEAR(iou(a, a), 1.0, 1e-15);
  }
}

TEST(Encode, Examples) {
  const Box anchor{-5, -5, 5, 5};
  const BoxDelta z = encode(anchor, anchor);
  EXPECT_EQ(z.dx, 0.0);
  EXPECT_EQ(z.dy, 0.0);
  EXPECT_EQ(z.dw, 0.0);
  EXPECT_EQ(z.dh, 0.0);
  const BoxDelta d = encode(Box{0, -5, 10, 5}, anchor);
  EXPECT_DOUBLE_EQ(d.dx, 0.5);
  EXPECT_DOUBLE_EQ(d.dy, 0.0);
  EXPECT_DOUBLE_EQ(d.dw, 0.0);
  EXPECT_DOUBLE_EQ(d.dh, 0.0);
}

TEST(Encode, RoundTrip) {
  // Size ratios stay below 20, inside the decode clamp of 62.5.
  std::mt19937 rng(2);
  for (int i = 0; i < 2000; ++i) {
    const Box b = random_box(rng, 200), a = random_box(rng, 200);
    const Box r = decode(encode(b, a), a);
    const double scale = std::max({std::abs(b.x1), std::abs(b.x2), std::abs(b.y1),
                                   std::abs(b.y2), 1.0});
    EXPECT_NEAR(r.x1, b.x1, 1e-9 * scale);
    EXPECT_NEAR(r.y1, b.y1, 1e-9 * scale);
    EXPECT_NEAR(r.x2, b.x2, 1e-9 * scale);
    EXPECT_NEAR(r.y2, b.y2, 1e-9 * scale);
  }
}

TEST(Decode, ClampsAndClips) {
  const Box anchor{0, 0, 16, 16};
  const Box huge = decode({0, 0, 1e6, 1e6}, anchor);
  EXPECT_NEAR(huge.width(), 1000.0, 1e-9);
  EXPECT_TRUE(std::isfinite(huge.x2));
  const Box clipped = decode({0, 0, 1e6, 1e6}, anchor, ImageSize{100, 50});
  EXPECT_EQ(clipped, (Box{0, 0, 100, 50}));
}

TEST(Nms, Examples) {
  const std::vector<Box> one{{0, 0, 1, 1}};
  const std::vector<double> s1{0.3};
  EXPECT_EQ(nms(one, s1, 0.5), (std::vector<std::size_t>{0}));

  const std::vector<Box> twin{{0, 0, 4, 4}, {0, 0, 4, 4}};
  const std::vector<double> s2{0.9, 0.8};
  EXPECT_EQ(nms(twin, s2, 0.5), (std::vector<std::size_t>{0}));

  const std::vector<Box> apart{{0, 0, 1, 1}, {5, 5, 6, 6}};
  EXPECT_EQ(nms(apart, s2, 0.5).size(), 2u);
}

TEST(Nms, TiesGoToLowerIndex) {
  const std::vector<Box> twin{{0, 0, 4, 4}, {0, 0, 4, 4}};
  const std::vector<double> s{0.7, 0.7};
  EXPECT_EQ(nms(twin, s, 0.5), (std::vector<std::size_t>{0}));
}

TEST(Nms, MatchesBruteForceFuzz) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> count(0, 8), coarse(0, 4);
  for (int trial = 0; trial < 20000; ++trial) {
    const int n = count(rng);
    std::vector<Box> boxes;
    std::vector<double> scores;
    for (int i = 0; i < n; ++i) {
      boxes.push_back(random_box(rng, 12));
      scores.push_back(coarse(rng) / 4.0);  // coarse scores force ties
    }
    const double thresh = coarse(rng) / 4.0;
    ASSERT_EQ(nms(boxes, scores, thresh), nms_reference(boxes, scores, thresh))
        << "trial " << trial;
  }
}

TEST(Assign, Examples) {
  const std::vector<Box> gt{{0, 0, 10, 10}};
  const std::vector<Box> anchors{{0, 0, 10, 10}, {50, 50, 60, 60}};
  Assignment a = assign_labels(anchors, gt);
  EXPECT_EQ(a.labels[0], AnchorLabel::Foreground);
  EXPECT_EQ(a.matched_gt[0], 0);
  EXPECT_EQ(a.labels[1], AnchorLabel::Background);
  EXPECT_EQ(a.matched_gt[1], -1);

  // [0,0,10,10] vs [0,0,10,5]: IoU 0.5, ignored because the exact anchor is
  // the gt's best match.
  const std::vector<Box> three{{0, 0, 10, 10}, {0, 0, 10, 5}, {50, 50, 60, 60}};
  a = assign_labels(three, gt, 0.3, 0.7);
  EXPECT_NEAR(a.max_iou[1], 0.5, 1e-12);
  EXPECT_EQ(a.labels[1], AnchorLabel::Ignore);
}

TEST(Assign, EmptyGtAllBackground) {
  const std::vector<Box> anchors{{0, 0, 1, 1}, {2, 2, 3, 3}};
  Assignment a = assign_labels(anchors, {});
  for (auto l : a.labels) EXPECT_EQ(l, AnchorLabel::Background);
}

TEST(Assign, BestAnchorForcedForeground) {
  const std::vector<Box> gt{{0, 0, 10, 10}};
  const std::vector<Box> anchors{{0, 0, 10, 4}, {30, 30, 40, 40}};
  Assignment a = assign_labels(anchors, gt);
  EXPECT_EQ(a.labels[0], AnchorLabel::Foreground);
  EXPECT_EQ(a.matched_gt[0], 0);
}

TEST(Assign, EveryOverlappedGtGetsForeground) {
  std::mt19937 rng(4);
  std::uniform_int_distribution<int> count(1, 6);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Box> anchors, gt;
    for (int i = count(rng); i > 0; --i) anchors.push_back(random_box(rng, 30));
    for (int i = count(rng); i > 0; --i) gt.push_back(random_box(rng, 30));
    const Assignment a = assign_labels(anchors, gt);
    for (std::size_t g = 0; g < gt.size(); ++g) {
      bool overlapped = false, matched = false;
      for (std::size_t k = 0; k < anchors.size(); ++k) {
        if (iou(anchors[k], gt[g]) > 0) overlapped = true;
        if (a.labels[k] == AnchorLabel::Foreground && a.matched_gt[k] == static_cast<int>(g))
          matched = true;
      }
      if (overlapped) {
        // The forced match may be claimed by a different gt that shares the
        // same best anchor at a higher IoU; every anchor attaining this gt's
        // best IoU must at least be foreground.
        double best = 0;
        for (const auto& an : anchors) best = std::max(best, iou(an, gt[g]));
        bool any_fg_at_best = false;
        for (std::size_t k = 0; k < anchors.size(); ++k)
          if (iou(anchors[k], gt[g]) == best && a.labels[k] == AnchorLabel::Foreground)
            any_fg_at_best = true;
        EXPECT_TRUE(matched || any_fg_at_best) << "trial " << trial << " gt " << g;
      }
    }
  }
}
