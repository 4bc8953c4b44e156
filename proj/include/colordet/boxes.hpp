#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace colordet {

/// Axis-aligned box in pixel corner coordinates; valid when x2 > x1 and y2 > y1.
struct Box {
  double x1 = 0;
  double y1 = 0;
  double x2 = 0;
  double y2 = 0;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() * height(); }
  double cx() const noexcept { return 0.5 * (x1 + x2); }
  double cy() const noexcept { return 0.5 * (y1 + y2); }
  bool valid() const noexcept { return x2 > x1 && y2 > y1; }
  bool operator==(const Box&) const = default;
};

/// Parallel arrays: boxes, class ids and (optionally) scores.
struct BoxSet {
  std::vector<Box> boxes;
  std::vector<int> labels;
  std::vector<double> scores;

  std::size_t size() const noexcept { return boxes.size(); }
};

struct AnchorConfig {
  std::vector<double> scales{64, 128, 256};  // side length of the square anchor
  std::vector<double> ratios{0.5, 1.0, 2.0}; // h / w
  double stride = 16;
};

/// Regression target relative to an anchor.
struct BoxDelta {
  double dx = 0;
  double dy = 0;
  double dw = 0;
  double dh = 0;
};

struct ImageSize {
  double width = 0;
  double height = 0;
};

/// Upper bound applied to dw/dh before exponentiation in decode.
inline const double kMaxLogScale = std::log(1000.0 / 16.0);

/// Anchors for every (row, col, scale, ratio), in that nesting order. Each
/// anchor keeps area scale^2 and is centered at ((col+0.5)s, (row+0.5)s).
BoxSet gen_anchors(int feature_h, int feature_w, const AnchorConfig& cfg);

double iou(const Box& a, const Box& b) noexcept;

BoxDelta encode(const Box& box, const Box& anchor);

/// Inverse of encode with dw/dh clamped at kMaxLogScale. When `clip_to` is
/// given the result is clipped to [0, width] x [0, height].
Box decode(const BoxDelta& delta, const Box& anchor,
           std::optional<ImageSize> clip_to = std::nullopt);

Box clip_box(const Box& b, ImageSize size) noexcept;

/// Greedy NMS. Returns kept indices in descending score order; equal scores
/// are visited in ascending index order. Boxes with IoU > iou_thresh against
/// a kept box are dropped.
std::vector<std::size_t> nms(std::span<const Box> boxes, std::span<const double> scores,
                             double iou_thresh);

enum class AnchorLabel { Background, Foreground, Ignore };

struct Assignment {
  std::vector<AnchorLabel> labels;
  std::vector<int> matched_gt;  // index into gt boxes, -1 for background
  std::vector<double> max_iou;
};

/// Max-IoU >= hi -> foreground, < lo -> background, otherwise ignore. Every
/// anchor that attains a gt's best (positive) IoU is forced to foreground for
/// that gt.
Assignment assign_labels(std::span<const Box> anchors, std::span<const Box> gt,
                         double lo = 0.3, double hi = 0.7);

}  // namespace colordet
