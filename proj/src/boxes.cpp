#include "colordet/boxes.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "colordet/error.hpp"

namespace colordet {

BoxSet gen_anchors(int feature_h, int feature_w, const AnchorConfig& cfg) {
  if (feature_h < 1 || feature_w < 1) throw InvalidInput("gen_anchors: dims must be >= 1");
  if (cfg.scales.empty() || cfg.ratios.empty())
    throw InvalidInput("gen_anchors: scales and ratios must be non-empty");
  if (!(cfg.stride >= 1)) throw InvalidInput("gen_anchors: stride must be >= 1");
  for (double s : cfg.scales)
    if (!(s > 0)) throw InvalidInput("gen_anchors: scales must be positive");
  for (double r : cfg.ratios)
    if (!(r > 0)) throw InvalidInput("gen_anchors: ratios must be positive");

  BoxSet out;
  out.boxes.reserve(static_cast<std::size_t>(feature_h) * feature_w * cfg.scales.size() *
                    cfg.ratios.size());
  for (int i = 0; i < feature_h; ++i)
    for (int j = 0; j < feature_w; ++j) {
      const double cx = (j + 0.5) * cfg.stride;
      const double cy = (i + 0.5) * cfg.stride;
      for (double s : cfg.scales)
        for (double r : cfg.ratios) {
          const double w = s / std::sqrt(r);
          const double h = s * std::sqrt(r);
          out.boxes.push_back({cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h});
        }
    }
  out.labels.assign(out.boxes.size(), -1);
  return out;
}

double iou(const Box& a, const Box& b) noexcept {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

BoxDelta encode(const Box& box, const Box& anchor) {
  if (!box.valid() || !anchor.valid()) throw InvalidInput("encode: degenerate box");
  const double wa = anchor.width(), ha = anchor.height();
  return {(box.cx() - anchor.cx()) / wa, (box.cy() - anchor.cy()) / ha,
          std::log(box.width() / wa), std::log(box.height() / ha)};
}

Box decode(const BoxDelta& d, const Box& anchor, std::optional<ImageSize> clip_to) {
  if (!anchor.valid()) throw InvalidInput("decode: degenerate anchor");
  const double wa = anchor.width(), ha = anchor.height();
  const double cx = anchor.cx() + d.dx * wa;
  const double cy = anchor.cy() + d.dy * ha;
  const double w = wa * std::exp(std::min(d.dw, kMaxLogScale));
  const double h = ha * std::exp(std::min(d.dh, kMaxLogScale));
  Box b{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
  if (clip_to) b = clip_box(b, *clip_to);
  return b;
}

Box clip_box(const Box& b, ImageSize size) noexcept {
  return {std::clamp(b.x1, 0.0, size.width), std::clamp(b.y1, 0.0, size.height),
          std::clamp(b.x2, 0.0, size.width), std::clamp(b.y2, 0.0, size.height)};
}

std::vector<std::size_t> nms(std::span<const Box> boxes, std::span<const double> scores,
                             double iou_thresh) {
  if (boxes.size() != scores.size())
    throw InvalidInput("nms: " + std::to_string(boxes.size()) + " boxes but " +
                       std::to_string(scores.size()) + " scores");
  if (!(iou_thresh >= 0 && iou_thresh <= 1))
    throw InvalidInput("nms: iou threshold must lie in [0, 1]");
  for (double s : scores)
    if (!std::isfinite(s)) throw InvalidInput("nms: scores must be finite");

  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<bool> suppressed(boxes.size(), false);
  std::vector<std::size_t> keep;
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t i = order[oi];
    if (suppressed[i]) continue;
    keep.push_back(i);
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const std::size_t j = order[oj];
      if (!suppressed[j] && iou(boxes[i], boxes[j]) > iou_thresh) suppressed[j] = true;
    }
  }
  return keep;
}

Assignment assign_labels(std::span<const Box> anchors, std::span<const Box> gt, double lo,
                         double hi) {
  if (!(lo >= 0 && lo <= hi && hi <= 1))
    throw InvalidInput("assign_labels: thresholds must satisfy 0 <= lo <= hi <= 1");
  Assignment a;
  a.labels.assign(anchors.size(), AnchorLabel::Background);
  a.matched_gt.assign(anchors.size(), -1);
  a.max_iou.assign(anchors.size(), 0.0);
  if (gt.empty()) return a;

  std::vector<double> gt_best(gt.size(), 0.0);
  std::vector<double> overlaps(anchors.size() * gt.size());
  for (std::size_t i = 0; i < anchors.size(); ++i)
    for (std::size_t g = 0; g < gt.size(); ++g) {
      const double v = iou(anchors[i], gt[g]);
      overlaps[i * gt.size() + g] = v;
      gt_best[g] = std::max(gt_best[g], v);
      if (v > a.max_iou[i]) {
        a.max_iou[i] = v;
        a.matched_gt[i] = static_cast<int>(g);
      }
    }

  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const double m = a.max_iou[i];
    if (m >= hi) {
      a.labels[i] = AnchorLabel::Foreground;
    } else if (m < lo) {
      a.labels[i] = AnchorLabel::Background;
      a.matched_gt[i] = -1;
    } else {
      a.labels[i] = AnchorLabel::Ignore;
    }
  }
  for (std::size_t g = 0; g < gt.size(); ++g) {
    if (gt_best[g] <= 0) continue;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      if (overlaps[i * gt.size() + g] != gt_best[g]) continue;
      // Keep an existing threshold-based foreground match intact.
      if (a.labels[i] == AnchorLabel::Foreground && a.max_iou[i] >= hi) continue;
      a.labels[i] = AnchorLabel::Foreground;
      a.matched_gt[i] = static_cast<int>(g);
    }
  }
  return a;
}

}  // namespace colordet
