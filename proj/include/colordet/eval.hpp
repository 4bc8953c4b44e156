#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "colordet/boxes.hpp"
#include "colordet/dataset.hpp"

namespace colordet {

inline constexpr double kConfidenceThreshold = 0.5;
inline constexpr double kMatchIou = 0.5;

struct Detection {
  std::string image_id;
  Box box;
  int class_id = 0;
  double score = 0;
};

struct GroundTruth {
  std::string image_id;
  Box box;
  int class_id = 0;
};

enum class MatchFlag { TruePositive, FalsePositive, BelowThreshold };

/// Greedy per-(image, class) matching. Predictions with score < conf_thresh
/// are flagged BelowThreshold and never matched. Within a group predictions
/// are visited by descending score (ties by index); each takes the unmatched
/// gt of its class with the highest IoU if that IoU >= iou_thresh.
std::vector<MatchFlag> match_detections(std::span<const Detection> preds,
                                        std::span<const GroundTruth> gts,
                                        double iou_thresh = kMatchIou,
                                        double conf_thresh = kConfidenceThreshold);

struct PrPoint {
  double precision = 0;
  double recall = 0;
  bool operator==(const PrPoint&) const = default;
};

/// Ranks by descending score (ties by index) and accumulates TP/FP.
/// n_gt == 0 gives an empty curve. BelowThreshold flags are rejected.
std::vector<PrPoint> pr_curve(std::span<const MatchFlag> flags,
                              std::span<const double> scores, std::size_t n_gt);

/// All-point interpolated AP: sum_k max_{j >= k} P_j * (R_k - R_{k-1}).
/// nullopt for an empty curve (AP undefined).
std::optional<double> average_precision(std::span<const PrPoint> curve);

struct MeanAp {
  double value = 0;
  std::vector<std::size_t> excluded;  // indices with undefined AP
};

/// Mean over defined entries; throws InvalidInput when none is defined.
MeanAp mean_ap(std::span<const std::optional<double>> per_class_ap);

struct ClassEval {
  int class_id = 0;
  std::string name;
  std::size_t n_gt = 0;
  std::size_t n_pred = 0;  // predictions at or above the confidence threshold
  std::size_t tp = 0;
  std::vector<PrPoint> curve;
  std::optional<double> ap;
};

struct EvalConfig {
  double iou_thresh = kMatchIou;
  double conf_thresh = kConfidenceThreshold;
  int num_classes = 24;
};

struct EvalReport {
  static constexpr int kSchemaVersion = 1;
  EvalConfig config;
  std::vector<ClassEval> classes;
  double map = 0;
  std::vector<int> excluded_classes;
};

EvalReport evaluate(std::span<const Detection> preds, std::span<const GroundTruth> gts,
                    const EvalConfig& cfg = {});

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& j);

/// Per-class AP table, one row per class plus a trailing mAP row.
std::string to_csv(const EvalReport& report, const std::string& column = "AP");

std::vector<GroundTruth> ground_truth_from(std::span<const AnnotatedImage> images);

/// One detection per line: {"image": str, "bbox": [x1,y1,x2,y2], "color": int,
/// "score": real}. Errors are DataError naming the line.
std::vector<Detection> load_predictions(const std::string& path);
std::vector<Detection> parse_predictions(std::istream& in, const std::string& source);
std::string to_jsonl(const Detection& det);

}  // namespace colordet
