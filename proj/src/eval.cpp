#include "colordet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <utility>

#include "colordet/error.hpp"

namespace colordet {

std::vector<MatchFlag> match_detections(std::span<const Detection> preds,
                                        std::span<const GroundTruth> gts,
                                        double iou_thresh, double conf_thresh) {
  using Key = std::pair<std::string, int>;
  std::map<Key, std::vector<std::size_t>> gt_groups;
  for (std::size_t g = 0; g < gts.size(); ++g)
    gt_groups[{gts[g].image_id, gts[g].class_id}].push_back(g);

  std::map<Key, std::vector<std::size_t>> pred_groups;
  std::vector<MatchFlag> flags(preds.size(), MatchFlag::FalsePositive);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!std::isfinite(preds[i].score))
      throw InvalidInput("match_detections: prediction " + std::to_string(i) +
                         " has a non-finite score");
    if (preds[i].score < conf_thresh) {
      flags[i] = MatchFlag::BelowThreshold;
      continue;
    }
    pred_groups[{preds[i].image_id, preds[i].class_id}].push_back(i);
  }

  for (auto& [key, idx] : pred_groups) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return preds[a].score > preds[b].score;
    });
    auto it = gt_groups.find(key);
    if (it == gt_groups.end()) continue;  // all FP
    const auto& cands = it->second;
    std::vector<bool> taken(cands.size(), false);
    for (std::size_t i : idx) {
      double best = -1.0;
      std::size_t best_k = cands.size();
      for (std::size_t k = 0; k < cands.size(); ++k) {
        if (taken[k]) continue;
        const double v = iou(preds[i].box, gts[cands[k]].box);
        if (v > best) {
          best = v;
          best_k = k;
        }
      }
      if (best_k < cands.size() && best >= iou_thresh) {
        taken[best_k] = true;
        flags[i] = MatchFlag::TruePositive;
      }
    }
  }
  return flags;
}

std::vector<PrPoint> pr_curve(std::span<const MatchFlag> flags,
                              std::span<const double> scores, std::size_t n_gt) {
  if (flags.size() != scores.size())
    throw InvalidInput("pr_curve: flags and scores differ in length");
  if (std::find(flags.begin(), flags.end(), MatchFlag::BelowThreshold) != flags.end())
    throw InvalidInput("pr_curve: below-threshold predictions must be filtered out");
  if (n_gt == 0) return {};
  std::vector<std::size_t> order(flags.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<PrPoint> curve;
  curve.reserve(order.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (flags[order[k]] == MatchFlag::TruePositive) ++tp;
    curve.push_back({static_cast<double>(tp) / static_cast<double>(k + 1),
                     static_cast<double>(tp) / static_cast<double>(n_gt)});
  }
  return curve;
}

std::optional<double> average_precision(std::span<const PrPoint> curve) {
  if (curve.empty()) return std::nullopt;
  // Right-to-left running max gives the interpolated precision envelope.
  std::vector<double> envelope(curve.size());
  double running = 0.0;
  for (std::size_t k = curve.size(); k-- > 0;) {
    running = std::max(running, curve[k].precision);
    envelope[k] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    ap += envelope[k] * (curve[k].recall - prev_recall);
    prev_recall = curve[k].recall;
  }
  return ap;
}

MeanAp mean_ap(std::span<const std::optional<double>> per_class_ap) {
  MeanAp out;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < per_class_ap.size(); ++i) {
    if (per_class_ap[i]) {
      sum += *per_class_ap[i];
      ++n;
    } else {
      out.excluded.push_back(i);
    }
  }
  if (n == 0) throw InvalidInput("mean_ap: no class has a defined AP");
  out.value = sum / static_cast<double>(n);
  return out;
}

EvalReport evaluate(std::span<const Detection> preds, std::span<const GroundTruth> gts,
                    const EvalConfig& cfg) {
  if (cfg.num_classes < 1) throw InvalidInput("evaluate: num_classes must be >= 1");
  auto check_class = [&](int c, const char* what, std::size_t i) {
    if (c < 0 || c >= cfg.num_classes)
      throw InvalidInput(std::string("evaluate: ") + what + " " + std::to_string(i) +
                         " has class " + std::to_string(c) + " outside [0, " +
                         std::to_string(cfg.num_classes) + ")");
  };
  for (std::size_t i = 0; i < preds.size(); ++i) check_class(preds[i].class_id, "prediction", i);
  for (std::size_t i = 0; i < gts.size(); ++i) check_class(gts[i].class_id, "ground truth", i);

  const auto flags = match_detections(preds, gts, cfg.iou_thresh, cfg.conf_thresh);

  EvalReport rep;
  rep.config = cfg;
  std::vector<std::optional<double>> aps;
  for (int c = 0; c < cfg.num_classes; ++c) {
    ClassEval ce;
    ce.class_id = c;
    ce.name = cfg.num_classes == kNumColors ? std::string(color_name(c))
                                            : "class_" + std::to_string(c);
    ce.n_gt = static_cast<std::size_t>(std::count_if(
        gts.begin(), gts.end(), [c](const GroundTruth& g) { return g.class_id == c; }));
    std::vector<MatchFlag> class_flags;
    std::vector<double> scores;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i].class_id != c || flags[i] == MatchFlag::BelowThreshold) continue;
      class_flags.push_back(flags[i]);
      scores.push_back(preds[i].score);
    }
    ce.n_pred = class_flags.size();
    ce.tp = static_cast<std::size_t>(
        std::count(class_flags.begin(), class_flags.end(), MatchFlag::TruePositive));
    ce.curve = pr_curve(class_flags, scores, ce.n_gt);
    ce.ap = average_precision(ce.curve);
    if (!ce.ap && ce.n_gt > 0) ce.ap = 0.0;  // gts present, nothing detected
    if (!ce.ap) rep.excluded_classes.push_back(c);
    aps.push_back(ce.ap);
    rep.classes.push_back(std::move(ce));
  }
  rep.map = mean_ap(aps).value;
  return rep;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : report.classes) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& p : c.curve) curve.push_back({p.precision, p.recall});
    classes.push_back({{"class_id", c.class_id},
                       {"name", c.name},
                       {"n_gt", c.n_gt},
                       {"n_pred", c.n_pred},
                       {"tp", c.tp},
                       {"ap", c.ap ? nlohmann::json(*c.ap) : nlohmann::json(nullptr)},
                       {"pr_curve", curve}});
  }
  return {{"schema_version", EvalReport::kSchemaVersion},
          {"kind", "eval_report"},
          {"config",
           {{"iou", report.config.iou_thresh},
            {"conf", report.config.conf_thresh},
            {"num_classes", report.config.num_classes}}},
          {"map", report.map},
          {"excluded_classes", report.excluded_classes},
          {"classes", classes}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != EvalReport::kSchemaVersion)
    throw InvalidInput("eval report: unsupported schema_version");
  EvalReport rep;
  const auto& cfg = j.at("config");
  rep.config = {cfg.at("iou").get<double>(), cfg.at("conf").get<double>(),
                cfg.at("num_classes").get<int>()};
  rep.map = j.at("map").get<double>();
  rep.excluded_classes = j.at("excluded_classes").get<std::vector<int>>();
  for (const auto& c : j.at("classes")) {
    ClassEval ce;
    ce.class_id = c.at("class_id").get<int>();
    ce.name = c.at("name").get<std::string>();
    ce.n_gt = c.at("n_gt").get<std::size_t>();
    ce.n_pred = c.at("n_pred").get<std::size_t>();
    ce.tp = c.at("tp").get<std::size_t>();
    if (!c.at("ap").is_null()) ce.ap = c.at("ap").get<double>();
    for (const auto& p : c.at("pr_curve"))
      ce.curve.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    rep.classes.push_back(std::move(ce));
  }
  return rep;
}

std::string to_csv(const EvalReport& report, const std::string& column) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << "color," << column << '\n';
  for (const auto& c : report.classes) {
    os << c.name << ',';
    if (c.ap) os << *c.ap;
    os << '\n';
  }
  os << "mAP," << report.map << '\n';
  return os.str();
}

std::vector<GroundTruth> ground_truth_from(std::span<const AnnotatedImage> images) {
  std::vector<GroundTruth> out;
  for (const auto& img : images)
    for (const auto& o : img.objects) out.push_back({img.path, o.box, o.class_id});
  return out;
}

std::vector<Detection> parse_predictions(std::istream& in, const std::string& source) {
  std::vector<Detection> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fail = [&](const std::string& msg) { return DataError(source, lineno, msg); };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw fail(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw fail("record must be a JSON object");
    if (!j.contains("image") || !j["image"].is_string()) throw fail("missing string \"image\"");
    if (!j.contains("bbox") || !j["bbox"].is_array() || j["bbox"].size() != 4)
      throw fail("\"bbox\" must be [x1, y1, x2, y2]");
    for (const auto& v : j["bbox"])
      if (!v.is_number()) throw fail("bbox entries must be numbers");
    if (!j.contains("color") || !j["color"].is_number_integer())
      throw fail("missing integer \"color\"");
    if (!j.contains("score") || !j["score"].is_number()) throw fail("missing number \"score\"");
    Detection d;
    d.image_id = j["image"].get<std::string>();
    const auto& b = j["bbox"];
    d.box = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
    if (!d.box.valid()) throw fail("inverted box (needs x2 > x1 and y2 > y1)");
    d.class_id = j["color"].get<int>();
    if (d.class_id < 0 || d.class_id >= kNumColors)
      throw fail("color " + std::to_string(d.class_id) + " outside [0, 24)");
    d.score = j["score"].get<double>();
    if (!std::isfinite(d.score) || d.score < 0 || d.score > 1)
      throw fail("score must lie in [0, 1]");
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Detection> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "cannot open prediction file");
  return parse_predictions(in, path);
}

std::string to_jsonl(const Detection& det) {
  nlohmann::json j = {{"image", det.image_id},
                      {"bbox", {det.box.x1, det.box.y1, det.box.x2, det.box.y2}},
                      {"color", det.class_id},
                      {"score", det.score}};
  return j.dump();
}

}  // namespace colordet
