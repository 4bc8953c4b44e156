#include <fstream>
#include <sstream>

#include "colordet/boxes.hpp"
#include "colordet/error.hpp"
#include "context.hpp"

namespace colordet::cli {

namespace {

/// Accepts either a bare array or {"boxes": [...]}; each entry is
/// {"bbox": [x1, y1, x2, y2], "score": s}.
void read_boxes(const std::string& path, std::vector<Box>& boxes,
                std::vector<double>& scores) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "cannot open box file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path, 0, std::string("malformed JSON: ") + e.what());
  }
  const nlohmann::json& list = j.is_object() && j.contains("boxes") ? j["boxes"] : j;
  if (!list.is_array()) throw DataError(path, 0, "expected an array of boxes");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& e = list[i];
    const std::string where = "box " + std::to_string(i) + ": ";
    if (!e.is_object() || !e.contains("bbox") || !e["bbox"].is_array() || e["bbox"].size() != 4)
      throw DataError(path, 0, where + "\"bbox\" must be [x1, y1, x2, y2]");
    if (!e.contains("score") || !e["score"].is_number())
      throw DataError(path, 0, where + "missing number \"score\"");
    for (const auto& v : e["bbox"])
      if (!v.is_number()) throw DataError(path, 0, where + "bbox entries must be numbers");
    const auto& b = e["bbox"];
    Box box{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
    if (!box.valid()) throw DataError(path, 0, where + "inverted box");
    boxes.push_back(box);
    scores.push_back(e["score"].get<double>());
  }
}

}  // namespace

void add_nms_demo(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("nms-demo", "Run greedy NMS on a JSON box list");
  auto path = std::make_shared<std::string>();
  auto thresh = std::make_shared<double>(0.5);
  cmd->add_option("--boxes", *path, "JSON file with [{\"bbox\": [...], \"score\": s}, ...]")
      ->required();
  cmd->add_option("--iou", *thresh, "IoU suppression threshold")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));

  cmd->callback([&ctx, path, thresh] {
    ctx.action = [&ctx, path, thresh] {
      std::vector<Box> boxes;
      std::vector<double> scores;
      read_boxes(*path, boxes, scores);
      const auto keep = nms(boxes, scores, *thresh);
      nlohmann::json report = {{"schema_version", 1},
                               {"kind", "nms"},
                               {"iou", *thresh},
                               {"input_count", boxes.size()},
                               {"kept", keep}};
      if (!ctx.out_path.empty()) write_json_file(ctx.out_path, report);
      std::ostringstream line;
      line << "kept " << keep.size() << " of " << boxes.size() << ": " << nlohmann::json(keep).dump();
      ctx.say(line.str());
      return 0;
    };
  });
}

}  // namespace colordet::cli
