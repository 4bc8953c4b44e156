#include <cmath>
#include <iomanip>
#include <sstream>

#include "colordet/backbone.hpp"
#include "colordet/fpn.hpp"
#include "context.hpp"

namespace colordet::cli {

namespace {

std::string with_commas(std::size_t n) {
  std::string s = std::to_string(n);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

std::string dims(const ShapeRow& r) {
  if (r.kind == "fc") return std::to_string(r.c);
  return std::to_string(r.h) + "x" + std::to_string(r.w) + "x" + std::to_string(r.c);
}

std::string kernel_str(const LayerGraph& g, const ShapeRow& r) {
  if (r.kind == "input" || r.kind == "fc") return "-";
  if (r.kind == "stage") {
    for (const auto& st : g.stages)
      if (st.name == r.name) return "[1x1,3x3,1x1]x" + std::to_string(st.blocks.size());
  }
  return std::to_string(r.kernel) + "x" + std::to_string(r.kernel);
}

struct LevelStats {
  double min_norm = 0;
  double max_norm = 0;
  std::size_t nonzero = 0;
};

LevelStats channel_norms(const Tensor& t) {
  const Shape& s = t.shape();
  LevelStats st{INFINITY, 0, 0};
  for (int n = 0; n < s.n; ++n)
    for (int y = 0; y < s.h; ++y)
      for (int x = 0; x < s.w; ++x) {
        double sq = 0;
        for (int c = 0; c < s.c; ++c) sq += t.at(n, c, y, x) * t.at(n, c, y, x);
        if (sq == 0) continue;
        const double norm = std::sqrt(sq);
        st.min_norm = std::min(st.min_norm, norm);
        st.max_norm = std::max(st.max_norm, norm);
        ++st.nonzero;
      }
  if (st.nonzero == 0) st.min_norm = 0;
  return st;
}

nlohmann::json shape_json(const Shape& s) { return {s.n, s.c, s.h, s.w}; }

}  // namespace

void add_inspect(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand(
      "inspect", "Print the backbone shape table and parameter counts (text + JSON)");
  auto size = std::make_shared<std::string>("227x227");
  auto fpn = std::make_shared<bool>(false);
  auto json_stdout = std::make_shared<bool>(false);
  cmd->add_option("--input-size", *size, "Input size HxW")->capture_default_str();
  cmd->add_flag("--fpn", *fpn, "Also run a seeded forward pass and report pyramid levels");
  cmd->add_flag("--json", *json_stdout, "Print the JSON report instead of the text table");

  cmd->callback([&ctx, size, fpn, json_stdout] {
    ctx.action = [&ctx, size, fpn, json_stdout] {
      const auto [h, w] = parse_size(*size);
      const LayerGraph graph = build_vcr_resnet();

      // The head needs a 7x7 C5; drop it for inputs that do not produce one.
      ShapeTable table = infer_shapes(graph, h, w, false);
      const ShapeRow& c5 = table.summary.back();
      const bool head = c5.h == graph.head.avg_pool.kernel && c5.w == graph.head.avg_pool.kernel;
      if (head) table = infer_shapes(graph, h, w, true);
      const ParamReport params = param_count(graph);

      auto published = [&](const std::string& name) -> std::optional<std::size_t> {
        for (const auto& g : params.groups)
          if (g.name == name) return g.reference;
        return std::nullopt;
      };
      auto counted = [&](const std::string& name) -> std::optional<std::size_t> {
        for (const auto& g : params.groups)
          if (g.name == name) return g.count;
        return std::nullopt;
      };

      nlohmann::json summary = nlohmann::json::array();
      for (const auto& r : table.summary) {
        nlohmann::json row = {{"name", r.name},
                              {"kind", r.kind},
                              {"kernel", kernel_str(graph, r)},
                              {"stride", r.stride},
                              {"output", dims(r)},
                              {"h", r.h},
                              {"w", r.w},
                              {"c", r.c}};
        const auto n = counted(r.name);
        row["params"] = n ? nlohmann::json(*n) : nlohmann::json(nullptr);
        const auto ref = published(r.name);
        row["published_params"] = ref ? nlohmann::json(*ref) : nlohmann::json(nullptr);
        summary.push_back(row);
      }
      nlohmann::json layers = nlohmann::json::array();
      for (const auto& r : table.layers)
        layers.push_back({{"name", r.name},
                          {"kind", r.kind},
                          {"kernel", r.kernel},
                          {"stride", r.stride},
                          {"output", dims(r)},
                          {"params", r.params}});
      nlohmann::json groups = nlohmann::json::array();
      for (const auto& g : params.groups)
        groups.push_back({{"name", g.name},
                          {"count", g.count},
                          {"published", g.reference ? nlohmann::json(*g.reference)
                                                    : nlohmann::json(nullptr)}});

      nlohmann::json report = {{"schema_version", 1},
                               {"kind", "inspect"},
                               {"input", {{"h", h}, {"w", w}, {"c", graph.in_channels}}},
                               {"head_included", head},
                               {"bottleneck_conv_layers", graph.bottleneck_conv_layers()},
                               {"summary", summary},
                               {"layers", layers},
                               {"params", {{"groups", groups}, {"total", params.total}}}};

      std::ostringstream text;
      text << std::left << std::setw(14) << "Layer" << std::setw(18) << "Kernel"
           << std::setw(8) << "Stride" << std::setw(16) << "Output" << std::right
           << std::setw(14) << "Params" << std::setw(14) << "Published" << '\n';
      for (const auto& r : table.summary) {
        const auto n = counted(r.name);
        const auto ref = published(r.name);
        text << std::left << std::setw(14) << r.name << std::setw(18) << kernel_str(graph, r)
             << std::setw(8) << (r.stride ? std::to_string(r.stride) : "-") << std::setw(16)
             << dims(r) << std::right << std::setw(14) << (n ? with_commas(*n) : "-")
             << std::setw(14) << (ref ? with_commas(*ref) : "-");
        if (n && ref && *n != *ref) text << "  (differs)";
        text << '\n';
      }
      text << "total parameters: " << with_commas(params.total) << "\n";
      text << "bottleneck conv layers: " << graph.bottleneck_conv_layers() << "\n";
      if (!head) text << "head omitted: C5 is not 7x7 at this input size\n";

      if (*fpn) {
        const BackboneWeights wts = init_weights(graph, ctx.seed);
        const Tensor x = Tensor::uniform({1, 3, h, w}, ctx.seed ^ 0x5eedULL, 0.0, 1.0);
        const ForwardResult fw = forward(graph, wts, x);
        const FpnConfig cfg;
        const FpnWeights fw_wts = init_fpn_weights(fw.stages, cfg, ctx.seed + 1);
        const Pyramid pyr = build_pyramid(fw.stages, fw_wts, cfg);
        const std::array<const Tensor*, 4> cs = {&fw.stages.c2, &fw.stages.c3, &fw.stages.c4,
                                                 &fw.stages.c5};
        nlohmann::json levels = nlohmann::json::array();
        text << "pyramid (d=" << cfg.channels << ", norm scale " << cfg.norm_scale << ")\n";
        for (std::size_t i = 0; i < 4; ++i) {
          const LevelStats normed = channel_norms(l2_normalize(*cs[i], cfg.norm_scale));
          const LevelStats out = channel_norms(pyr.levels[i]);
          levels.push_back({{"level", "P" + std::to_string(i + 2)},
                            {"stage_shape", shape_json(cs[i]->shape())},
                            {"shape", shape_json(pyr.levels[i].shape())},
                            {"normalized_norm_min", normed.min_norm},
                            {"normalized_norm_max", normed.max_norm},
                            {"output_norm_min", out.min_norm},
                            {"output_norm_max", out.max_norm}});
          text << "  P" << i + 2 << "  " << pyr.levels[i].shape().str()
               << "  normalized C" << i + 2 << " norm in [" << normed.min_norm << ", "
               << normed.max_norm << "]\n";
        }
        report["fpn"] = {{"channels", cfg.channels},
                         {"norm_scale", cfg.norm_scale},
                         {"seed", ctx.seed},
                         {"levels", levels}};
      }

      if (!ctx.out_path.empty()) write_json_file(ctx.out_path, report);
      if (*json_stdout)
        ctx.out << report.dump(2) << '\n';
      else if (!ctx.quiet)
        ctx.out << text.str();
      return 0;
    };
  });
}

}  // namespace colordet::cli
