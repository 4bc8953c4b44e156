#include <filesystem>
#include <sstream>

#include "colordet/backbone.hpp"
#include "colordet/boxes.hpp"
#include "colordet/fpn.hpp"
#include "colordet/image.hpp"
#include "context.hpp"
#include "preprocess_options.hpp"

namespace colordet::cli {

namespace {

nlohmann::json shape_json(const Shape& s) { return {s.n, s.c, s.h, s.w}; }

}  // namespace

void add_pipeline(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand(
      "pipeline",
      "Preprocess one image, run the backbone and pyramid with seeded weights, tile anchors, "
      "and report every intermediate shape");
  auto opts = std::make_shared<PreprocessOptions>();
  auto image = std::make_shared<std::string>();
  auto size = std::make_shared<std::string>("64x64");
  auto dump_dir = std::make_shared<std::string>();
  opts->add_to(cmd);
  cmd->add_option("--image", *image, "Input PNG/JPEG")->required();
  cmd->add_option("--input-size", *size, "Network input HxW")->capture_default_str();
  cmd->add_option("--dump-dir", *dump_dir, "Write stage and pyramid tensors (.bin + .json)");

  cmd->callback([&ctx, opts, image, size, dump_dir] {
    ctx.action = [&ctx, opts, image, size, dump_dir] {
      opts->finalize();
      const auto [h, w] = parse_size(*size);
      std::ostringstream log;

      const Image raw = read_image(*image);
      const Image pre = opts->apply(raw);
      const Image net_in = resize_bilinear(pre, w, h);
      const Tensor x = to_tensor(net_in);
      log << "image " << raw.width() << "x" << raw.height() << " -> input " << x.shape().str()
          << '\n';

      const LayerGraph graph = build_vcr_resnet();
      const ForwardResult fw = forward(graph, init_weights(graph, ctx.seed), x);
      const FpnConfig fcfg;
      const Pyramid pyr =
          build_pyramid(fw.stages, init_fpn_weights(fw.stages, fcfg, ctx.seed + 1), fcfg);

      nlohmann::json trace = nlohmann::json::array();
      for (const auto& t : fw.trace) trace.push_back({{"layer", t.name}, {"shape", shape_json(t.shape)}});
      const std::array<const Tensor*, 4> cs = {&fw.stages.c2, &fw.stages.c3, &fw.stages.c4,
                                               &fw.stages.c5};
      nlohmann::json stages = nlohmann::json::array();
      nlohmann::json levels = nlohmann::json::array();
      std::size_t total_anchors = 0;
      for (std::size_t i = 0; i < 4; ++i) {
        const std::string cname = "C" + std::to_string(i + 2);
        const std::string pname = "P" + std::to_string(i + 2);
        stages.push_back({{"name", cname}, {"shape", shape_json(cs[i]->shape())}});
        const Shape& ps = pyr.levels[i].shape();
        AnchorConfig acfg;
        acfg.stride = static_cast<double>(1 << (i + 2));
        const BoxSet anchors = gen_anchors(ps.h, ps.w, acfg);
        total_anchors += anchors.size();
        levels.push_back({{"name", pname},
                          {"shape", shape_json(ps)},
                          {"anchor_stride", acfg.stride},
                          {"anchors", anchors.size()}});
        log << cname << " " << cs[i]->shape().str() << "  " << pname << " " << ps.str() << "  "
            << anchors.size() << " anchors (stride " << acfg.stride << ")\n";
        if (!dump_dir->empty()) {
          std::filesystem::create_directories(*dump_dir);
          dump_tensor(*cs[i], (std::filesystem::path(*dump_dir) / cname).string());
          dump_tensor(pyr.levels[i], (std::filesystem::path(*dump_dir) / pname).string());
        }
      }
      log << "total anchors " << total_anchors << '\n';

      nlohmann::json report = {{"schema_version", 1},
                               {"kind", "pipeline"},
                               {"image", *image},
                               {"seed", ctx.seed},
                               {"preprocess", opts->to_json()},
                               {"image_size", {{"width", raw.width()}, {"height", raw.height()}}},
                               {"input", shape_json(x.shape())},
                               {"backbone_trace", trace},
                               {"stages", stages},
                               {"pyramid", levels},
                               {"total_anchors", total_anchors}};
      if (!ctx.out_path.empty()) write_json_file(ctx.out_path, report);
      if (!ctx.quiet) ctx.out << log.str();
      return 0;
    };
  });
}

}  // namespace colordet::cli
