#include <algorithm>
#include <atomic>
#include <filesystem>
#include <thread>

#include "colordet/error.hpp"
#include "colordet/preprocess.hpp"
#include "context.hpp"
#include "preprocess_options.hpp"

namespace colordet::cli {

namespace fs = std::filesystem;

Image PreprocessOptions::apply(const Image& img) const {
  Image cur = img;
  auto do_dehaze = [&] {
    if (dehaze) cur = colordet::dehaze(cur, params);
  };
  auto do_illum = [&] {
    if (illum) cur = illum_adjust(cur, *illum);
  };
  if (illum_first) {
    do_illum();
    do_dehaze();
  } else {
    do_dehaze();
    do_illum();
  }
  return cur;
}

void PreprocessOptions::add_to(CLI::App* cmd) {
  cmd->add_flag("--dehaze", dehaze, "Apply dark-channel dehazing");
  cmd->add_option("--window", params.window, "Dark-channel window (odd)")->capture_default_str();
  cmd->add_option("--omega", params.omega, "Haze removal fraction")->capture_default_str();
  cmd->add_option("--t0", params.t0, "Transmission floor")->capture_default_str();
  cmd->add_option("--top-fraction", params.top_fraction,
                  "Share of brightest dark-channel pixels used for the atmosphere")
      ->capture_default_str();
  cmd->add_option("--illum", illum_spec, "night | noon | custom:ALPHA,BETA");
  cmd->add_option("--order", order, "dehaze-first | illum-first")->capture_default_str();
}

void PreprocessOptions::finalize() {
  try {
    if (dehaze) params.validate();
    if (!illum_spec.empty()) illum = parse_illum(illum_spec);
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  if (order != "dehaze-first" && order != "illum-first")
    throw UsageError("--order must be dehaze-first or illum-first");
  illum_first = order == "illum-first";
}

nlohmann::json PreprocessOptions::to_json() const {
  nlohmann::json j = {{"dehaze", dehaze}, {"order", order}};
  if (dehaze)
    j["dehaze_params"] = {{"window", params.window},
                          {"omega", params.omega},
                          {"t0", params.t0},
                          {"top_fraction", params.top_fraction}};
  if (illum) j["illum"] = {{"alpha", illum->alpha}, {"beta", illum->beta}};
  return j;
}

namespace {

bool is_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

struct FileResult {
  std::string name;
  int width = 0;
  int height = 0;
  std::string error;
};

}  // namespace

void add_preprocess(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("preprocess", "Dehaze and/or adjust illumination of a folder");
  auto opts = std::make_shared<PreprocessOptions>();
  auto in_dir = std::make_shared<std::string>();
  opts->add_to(cmd);
  cmd->add_option("--in", *in_dir, "Input directory of PNG/JPEG images")->required();

  cmd->callback([&ctx, opts, in_dir] {
    ctx.action = [&ctx, opts, in_dir] {
      opts->finalize();
      if (ctx.out_path.empty()) throw UsageError("preprocess requires --out DIR");
      if (!opts->dehaze && !opts->illum)
        throw UsageError("nothing to do: pass --dehaze and/or --illum");
      if (!fs::is_directory(*in_dir)) throw DataError(*in_dir, 0, "not a directory");
      fs::create_directories(ctx.out_path);

      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(*in_dir))
        if (e.is_regular_file() && is_image(e.path())) files.push_back(e.path());
      std::sort(files.begin(), files.end());

      std::vector<FileResult> results(files.size());
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
          FileResult& r = results[i];
          r.name = files[i].filename().string();
          try {
            const Image out = opts->apply(read_image(files[i].string()));
            write_image(out, (fs::path(ctx.out_path) / r.name).string());
            r.width = out.width();
            r.height = out.height();
          } catch (const std::exception& e) {
            r.error = e.what();
          }
        }
      };
      const int n_threads = std::clamp<int>(ctx.jobs, 1, static_cast<int>(std::max<std::size_t>(files.size(), 1)));
      {
        std::vector<std::jthread> pool;
        for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
      }

      nlohmann::json items = nlohmann::json::array();
      std::size_t failed = 0;
      for (const auto& r : results) {
        nlohmann::json item = {{"file", r.name}};
        if (r.error.empty()) {
          item["width"] = r.width;
          item["height"] = r.height;
        } else {
          item["error"] = r.error;
          ++failed;
          ctx.err << "error: " << r.error << '\n';
        }
        items.push_back(item);
      }
      nlohmann::json report = {{"schema_version", 1},
                               {"kind", "preprocess"},
                               {"options", opts->to_json()},
                               {"files", items}};
      write_json_file((fs::path(ctx.out_path) / "preprocess_report.json").string(), report);
      ctx.say("processed " + std::to_string(files.size() - failed) + " of " +
              std::to_string(files.size()) + " images into " + ctx.out_path);
      return failed == 0 ? 0 : 2;
    };
  });
}

}  // namespace colordet::cli
