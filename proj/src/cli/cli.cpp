#include "colordet/cli.hpp"

#include <algorithm>
#include <fstream>
#include <vector>

#include "colordet/error.hpp"
#include "context.hpp"

namespace colordet::cli {

void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError(path, 0, "cannot open for writing");
  f << text;
  if (!f) throw DataError(path, 0, "write failed");
}

std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find_first_of("xX");
  try {
    if (x != std::string::npos) {
      std::size_t ph = 0, pw = 0;
      const int h = std::stoi(s.substr(0, x), &ph);
      const int w = std::stoi(s.substr(x + 1), &pw);
      if (ph == x && pw == s.size() - x - 1 && h > 0 && w > 0) return {h, w};
    }
  } catch (const std::logic_error&) {
  }
  throw UsageError("expected a size like 227x227, got '" + s + "'");
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vehicle color detection toolkit: preprocessing, backbone/FPN inspection, "
               "box machinery, losses, evaluation and dataset tooling"};
  app.name("colordet");
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx{out, err};
  app.add_option("--seed", ctx.seed, "Seed for every randomized path")->default_val(0);
  app.add_option("--jobs", ctx.jobs, "Worker threads for corpus commands")
      ->default_val(1)
      ->check(CLI::PositiveNumber);
  app.add_option("--out", ctx.out_path, "Output file or directory");
  app.add_flag("--quiet", ctx.quiet, "Suppress the human-readable summary");

  add_preprocess(app, ctx);
  add_inspect(app, ctx);
  add_nms_demo(app, ctx);
  add_loss_probe(app, ctx);
  add_eval(app, ctx);
  add_stats(app, ctx);
  add_split(app, ctx);
  add_pipeline(app, ctx);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    return ctx.action ? ctx.action() : kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace colordet::cli
