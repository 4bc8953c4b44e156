#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "colordet/dataset.hpp"
#include "colordet/error.hpp"
#include "context.hpp"

namespace colordet::cli {

namespace {

nlohmann::json per_class_counts(const ClassStats& st) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t c = 0; c < kNumColors; ++c)
    arr.push_back({{"class_id", c},
                   {"name", color_names()[c]},
                   {"count", st.counts[c]},
                   {"proportion", st.proportions[c]}});
  return arr;
}

/// Half a unit in the last printed digit of a two-decimal percentage.
constexpr double kPercentTolerance = 0.005;

}  // namespace

void add_stats(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("stats", "Per-color object counts and long-tail statistics");
  auto ann = std::make_shared<std::string>();
  auto check = std::make_shared<bool>(false);
  cmd->add_option("--ann", *ann, "Annotations (JSONL)")->required();
  cmd->add_flag("--table2-check", *check,
                "Compare against the published 24-color counts and percentages");

  cmd->callback([&ctx, ann, check] {
    ctx.action = [&ctx, ann, check] {
      const Dataset ds = load_annotations(*ann);
      const ClassStats st = class_stats(ds);
      const auto& ref = table2_reference();

      nlohmann::json report = {{"schema_version", 1},
                               {"kind", "class_stats"},
                               {"images", st.images},
                               {"total", st.total},
                               {"imbalance", st.imbalance},
                               {"classes", per_class_counts(st)}};

      std::ostringstream os;
      os << std::left << std::setw(4) << "id" << std::setw(14) << "color" << std::right
         << std::setw(8) << "count" << std::setw(10) << "share%";
      if (*check) os << std::setw(10) << "pub.cnt" << std::setw(10) << "pub.%" << std::setw(10)
                     << "delta%";
      os << '\n';
      bool counts_match = st.total == kTable2Total;
      nlohmann::json check_rows = nlohmann::json::array();
      for (std::size_t c = 0; c < kNumColors; ++c) {
        const double pct = 100.0 * st.proportions[c];
        os << std::left << std::setw(4) << c << std::setw(14) << color_names()[c] << std::right
           << std::setw(8) << st.counts[c] << std::setw(10) << std::fixed
           << std::setprecision(4) << pct;
        if (*check) {
          const double delta = pct - ref[c].percent;
          const bool within = std::abs(delta) <= kPercentTolerance;
          counts_match = counts_match && st.counts[c] == ref[c].count;
          os << std::setw(10) << ref[c].count << std::setw(10) << std::setprecision(2)
             << ref[c].percent << std::setw(10) << std::setprecision(4) << delta;
          if (st.counts[c] != ref[c].count) os << "  count differs";
          else if (!within) os << "  published share off by more than rounding";
          check_rows.push_back({{"name", ref[c].name},
                                {"count", st.counts[c]},
                                {"published_count", ref[c].count},
                                {"percent", pct},
                                {"published_percent", ref[c].percent},
                                {"within_rounding", within}});
        }
        os << '\n';
      }
      os << "images " << st.images << ", objects " << st.total << ", imbalance "
         << std::setprecision(1) << st.imbalance << '\n';
      if (*check) {
        report["table2_check"] = {{"counts_match", counts_match}, {"rows", check_rows}};
        os << (counts_match ? "counts match the published table (total 31232)\n"
                            : "counts differ from the published table\n");
      }

      if (!ctx.out_path.empty()) write_json_file(ctx.out_path, report);
      if (!ctx.quiet) ctx.out << os.str();
      return (*check && !counts_match) ? 2 : 0;
    };
  });
}

void add_split(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("split", "Stratified train/val/test split (default 8:1:1)");
  auto ann = std::make_shared<std::string>();
  auto ratios = std::make_shared<std::vector<double>>(std::vector<double>{8, 1, 1});
  cmd->add_option("--ann", *ann, "Annotations (JSONL)")->required();
  cmd->add_option("--ratios", *ratios, "TRAIN,VAL,TEST")->delimiter(',')->expected(3);

  cmd->callback([&ctx, ann, ratios] {
    ctx.action = [&ctx, ann, ratios] {
      if (ctx.out_path.empty()) throw UsageError("split requires --out DIR");
      if (ratios->size() != 3) throw UsageError("--ratios needs exactly three values");
      const SplitRatios r{(*ratios)[0], (*ratios)[1], (*ratios)[2]};
      if (!(r.train > 0 && r.val > 0 && r.test > 0))
        throw UsageError("--ratios must be positive");

      const Dataset ds = load_annotations(*ann);
      const Split sp = stratified_split(ds, r, ctx.seed);

      const std::filesystem::path dir(ctx.out_path);
      std::filesystem::create_directories(dir);
      const std::array<std::pair<const char*, const Dataset*>, 3> parts = {
          {{"train", &sp.train}, {"val", &sp.val}, {"test", &sp.test}}};
      nlohmann::json splits = nlohmann::json::object();
      std::ostringstream os;
      for (const auto& [name, part] : parts) {
        write_annotations((dir / (std::string(name) + ".jsonl")).string(), *part);
        const ClassStats st = class_stats(*part);
        splits[name] = {{"images", st.images},
                        {"objects", st.total},
                        {"counts", st.counts}};
        os << name << ": " << st.images << " images, " << st.total << " objects\n";
      }
      nlohmann::json report = {{"schema_version", 1},
                               {"kind", "split"},
                               {"seed", ctx.seed},
                               {"ratios", {r.train, r.val, r.test}},
                               {"classes", color_names()},
                               {"splits", splits}};
      write_json_file((dir / "split_report.json").string(), report);
      if (!ctx.quiet) ctx.out << os.str();
      return 0;
    };
  });
}

}  // namespace colordet::cli
