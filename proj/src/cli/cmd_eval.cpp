#include <iomanip>
#include <sstream>

#include "colordet/dataset.hpp"
#include "colordet/eval.hpp"
#include "context.hpp"

namespace colordet::cli {

void add_eval(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand("eval", "Per-class interpolated AP and mAP");
  auto gt = std::make_shared<std::string>();
  auto pred = std::make_shared<std::string>();
  auto cfg = std::make_shared<EvalConfig>();
  auto csv = std::make_shared<std::string>();
  auto column = std::make_shared<std::string>("AP");
  cmd->add_option("--gt", *gt, "Ground-truth annotations (JSONL)")->required();
  cmd->add_option("--pred", *pred, "Predictions (JSONL, one detection per line)")->required();
  cmd->add_option("--iou", cfg->iou_thresh, "Match IoU threshold")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--conf", cfg->conf_thresh, "Confidence threshold")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--csv", *csv, "Per-class AP table (default: --out with .csv extension)");
  cmd->add_option("--column", *column, "Header of the AP column in the CSV")
      ->capture_default_str();

  cmd->callback([&ctx, gt, pred, cfg, csv, column] {
    ctx.action = [&ctx, gt, pred, cfg, csv, column] {
      const Dataset ds = load_annotations(*gt);
      const auto gts = ground_truth_from(ds);
      const auto dets = load_predictions(*pred);
      const EvalReport rep = evaluate(dets, gts, *cfg);

      std::string csv_path = *csv;
      if (csv_path.empty() && !ctx.out_path.empty()) {
        csv_path = ctx.out_path;
        const auto dot = csv_path.find_last_of('.');
        const auto slash = csv_path.find_last_of('/');
        if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
          csv_path.erase(dot);
        csv_path += ".csv";
      }
      if (!ctx.out_path.empty()) write_json_file(ctx.out_path, to_json(rep));
      if (!csv_path.empty()) write_text_file(csv_path, to_csv(rep, *column));

      if (!ctx.quiet) {
        std::ostringstream os;
        os << std::fixed << std::setprecision(4);
        os << std::left << std::setw(14) << "color" << std::right << std::setw(8) << "gt"
           << std::setw(8) << "pred" << std::setw(8) << "tp" << std::setw(10) << "AP" << '\n';
        for (const auto& c : rep.classes) {
          os << std::left << std::setw(14) << c.name << std::right << std::setw(8) << c.n_gt
             << std::setw(8) << c.n_pred << std::setw(8) << c.tp << std::setw(10);
          if (c.ap)
            os << *c.ap;
          else
            os << "n/a";
          os << '\n';
        }
        os << "mAP " << rep.map << " over " << rep.classes.size() - rep.excluded_classes.size()
           << " classes";
        if (!rep.excluded_classes.empty())
          os << " (warning: " << rep.excluded_classes.size()
             << " classes without ground truth excluded)";
        ctx.out << os.str() << '\n';
      }
      return 0;
    };
  });
}

}  // namespace colordet::cli
