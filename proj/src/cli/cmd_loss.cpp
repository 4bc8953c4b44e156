#include <array>
#include <iomanip>
#include <sstream>

#include "colordet/error.hpp"
#include "colordet/losses.hpp"
#include "context.hpp"

namespace colordet::cli {

namespace {

struct Sweep {
  double lo = 0;
  double hi = 0;
  int steps = 0;
};

Sweep parse_sweep(const std::string& s) {
  std::array<std::string, 3> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto comma = s.find(',', start);
    if ((i < 2) == (comma == std::string::npos))
      throw UsageError("--sweep expects MIN,MAX,STEPS, got '" + s + "'");
    parts[i] = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    start = comma + 1;
  }
  try {
    std::size_t a = 0, b = 0, c = 0;
    Sweep sw{std::stod(parts[0], &a), std::stod(parts[1], &b), std::stoi(parts[2], &c)};
    if (a == parts[0].size() && b == parts[1].size() && c == parts[2].size() && sw.steps >= 1 &&
        sw.hi >= sw.lo)
      return sw;
  } catch (const std::logic_error&) {
  }
  throw UsageError("--sweep expects MIN,MAX,STEPS with MIN <= MAX and STEPS >= 1, got '" + s +
                   "'");
}

double sweep_point(const Sweep& sw, int k) {
  if (sw.steps == 1) return sw.lo;
  return sw.lo + k * (sw.hi - sw.lo) / (sw.steps - 1);
}

}  // namespace

void add_loss_probe(CLI::App& app, Context& ctx) {
  auto* cmd = app.add_subcommand(
      "loss-probe",
      "Sweep one residual (regression kinds) or target probability (ce/focal) and emit "
      "CSV of value and gradient");
  auto kind = std::make_shared<std::string>("vcr");
  auto beta = std::make_shared<double>(0.0);
  auto gamma = std::make_shared<double>(2.0);
  auto alpha = std::make_shared<double>(0.25);
  auto sweep = std::make_shared<std::string>("-1,1,9");
  cmd->add_option("--kind", *kind, "vcr | smooth_l1 | l1 | mse | ce | focal")
      ->capture_default_str();
  cmd->add_option("--beta", *beta, "Knee for vcr/smooth_l1 (default 0.11 / 1)");
  cmd->add_option("--gamma", *gamma, "Focal exponent")->capture_default_str();
  cmd->add_option("--alpha", *alpha, "Focal balance weight")->capture_default_str();
  cmd->add_option("--sweep", *sweep, "MIN,MAX,STEPS")->capture_default_str()->allow_extra_args(false);

  cmd->callback([&ctx, cmd, kind, beta, gamma, alpha, sweep] {
    ctx.action = [&ctx, cmd, kind, beta, gamma, alpha, sweep] {
      LossConfig cfg;
      try {
        cfg = LossConfig::for_kind(parse_loss_kind(*kind));
      } catch (const InvalidInput& e) {
        throw UsageError(e.what());
      }
      if (cmd->count("--beta") > 0) {
        if (!(*beta > 0)) throw UsageError("--beta must be > 0");
        cfg.beta = *beta;
      }
      cfg.gamma = *gamma;
      cfg.alpha_bal = *alpha;
      const Sweep sw = parse_sweep(*sweep);

      std::ostringstream csv;
      csv << std::setprecision(17);
      if (is_classification(cfg.kind)) {
        if (!(sw.lo > 0 && sw.hi <= 1))
          throw UsageError("ce/focal sweeps range over probabilities in (0, 1]");
        csv << "p,loss,grad\n";
        const std::array<int, 1> label = {0};
        for (int k = 0; k < sw.steps; ++k) {
          const double p = sweep_point(sw, k);
          const std::array<double, 1> probs = {p};
          csv << p << ',' << baseline_loss(cfg, probs, 1, label) << ','
              << baseline_loss_grad(cfg, probs, 1, label)[0] << '\n';
        }
      } else {
        csv << "d,loss,grad\n";
        const std::array<double, 1> pred = {0.0};
        for (int k = 0; k < sw.steps; ++k) {
          // d = target - pred with pred fixed at 0.
          const double d = sweep_point(sw, k);
          const std::array<double, 1> target = {d};
          csv << d << ',' << baseline_loss(cfg, pred, target) << ','
              << baseline_loss_grad(cfg, pred, target)[0] << '\n';
        }
      }
      if (!ctx.out_path.empty()) {
        write_text_file(ctx.out_path, csv.str());
        ctx.say("wrote " + std::to_string(sw.steps) + " rows to " + ctx.out_path);
      } else {
        ctx.out << csv.str();
      }
      return 0;
    };
  });
}

}  // namespace colordet::cli
