#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace colordet::cli {

/// Argument-level problem detected after parsing; maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  Context(std::ostream& o, std::ostream& e) : out(o), err(e) {}

  std::ostream& out;
  std::ostream& err;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out_path;
  bool quiet = false;
  std::function<int()> action;

  /// Human-readable summary line, suppressed by --quiet.
  void say(const std::string& line) const {
    if (!quiet) out << line << '\n';
  }
};

void write_json_file(const std::string& path, const nlohmann::json& j);
void write_text_file(const std::string& path, const std::string& text);

/// "HxW" -> {H, W}.
std::pair<int, int> parse_size(const std::string& s);

void add_preprocess(CLI::App& app, Context& ctx);
void add_inspect(CLI::App& app, Context& ctx);
void add_nms_demo(CLI::App& app, Context& ctx);
void add_loss_probe(CLI::App& app, Context& ctx);
void add_eval(CLI::App& app, Context& ctx);
void add_stats(CLI::App& app, Context& ctx);
void add_split(CLI::App& app, Context& ctx);
void add_pipeline(CLI::App& app, Context& ctx);

}  // namespace colordet::cli
