#pragma once

#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "colordet/preprocess.hpp"

namespace colordet::cli {

/// Shared by `preprocess` and `pipeline`.
struct PreprocessOptions {
  bool dehaze = false;
  DehazeParams params;
  std::string illum_spec;
  std::string order = "dehaze-first";

  std::optional<IllumParams> illum;
  bool illum_first = false;

  void add_to(CLI::App* cmd);
  /// Validates flags; throws UsageError.
  void finalize();
  Image apply(const Image& img) const;
  nlohmann::json to_json() const;
};

}  // namespace colordet::cli
