#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "colordet/boxes.hpp"

namespace colordet {

inline constexpr int kNumColors = 24;

/// Color names by class id, ordered by descending frequency in the corpus.
const std::array<std::string_view, kNumColors>& color_names();
std::string_view color_name(int id);
/// Throws InvalidInput for unknown names.
int color_id(std::string_view name);

struct ObjectAnnotation {
  Box box;
  int class_id = 0;
};

struct AnnotatedImage {
  std::string path;
  int width = 0;
  int height = 0;
  std::vector<ObjectAnnotation> objects;
};

using Dataset = std::vector<AnnotatedImage>;

/// One JSON object per line:
///   {"image": str, "width": int, "height": int,
///    "objects": [{"bbox": [x1, y1, x2, y2], "color": int}]}
/// Blank lines are skipped. Errors are DataError naming the line.
Dataset load_annotations(const std::string& path);
Dataset parse_annotations(std::istream& in, const std::string& source);

std::string to_jsonl(const AnnotatedImage& img);
void write_annotations(const std::string& path, std::span<const AnnotatedImage> images);

struct ClassStats {
  std::array<std::size_t, kNumColors> counts{};
  std::array<double, kNumColors> proportions{};
  std::size_t total = 0;
  std::size_t images = 0;
  double imbalance = 0;  // max / min over non-empty classes
};

ClassStats class_stats(std::span<const AnnotatedImage> images);

/// Published per-class object counts and rounded percentages.
struct ReferenceClassCount {
  std::string_view name;
  std::size_t count;
  double percent;
};
const std::array<ReferenceClassCount, kNumColors>& table2_reference();
inline constexpr std::size_t kTable2Total = 31232;

struct SplitRatios {
  double train = 8;
  double val = 1;
  double test = 1;
};

struct Split {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Image-granular stratified split. Images are put in a canonical order
/// (sorted by path, then shuffled by seed), grouped by the rarest class they
/// contain (rarest group first, larger images first within a group), and each
/// goes to the split that most reduces the frequency-weighted distance of
/// per-class object counts from their targets. Images without objects balance
/// image counts.
Split stratified_split(std::span<const AnnotatedImage> images, SplitRatios ratios = {},
                       std::uint64_t seed = 0);

}  // namespace colordet
