#include "colordet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "colordet/error.hpp"

namespace colordet {

const std::array<std::string_view, kNumColors>& color_names() {
  static constexpr std::array<std::string_view, kNumColors> names = {
      "white",       "black",        "orange",       "silver-gray", "grass-green",
      "dark-gray",   "dark-red",     "gray",         "red",         "cyan",
      "champagne",   "dark-blue",    "blue",         "dark-brown",  "brown",
      "yellow",      "lemon-yellow", "dark-orange",  "dark-green",  "orange-red",
      "earth-yellow", "green",       "pink",         "purple"};
  return names;
}

std::string_view color_name(int id) {
  if (id < 0 || id >= kNumColors)
    throw InvalidInput("color id " + std::to_string(id) + " outside [0, 24)");
  return color_names()[static_cast<std::size_t>(id)];
}

int color_id(std::string_view name) {
  const auto& names = color_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InvalidInput("unknown color '" + std::string(name) + "'");
  return static_cast<int>(it - names.begin());
}

const std::array<ReferenceClassCount, kNumColors>& table2_reference() {
  static constexpr std::array<ReferenceClassCount, kNumColors> table = {{
      {"white", 11827, 37.87},     {"black", 6270, 20.08},      {"orange", 2431, 7.78},
      {"silver-gray", 2125, 6.80}, {"grass-green", 1766, 5.65}, {"dark-gray", 1555, 4.98},
      {"dark-red", 1263, 4.04},    {"gray", 736, 2.36},         {"red", 644, 2.06},
      {"cyan", 553, 1.77},         {"champagne", 466, 1.49},    {"dark-blue", 365, 1.17},
      {"blue", 316, 1.01},         {"dark-brown", 230, 0.74},   {"brown", 118, 0.38},
      {"yellow", 100, 0.32},       {"lemon-yellow", 92, 0.29},  {"dark-orange", 90, 0.29},
      {"dark-green", 70, 0.22},    {"orange-red", 63, 0.20},    {"earth-yellow", 52, 0.17},
      {"green", 50, 0.16},         {"pink", 35, 0.11},          {"purple", 15, 0.04},
  }};
  return table;
}

namespace {

AnnotatedImage parse_record(const std::string& line, const std::string& source,
                            std::size_t lineno) {
  auto fail = [&](const std::string& msg) -> DataError {
    return DataError(source, lineno, msg);
  };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw fail(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw fail("record must be a JSON object");

  AnnotatedImage img;
  auto int_field = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer())
      throw fail(std::string("missing or non-integer \"") + key + "\"");
    return j[key].get<int>();
  };
  if (!j.contains("image") || !j["image"].is_string()) throw fail("missing string \"image\"");
  img.path = j["image"].get<std::string>();
  img.width = int_field("width");
  img.height = int_field("height");
  if (img.width < 1 || img.height < 1) throw fail("image dims must be >= 1");

  if (!j.contains("objects")) return img;
  if (!j["objects"].is_array()) throw fail("\"objects\" must be an array");
  std::size_t k = 0;
  for (const auto& o : j["objects"]) {
    const std::string where = "object " + std::to_string(k++) + ": ";
    if (!o.is_object() || !o.contains("bbox") || !o["bbox"].is_array() ||
        o["bbox"].size() != 4)
      throw fail(where + "\"bbox\" must be [x1, y1, x2, y2]");
    std::array<double, 4> v{};
    for (std::size_t i = 0; i < 4; ++i) {
      if (!o["bbox"][i].is_number()) throw fail(where + "bbox entries must be numbers");
      v[i] = o["bbox"][i].get<double>();
    }
    if (!o.contains("color") || !o["color"].is_number_integer())
      throw fail(where + "missing integer \"color\"");
    const int color = o["color"].get<int>();
    if (color < 0 || color >= kNumColors)
      throw fail(where + "color " + std::to_string(color) + " outside [0, 24)");
    const Box b{v[0], v[1], v[2], v[3]};
    if (!b.valid())
      throw fail(where + "inverted box (needs x2 > x1 and y2 > y1)");
    if (b.x1 < 0 || b.y1 < 0 || b.x2 > img.width || b.y2 > img.height)
      throw fail(where + "box outside the " + std::to_string(img.width) + "x" +
                 std::to_string(img.height) + " image");
    img.objects.push_back({b, color});
  }
  return img;
}

}  // namespace

Dataset parse_annotations(std::istream& in, const std::string& source) {
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ds.push_back(parse_record(line, source, lineno));
  }
  return ds;
}

Dataset load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "cannot open annotation file");
  return parse_annotations(in, path);
}

std::string to_jsonl(const AnnotatedImage& img) {
  nlohmann::json objs = nlohmann::json::array();
  for (const auto& o : img.objects)
    objs.push_back({{"bbox", {o.box.x1, o.box.y1, o.box.x2, o.box.y2}}, {"color", o.class_id}});
  nlohmann::json j = {
      {"image", img.path}, {"width", img.width}, {"height", img.height}, {"objects", objs}};
  return j.dump();
}

void write_annotations(const std::string& path, std::span<const AnnotatedImage> images) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path, 0, "cannot open for writing");
  for (const auto& img : images) out << to_jsonl(img) << '\n';
}

ClassStats class_stats(std::span<const AnnotatedImage> images) {
  ClassStats st;
  st.images = images.size();
  for (const auto& img : images)
    for (const auto& o : img.objects) {
      if (o.class_id < 0 || o.class_id >= kNumColors)
        throw InvalidInput("class_stats: class " + std::to_string(o.class_id) + " in " +
                           img.path + " outside [0, 24)");
      ++st.counts[static_cast<std::size_t>(o.class_id)];
    }
  st.total = std::accumulate(st.counts.begin(), st.counts.end(), std::size_t{0});
  std::size_t mx = 0, mn = std::numeric_limits<std::size_t>::max();
  for (std::size_t c = 0; c < kNumColors; ++c) {
    if (st.total > 0)
      st.proportions[c] = static_cast<double>(st.counts[c]) / static_cast<double>(st.total);
    if (st.counts[c] > 0) {
      mx = std::max(mx, st.counts[c]);
      mn = std::min(mn, st.counts[c]);
    }
  }
  if (mx > 0) st.imbalance = static_cast<double>(mx) / static_cast<double>(mn);
  return st;
}

namespace {

constexpr std::size_t kSplits = 3;

/// Greedy cost of adding `add` units to a split already holding `cur`
/// against target `target`: change in absolute distance.
double delta_cost(double cur, double add, double target) {
  return std::abs(cur + add - target) - std::abs(cur - target);
}

std::size_t pick_split(const std::array<double, kSplits>& costs) {
  std::size_t best = 0;
  for (std::size_t s = 1; s < kSplits; ++s)
    if (costs[s] < costs[best] - 1e-12) best = s;
  return best;
}

}  // namespace

Split stratified_split(std::span<const AnnotatedImage> images, SplitRatios ratios,
                       std::uint64_t seed) {
  if (!(ratios.train > 0 && ratios.val > 0 && ratios.test > 0))
    throw InvalidInput("stratified_split: ratios must be positive");
  const double rsum = ratios.train + ratios.val + ratios.test;
  const std::array<double, kSplits> frac = {ratios.train / rsum, ratios.val / rsum,
                                            ratios.test / rsum};

  // Canonical order first so the result does not depend on input order.
  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::string> keys(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) keys[i] = to_jsonl(images[i]);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (images[a].path != images[b].path) return images[a].path < images[b].path;
    return keys[a] < keys[b];
  });
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);

  const ClassStats totals = class_stats(images);
  std::array<int, kNumColors> rarity{};  // 0 = rarest non-empty class
  {
    std::array<int, kNumColors> ids{};
    std::iota(ids.begin(), ids.end(), 0);
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
      return totals.counts[static_cast<std::size_t>(a)] <
             totals.counts[static_cast<std::size_t>(b)];
    });
    for (int r = 0; r < kNumColors; ++r) rarity[static_cast<std::size_t>(ids[r])] = r;
  }
  std::vector<int> group(images.size(), kNumColors);
  for (std::size_t i = 0; i < images.size(); ++i)
    for (const auto& o : images[i].objects)
      group[i] = std::min(group[i], rarity[static_cast<std::size_t>(o.class_id)]);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (group[a] != group[b]) return group[a] < group[b];
    return images[a].objects.size() > images[b].objects.size();
  });

  std::array<std::array<double, kNumColors>, kSplits> have{};
  std::array<double, kSplits> empty_have{};
  const double n_empty = static_cast<double>(
      std::count(group.begin(), group.end(), kNumColors));
  std::array<std::vector<std::size_t>, kSplits> assigned;

  std::array<double, kNumColors> per_image{};
  for (std::size_t i : order) {
    const auto& img = images[i];
    std::array<double, kSplits> costs{};
    if (img.objects.empty()) {
      for (std::size_t s = 0; s < kSplits; ++s)
        costs[s] = delta_cost(empty_have[s], 1.0, frac[s] * n_empty);
      const std::size_t s = pick_split(costs);
      empty_have[s] += 1.0;
      assigned[s].push_back(i);
      continue;
    }
    per_image.fill(0.0);
    for (const auto& o : img.objects) per_image[static_cast<std::size_t>(o.class_id)] += 1.0;
    for (std::size_t s = 0; s < kSplits; ++s)
      for (std::size_t c = 0; c < kNumColors; ++c) {
        if (per_image[c] == 0) continue;
        const double total = static_cast<double>(totals.counts[c]);
        costs[s] += delta_cost(have[s][c], per_image[c], frac[s] * total) / total;
      }
    const std::size_t s = pick_split(costs);
    for (std::size_t c = 0; c < kNumColors; ++c) have[s][c] += per_image[c];
    assigned[s].push_back(i);
  }

  // Emit each split in canonical (path) order.
  Split out;
  std::array<Dataset*, kSplits> dst = {&out.train, &out.val, &out.test};
  for (std::size_t s = 0; s < kSplits; ++s) {
    auto& ids = assigned[s];
    std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
      if (images[a].path != images[b].path) return images[a].path < images[b].path;
      return keys[a] < keys[b];
    });
    for (std::size_t i : ids) dst[s]->push_back(images[i]);
  }
  return out;
}

}  // namespace colordet
