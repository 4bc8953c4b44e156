#include "oracles.hpp"

#include <algorithm>
#include <set>

namespace colordet::testing {

std::vector<std::size_t> nms_reference(const std::vector<Box>& boxes,
                                       const std::vector<double>& scores, double thresh) {
  std::vector<bool> alive(boxes.size(), true);
  std::vector<std::size_t> kept;
  while (true) {
    std::ptrdiff_t best = -1;
    for (std::size_t i = 0; i < boxes.size(); ++i)
      if (alive[i] && (best < 0 || scores[i] > scores[best])) best = static_cast<std::ptrdiff_t>(i);
    if (best < 0) break;
    kept.push_back(static_cast<std::size_t>(best));
    alive[best] = false;
    for (std::size_t j = 0; j < boxes.size(); ++j)
      if (alive[j] && iou(boxes[best], boxes[j]) > thresh) alive[j] = false;
  }
  return kept;
}

double integrate_envelope(const std::vector<MatchFlag>& ranked, std::size_t n_gt) {
  std::vector<std::pair<double, double>> pts;  // (recall, precision)
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    tp += ranked[k] == MatchFlag::TruePositive;
    pts.emplace_back(static_cast<double>(tp) / n_gt, static_cast<double>(tp) / (k + 1));
  }
  std::set<double> levels{0.0};
  for (const auto& p : pts) levels.insert(p.first);
  double area = 0;
  for (auto it = std::next(levels.begin()); it != levels.end(); ++it) {
    const double a = *std::prev(it), b = *it, mid = 0.5 * (a + b);
    double best = 0;
    for (const auto& p : pts)
      if (p.first >= mid) best = std::max(best, p.second);
    area += (b - a) * best;
  }
  return area;
}

std::vector<std::vector<MatchFlag>> all_patterns(int max_len) {
  std::vector<std::vector<MatchFlag>> out;
  for (int len = 1; len <= max_len; ++len)
    for (int mask = 0; mask < (1 << len); ++mask) {
      std::vector<MatchFlag> f(len);
      for (int i = 0; i < len; ++i)
        f[i] = (mask >> i) & 1 ? MatchFlag::TruePositive : MatchFlag::FalsePositive;
      out.push_back(f);
    }
  return out;
}

std::map<std::string, std::size_t> enumerate_weights(const LayerGraph& graph,
                                                     const BackboneWeights& weights) {
  auto tally = [](const Tensor& t) {
    std::size_t n = 0;
    for ([[maybe_unused]] double v : t.data()) ++n;
    return n;
  };
  std::map<std::string, std::size_t> counts;
  counts["Conv1"] = tally(weights.stem);
  for (std::size_t s = 0; s < graph.stages.size(); ++s) {
    std::size_t n = 0;
    for (const auto& b : weights.stages[s]) {
      n += tally(b.reduce) + tally(b.inner) + tally(b.expand);
      if (b.projection) n += tally(*b.projection);
    }
    counts[graph.stages[s].name] = n;
  }
  counts["Fc"] = tally(weights.fc);
  return counts;
}

std::vector<double> numeric_grad(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

}  // namespace colordet::testing
