#include "colordet/fpn.hpp"

#include <algorithm>
#include <cmath>

#include "colordet/error.hpp"
#include "colordet/kernel.hpp"

namespace colordet {

Tensor l2_normalize(const Tensor& x, double scale) {
  if (!(scale > 0)) throw InvalidInput("l2_normalize: scale must be > 0");
  const Shape& s = x.shape();
  Tensor out(s);
  for (int n = 0; n < s.n; ++n)
    for (int y = 0; y < s.h; ++y)
      for (int xx = 0; xx < s.w; ++xx) {
        double sq = 0.0;
        for (int c = 0; c < s.c; ++c) sq += x.at(n, c, y, xx) * x.at(n, c, y, xx);
        const double k = scale / std::max(std::sqrt(sq), kNormEpsilon);
        for (int c = 0; c < s.c; ++c) out.at(n, c, y, xx) = x.at(n, c, y, xx) * k;
      }
  return out;
}

Tensor lateral(const Tensor& c, const Tensor& weight) {
  const Shape& ws = weight.shape();
  if (ws.h != 1 || ws.w != 1) throw InvalidInput("lateral: weights must be 1x1");
  if (ws.c != c.shape().c)
    throw InvalidInput("lateral: weights expect " + std::to_string(ws.c) +
                       " input channels, got " + std::to_string(c.shape().c));
  return conv2d(c, weight, ConvSpec{ws.c, ws.n, 1, 1, 1, 0, false});
}

Tensor top_down_merge(const Tensor& upper, const Tensor& lateral_out) {
  const Shape& u = upper.shape();
  const Shape& l = lateral_out.shape();
  if (u.n != l.n || u.c != l.c || 2 * u.h != l.h || 2 * u.w != l.w)
    throw InvalidInput("top_down_merge: upper " + u.str() +
                       " is not half the spatial size of lateral " + l.str());
  return add(upsample_nearest(upper, 2), lateral_out);
}

Tensor smooth(const Tensor& x, const Tensor& weight) {
  const Shape& ws = weight.shape();
  return conv2d(x, weight, ConvSpec{ws.c, ws.n, 3, 3, 1, 1, false});
}

FpnWeights init_fpn_weights(std::array<int, 4> stage_channels, const FpnConfig& cfg,
                            std::uint64_t seed) {
  if (cfg.channels < 1) throw InvalidInput("fpn: channel width must be >= 1");
  FpnWeights w;
  for (std::size_t i = 0; i < 4; ++i) {
    w.lateral[i] = Tensor::uniform({cfg.channels, stage_channels[i], 1, 1}, seed + 2 * i);
    w.smooth[i] = Tensor::uniform({cfg.channels, cfg.channels, 3, 3}, seed + 2 * i + 1);
  }
  return w;
}

FpnWeights init_fpn_weights(const StageOutputs& shapes_from, const FpnConfig& cfg,
                            std::uint64_t seed) {
  return init_fpn_weights({shapes_from.c2.shape().c, shapes_from.c3.shape().c,
                           shapes_from.c4.shape().c, shapes_from.c5.shape().c},
                          cfg, seed);
}

Pyramid build_pyramid(const StageOutputs& stages, const FpnWeights& weights,
                      const FpnConfig& cfg) {
  const std::array<const Tensor*, 4> c = {&stages.c2, &stages.c3, &stages.c4, &stages.c5};
  for (std::size_t i = 0; i + 1 < 4; ++i) {
    const Shape& lo = c[i]->shape();
    const Shape& hi = c[i + 1]->shape();
    if (lo.h != 2 * hi.h || lo.w != 2 * hi.w || lo.n != hi.n)
      throw InvalidInput("build_pyramid: stage " + std::to_string(i + 2) + " " + lo.str() +
                         " is not twice stage " + std::to_string(i + 3) + " " + hi.str());
  }
  for (std::size_t i = 0; i < 4; ++i)
    if (weights.lateral[i].shape().n != cfg.channels)
      throw InvalidInput("build_pyramid: lateral weights do not project to d = " +
                         std::to_string(cfg.channels));

  Pyramid p;
  // Each level merges against the already smoothed level above it.
  p.levels[3] = smooth(lateral(l2_normalize(*c[3], cfg.norm_scale), weights.lateral[3]),
                       weights.smooth[3]);
  for (int i = 2; i >= 0; --i) {
    Tensor lat = lateral(l2_normalize(*c[i], cfg.norm_scale), weights.lateral[i]);
    p.levels[i] = smooth(top_down_merge(p.levels[i + 1], lat), weights.smooth[i]);
  }
  return p;
}

}  // namespace colordet
