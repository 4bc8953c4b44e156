#pragma once

#include <array>
#include <cstdint>

#include "colordet/backbone.hpp"
#include "colordet/tensor.hpp"

namespace colordet {

struct FpnConfig {
  int channels = 256;       // common width d of every level
  double norm_scale = 20.0; // per-location L2 norm after normalization
};

/// Lateral 1x1 projections and 3x3 smoothing convs, indexed 0..3 for
/// levels 2..5.
struct FpnWeights {
  std::array<Tensor, 4> lateral;  // (d, C_i, 1, 1)
  std::array<Tensor, 4> smooth;   // (d, d, 3, 3)
};

/// P2..P5; each level halves the spatial dims of the previous one.
struct Pyramid {
  std::array<Tensor, 4> levels;

  const Tensor& p2() const { return levels[0]; }
  const Tensor& p3() const { return levels[1]; }
  const Tensor& p4() const { return levels[2]; }
  const Tensor& p5() const { return levels[3]; }
};

inline constexpr double kNormEpsilon = 1e-12;

/// Divides each location's channel vector by max(||v||, eps) and multiplies
/// by scale. Zero vectors stay zero.
Tensor l2_normalize(const Tensor& x, double scale);

Tensor lateral(const Tensor& c, const Tensor& weight);

/// upsample_nearest(upper, 2) + lateral_out.
Tensor top_down_merge(const Tensor& upper, const Tensor& lateral_out);

/// 3x3, stride 1, pad 1.
Tensor smooth(const Tensor& x, const Tensor& weight);

FpnWeights init_fpn_weights(const StageOutputs& shapes_from, const FpnConfig& cfg,
                            std::uint64_t seed);
FpnWeights init_fpn_weights(std::array<int, 4> stage_channels, const FpnConfig& cfg,
                            std::uint64_t seed);

Pyramid build_pyramid(const StageOutputs& stages, const FpnWeights& weights,
                      const FpnConfig& cfg = {});

}  // namespace colordet
