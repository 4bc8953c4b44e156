#pragma once

#include <array>
#include <string_view>

#include "colordet/image.hpp"

namespace colordet {

using Rgb = std::array<double, 3>;

struct DehazeParams {
  int window = 15;             // odd side of the square patch
  double omega = 0.95;         // fraction of haze removed
  double t0 = 0.1;             // transmission floor
  double top_fraction = 0.001; // brightest dark-channel share used for A

  void validate() const;
};

struct IllumParams {
  double alpha = 1.0;
  double beta = 0.0;  // 8-bit units

  static constexpr IllumParams night() { return {1.5, 0.0}; }
  static constexpr IllumParams noon() { return {0.8, -10.0}; }
};

/// Parses "night", "noon" or "custom:A,B".
IllumParams parse_illum(std::string_view spec);

/// Lower bound on each atmospheric-light channel.
inline constexpr double kAtmosphereFloor = 1.0 / 255.0;

/// Min over channels of the min over the window centered at each pixel;
/// windows are clipped at the borders.
Map2D dark_channel(const Image& img, int window);

/// Per-channel mean of the pixels holding the top `top_fraction` of dark
/// values (at least one pixel, ties by pixel index), floored at 1/255.
Rgb estimate_atmosphere(const Image& img, const Map2D& dark, double top_fraction);

/// t = 1 - omega * dark_channel(I / A), clipped to [0, 1].
Map2D estimate_transmission(const Image& img, const Rgb& atmosphere, int window,
                            double omega);

/// J = (I - A) / max(t, t0) + A, clamped to [0, 1].
Image recover(const Image& img, const Rgb& atmosphere, const Map2D& t, double t0 = 0.1);

Image dehaze(const Image& img, const DehazeParams& params = {});

/// Val = alpha * Col + beta on 8-bit scale, clamped to [0, 255].
Image illum_adjust(const Image& img, const IllumParams& params);

}  // namespace colordet
