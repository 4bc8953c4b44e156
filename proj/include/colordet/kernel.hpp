#pragma once

#include "colordet/tensor.hpp"

namespace colordet {

/// Zero padding applied before and after each spatial axis.
struct Padding {
  int begin = 0;
  int end = 0;

  constexpr Padding() = default;
  constexpr Padding(int symmetric) : begin(symmetric), end(symmetric) {}  // NOLINT
  constexpr Padding(int b, int e) : begin(b), end(e) {}
  constexpr int total() const noexcept { return begin + end; }
  bool operator==(const Padding&) const = default;
};

struct ConvSpec {
  int in_channels = 1;
  int out_channels = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  Padding padding{};
  bool bias = false;

  Shape weight_shape() const noexcept {
    return {out_channels, in_channels, kernel_h, kernel_w};
  }
  std::size_t param_count() const noexcept {
    return weight_shape().numel() + (bias ? out_channels : 0);
  }
};

struct PoolSpec {
  int kernel = 1;
  int stride = 1;
  Padding padding{};
};

/// floor((in + pad - kernel) / stride) + 1; returns <= 0 when the window
/// does not fit.
int conv_out_dim(int in, int kernel, int stride, Padding pad) noexcept;

/// Cross-correlation. `weight` has shape (out, in, kh, kw); `bias` is either
/// empty or holds out_channels values and is required iff spec.bias.
Tensor conv2d(const Tensor& x, const Tensor& weight, const ConvSpec& spec,
              std::span<const double> bias = {});

/// Padded cells never win the max.
Tensor max_pool(const Tensor& x, const PoolSpec& spec);

/// Mean over the in-bounds part of each window.
Tensor avg_pool(const Tensor& x, const PoolSpec& spec);

Tensor relu(const Tensor& x);
Tensor add(const Tensor& x, const Tensor& y);
Tensor upsample_nearest(const Tensor& x, int factor);

}  // namespace colordet
