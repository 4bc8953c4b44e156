#include "colordet/kernel.hpp"

#include <algorithm>
#include <limits>

#include "colordet/error.hpp"

namespace colordet {

int conv_out_dim(int in, int kernel, int stride, Padding pad) noexcept {
  const int span = in + pad.total() - kernel;
  if (span < 0 || stride < 1) return 0;
  return span / stride + 1;
}

namespace {

void check_window(const Shape& s, int kh, int kw, int stride, Padding pad,
                  const char* op) {
  if (kh < 1 || kw < 1 || stride < 1 || pad.begin < 0 || pad.end < 0)
    throw InvalidInput(std::string(op) + ": kernel and stride must be >= 1, padding >= 0");
  if (conv_out_dim(s.h, kh, stride, pad) < 1 || conv_out_dim(s.w, kw, stride, pad) < 1)
    throw InvalidInput(std::string(op) + ": window " + std::to_string(kh) + "x" +
                       std::to_string(kw) + " does not fit input " + s.str());
}

template <typename Init, typename Accum, typename Finish>
Tensor pool(const Tensor& x, const PoolSpec& spec, const char* op, Init init,
            Accum accum, Finish finish) {
  const Shape& s = x.shape();
  check_window(s, spec.kernel, spec.kernel, spec.stride, spec.padding, op);
  const int oh = conv_out_dim(s.h, spec.kernel, spec.stride, spec.padding);
  const int ow = conv_out_dim(s.w, spec.kernel, spec.stride, spec.padding);
  Tensor out({s.n, s.c, oh, ow});
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int oy = 0; oy < oh; ++oy) {
        const int y0 = oy * spec.stride - spec.padding.begin;
        const int ylo = std::max(y0, 0);
        const int yhi = std::min(y0 + spec.kernel, s.h);
        for (int ox = 0; ox < ow; ++ox) {
          const int x0 = ox * spec.stride - spec.padding.begin;
          const int xlo = std::max(x0, 0);
          const int xhi = std::min(x0 + spec.kernel, s.w);
          double acc = init();
          for (int y = ylo; y < yhi; ++y)
            for (int xx = xlo; xx < xhi; ++xx) acc = accum(acc, x.at(n, c, y, xx));
          // A window lying entirely in padding has no in-bounds cells.
          const int count = std::max(yhi - ylo, 0) * std::max(xhi - xlo, 0);
          out.at(n, c, oy, ox) = finish(acc, count);
        }
      }
  return out;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, const ConvSpec& spec,
              std::span<const double> bias) {
  const Shape& s = x.shape();
  if (s.c != spec.in_channels)
    throw InvalidInput("conv2d: input has " + std::to_string(s.c) +
                       " channels, spec expects " + std::to_string(spec.in_channels));
  if (!(weight.shape() == spec.weight_shape()))
    throw InvalidInput("conv2d: weight shape " + weight.shape().str() +
                       " does not match spec " + spec.weight_shape().str());
  if (spec.bias && bias.size() != static_cast<std::size_t>(spec.out_channels))
    throw InvalidInput("conv2d: bias requires out_channels values");
  if (!spec.bias && !bias.empty())
    throw InvalidInput("conv2d: bias given but spec has bias disabled");
  check_window(s, spec.kernel_h, spec.kernel_w, spec.stride, spec.padding, "conv2d");

  const int oh = conv_out_dim(s.h, spec.kernel_h, spec.stride, spec.padding);
  const int ow = conv_out_dim(s.w, spec.kernel_w, spec.stride, spec.padding);
  Tensor out({s.n, spec.out_channels, oh, ow});
  const int stride = spec.stride;
  const int pb = spec.padding.begin;

  for (int n = 0; n < s.n; ++n)
    for (int oc = 0; oc < spec.out_channels; ++oc) {
      double* dst = &out.at(n, oc, 0, 0);
      if (spec.bias) std::fill(dst, dst + static_cast<std::size_t>(oh) * ow, bias[oc]);
      for (int ic = 0; ic < s.c; ++ic) {
        const double* src = x.data().data() + x.offset(n, ic, 0, 0);
        for (int ky = 0; ky < spec.kernel_h; ++ky)
          for (int kx = 0; kx < spec.kernel_w; ++kx) {
            const double wv = weight.at(oc, ic, ky, kx);
            if (wv == 0.0) continue;
            // Output columns whose input column ox*stride - pb + kx is in range.
            const int ox_lo = std::max(0, (pb - kx + stride - 1) / stride);
            const int last = s.w - 1 + pb - kx;
            const int ox_hi = last < 0 ? 0 : std::min(ow, last / stride + 1);
            for (int oy = 0; oy < oh; ++oy) {
              const int iy = oy * stride - pb + ky;
              if (iy < 0 || iy >= s.h) continue;
              const double* row = src + static_cast<std::size_t>(iy) * s.w;
              double* orow = dst + static_cast<std::size_t>(oy) * ow;
              for (int ox = ox_lo; ox < ox_hi; ++ox)
                orow[ox] += wv * row[ox * stride - pb + kx];
            }
          }
      }
    }
  return out;
}

Tensor max_pool(const Tensor& x, const PoolSpec& spec) {
  constexpr double lowest = -std::numeric_limits<double>::infinity();
  return pool(
      x, spec, "max_pool", [] { return lowest; },
      [](double a, double v) { return std::max(a, v); },
      [](double a, int count) { return count > 0 ? a : 0.0; });
}

Tensor avg_pool(const Tensor& x, const PoolSpec& spec) {
  return pool(
      x, spec, "avg_pool", [] { return 0.0; }, [](double a, double v) { return a + v; },
      [](double a, int count) { return count > 0 ? a / count : 0.0; });
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  for (double& v : out.data()) v = std::max(v, 0.0);
  return out;
}

Tensor add(const Tensor& x, const Tensor& y) {
  if (!(x.shape() == y.shape()))
    throw InvalidInput("add: shape mismatch " + x.shape().str() + " vs " + y.shape().str());
  Tensor out = x;
  auto dst = out.data();
  auto src = y.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return out;
}

Tensor upsample_nearest(const Tensor& x, int factor) {
  if (factor < 1) throw InvalidInput("upsample_nearest: factor must be >= 1");
  const Shape& s = x.shape();
  Tensor out({s.n, s.c, s.h * factor, s.w * factor});
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < s.h * factor; ++y)
        for (int xx = 0; xx < s.w * factor; ++xx)
          out.at(n, c, y, xx) = x.at(n, c, y / factor, xx / factor);
  return out;
}

}  // namespace colordet
