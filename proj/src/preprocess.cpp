#include "colordet/preprocess.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string>

#include "colordet/error.hpp"

namespace colordet {

void DehazeParams::validate() const {
  if (window < 1 || window % 2 == 0)
    throw InvalidInput("dehaze: window must be odd and >= 1, got " + std::to_string(window));
  if (!(omega >= 0 && omega <= 1)) throw InvalidInput("dehaze: omega must lie in [0, 1]");
  if (!(t0 > 0 && t0 < 1)) throw InvalidInput("dehaze: t0 must lie in (0, 1)");
  if (!(top_fraction > 0 && top_fraction <= 1))
    throw InvalidInput("dehaze: top_fraction must lie in (0, 1]");
}

IllumParams parse_illum(std::string_view spec) {
  if (spec == "night") return IllumParams::night();
  if (spec == "noon") return IllumParams::noon();
  constexpr std::string_view prefix = "custom:";
  if (spec.starts_with(prefix)) {
    const std::string body(spec.substr(prefix.size()));
    const auto comma = body.find(',');
    if (comma != std::string::npos) {
      try {
        std::size_t used_a = 0, used_b = 0;
        const std::string a = body.substr(0, comma), b = body.substr(comma + 1);
        IllumParams p{std::stod(a, &used_a), std::stod(b, &used_b)};
        if (used_a == a.size() && used_b == b.size()) {
          if (!(p.alpha > 0)) throw InvalidInput("illum: alpha must be > 0");
          return p;
        }
      } catch (const std::logic_error&) {
        // fall through to the generic message
      }
    }
  }
  throw InvalidInput("illum: expected night, noon or custom:ALPHA,BETA, got '" +
                     std::string(spec) + "'");
}

namespace {

void check_window(int window) {
  if (window < 1 || window % 2 == 0)
    throw InvalidInput("window must be odd and >= 1, got " + std::to_string(window));
}

void check_same_grid(const Image& img, const Map2D& m, const char* op) {
  if (m.width != img.width() || m.height != img.height() ||
      m.values.size() != img.pixels())
    throw InvalidInput(std::string(op) + ": map is " + std::to_string(m.width) + "x" +
                       std::to_string(m.height) + ", image is " +
                       std::to_string(img.width()) + "x" + std::to_string(img.height()));
}

/// Separable clipped-window minimum.
Map2D min_filter(const Map2D& src, int window) {
  const int r = window / 2;
  Map2D rows{src.width, src.height, std::vector<double>(src.values.size())};
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      double m = src.at(y, x);
      for (int k = std::max(0, x - r); k <= std::min(src.width - 1, x + r); ++k)
        m = std::min(m, src.at(y, k));
      rows.at(y, x) = m;
    }
  Map2D out{src.width, src.height, std::vector<double>(src.values.size())};
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      double m = rows.at(y, x);
      for (int k = std::max(0, y - r); k <= std::min(src.height - 1, y + r); ++k)
        m = std::min(m, rows.at(k, x));
      out.at(y, x) = m;
    }
  return out;
}

template <typename Sample>
Map2D channel_min(const Image& img, Sample sample) {
  Map2D m{img.width(), img.height(), std::vector<double>(img.pixels())};
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      m.at(y, x) = std::min({sample(y, x, 0), sample(y, x, 1), sample(y, x, 2)});
  return m;
}

}  // namespace

Map2D dark_channel(const Image& img, int window) {
  if (img.empty()) throw InvalidInput("dark_channel: empty image");
  check_window(window);
  return min_filter(channel_min(img, [&](int y, int x, int c) { return img.at(y, x, c); }),
                    window);
}

Rgb estimate_atmosphere(const Image& img, const Map2D& dark, double top_fraction) {
  if (img.empty()) throw InvalidInput("estimate_atmosphere: empty image");
  check_same_grid(img, dark, "estimate_atmosphere");
  if (!(top_fraction > 0 && top_fraction <= 1))
    throw InvalidInput("estimate_atmosphere: top_fraction must lie in (0, 1]");

  const std::size_t n = img.pixels();
  const std::size_t take = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(top_fraction * static_cast<double>(n))));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (dark.values[a] != dark.values[b])
                        return dark.values[a] > dark.values[b];
                      return a < b;
                    });
  Rgb a{0, 0, 0};
  const auto px = img.data();
  for (std::size_t k = 0; k < take; ++k)
    for (std::size_t c = 0; c < 3; ++c) a[c] += px[idx[k] * 3 + c];
  for (double& v : a) v = std::max(v / static_cast<double>(take), kAtmosphereFloor);
  return a;
}

Map2D estimate_transmission(const Image& img, const Rgb& atmosphere, int window,
                            double omega) {
  if (img.empty()) throw InvalidInput("estimate_transmission: empty image");
  check_window(window);
  for (double v : atmosphere)
    if (!(v > 0)) throw InvalidInput("estimate_transmission: atmosphere must be > 0");
  Map2D dark = min_filter(
      channel_min(img,
                  [&](int y, int x, int c) {
                    return img.at(y, x, c) / atmosphere[static_cast<std::size_t>(c)];
                  }),
      window);
  for (double& v : dark.values) v = std::clamp(1.0 - omega * v, 0.0, 1.0);
  return dark;
}

Image recover(const Image& img, const Rgb& atmosphere, const Map2D& t, double t0) {
  if (img.empty()) throw InvalidInput("recover: empty image");
  check_same_grid(img, t, "recover");
  if (!(t0 > 0 && t0 < 1)) throw InvalidInput("recover: t0 must lie in (0, 1)");
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      // (I - A) / t + A rewritten as I + (I - A)(1/t - 1); exact when t = 1
      // or I = A.
      const double gain = 1.0 / std::max(t.at(y, x), t0) - 1.0;
      for (int c = 0; c < 3; ++c) {
        const double i = img.at(y, x, c);
        const double a = atmosphere[static_cast<std::size_t>(c)];
        out.at(y, x, c) = std::clamp(i + (i - a) * gain, 0.0, 1.0);
      }
    }
  return out;
}

Image dehaze(const Image& img, const DehazeParams& params) {
  params.validate();
  const Map2D dark = dark_channel(img, params.window);
  const Rgb a = estimate_atmosphere(img, dark, params.top_fraction);
  const Map2D t = estimate_transmission(img, a, params.window, params.omega);
  return recover(img, a, t, params.t0);
}

Image illum_adjust(const Image& img, const IllumParams& params) {
  if (!(params.alpha > 0)) throw InvalidInput("illum_adjust: alpha must be > 0");
  if (img.empty()) throw InvalidInput("illum_adjust: empty image");
  Image out = img;
  for (double& v : out.data())
    v = std::clamp(params.alpha * (v * 255.0) + params.beta, 0.0, 255.0) / 255.0;
  return out;
}

}  // namespace colordet
