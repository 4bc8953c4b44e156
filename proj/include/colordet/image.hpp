#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "colordet/tensor.hpp"

namespace colordet {

/// Interleaved RGB raster with samples in [0, 1].
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int width, int height, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t pixels() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  double& at(int y, int x, int c) noexcept { return data_[index(y, x, c)]; }
  double at(int y, int x, int c) const noexcept { return data_[index(y, x, c)]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  /// 8-bit samples (row-major, RGB interleaved) mapped to v / 255.
  static Image from_rgb8(int width, int height, std::span<const std::uint8_t> rgb);
  /// Rounds v * 255 half-up after clamping to [0, 1].
  std::vector<std::uint8_t> to_rgb8() const;

  void clamp() noexcept;

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Single-channel map with the same pixel grid as an Image.
struct Map2D {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int y, int x) const noexcept {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  double& at(int y, int x) noexcept {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

std::uint8_t quantize8(double v) noexcept;

/// PNG or JPEG by extension. Throws DataError on failure.
Image read_image(const std::string& path);
void write_image(const Image& img, const std::string& path);

Image resize_bilinear(const Image& img, int width, int height);

/// (1, 3, H, W) tensor holding the image samples.
Tensor to_tensor(const Image& img);

}  // namespace colordet
