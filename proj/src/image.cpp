#include "colordet/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "colordet/error.hpp"

namespace colordet {

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 1 || height < 1)
    throw InvalidInput("image dims must be >= 1, got " + std::to_string(width) + "x" +
                       std::to_string(height));
  data_.assign(pixels() * kChannels, fill);
}

Image Image::from_rgb8(int width, int height, std::span<const std::uint8_t> rgb) {
  Image img(width, height);
  if (rgb.size() != img.data_.size())
    throw InvalidInput("from_rgb8: expected " + std::to_string(img.data_.size()) +
                       " samples, got " + std::to_string(rgb.size()));
  for (std::size_t i = 0; i < rgb.size(); ++i) img.data_[i] = rgb[i] / 255.0;
  return img;
}

std::uint8_t quantize8(double v) noexcept {
  const double scaled = std::clamp(v, 0.0, 1.0) * 255.0;
  return static_cast<std::uint8_t>(std::floor(scaled + 0.5));
}

std::vector<std::uint8_t> Image::to_rgb8() const {
  std::vector<std::uint8_t> out(data_.size());
  std::transform(data_.begin(), data_.end(), out.begin(), quantize8);
  return out;
}

void Image::clamp() noexcept {
  for (double& v : data_) v = std::clamp(v, 0.0, 1.0);
}

Image read_image(const std::string& path) {
  cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) throw DataError(path, 0, "cannot decode image");
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  if (!rgb.isContinuous()) rgb = rgb.clone();
  return Image::from_rgb8(rgb.cols, rgb.rows,
                          std::span<const std::uint8_t>(rgb.data, rgb.total() * 3));
}

void write_image(const Image& img, const std::string& path) {
  if (img.empty()) throw InvalidInput("write_image: empty image");
  auto bytes = img.to_rgb8();
  cv::Mat rgb(img.height(), img.width(), CV_8UC3, bytes.data());
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  bool ok = false;
  try {
    ok = cv::imwrite(path, bgr);
  } catch (const cv::Exception& e) {
    throw DataError(path, 0, e.what());
  }
  if (!ok) throw DataError(path, 0, "cannot encode image (unsupported extension?)");
}

Image resize_bilinear(const Image& img, int width, int height) {
  if (img.empty()) throw InvalidInput("resize_bilinear: empty image");
  Image out(width, height);
  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;
  for (int y = 0; y < height; ++y) {
    // Pixel-center alignment.
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double ay = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double ax = fx - x0;
      for (int c = 0; c < Image::kChannels; ++c) {
        const double top = img.at(y0, x0, c) * (1 - ax) + img.at(y0, x1, c) * ax;
        const double bot = img.at(y1, x0, c) * (1 - ax) + img.at(y1, x1, c) * ax;
        out.at(y, x, c) = top * (1 - ay) + bot * ay;
      }
    }
  }
  return out;
}

Tensor to_tensor(const Image& img) {
  if (img.empty()) throw InvalidInput("to_tensor: empty image");
  Tensor t({1, Image::kChannels, img.height(), img.width()});
  for (int c = 0; c < Image::kChannels; ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) t.at(0, c, y, x) = img.at(y, x, c);
  return t;
}

}  // namespace colordet
