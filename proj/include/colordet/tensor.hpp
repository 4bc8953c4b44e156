#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace colordet {

/// NCHW extents of a dense 4-D tensor.
struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t numel() const noexcept {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// Dense row-major NCHW tensor of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  std::size_t offset(int n, int c, int h, int w) const noexcept {
    return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) *
               shape_.w +
           w;
  }
  double& at(int n, int c, int h, int w) noexcept {
    return data_[offset(n, c, h, w)];
  }
  double at(int n, int c, int h, int w) const noexcept {
    return data_[offset(n, c, h, w)];
  }

  /// Seeded uniform fill in [lo, hi]; same seed gives the same values.
  static Tensor uniform(Shape shape, std::uint64_t seed, double lo = -0.01,
                        double hi = 0.01);

 private:
  Shape shape_{};
  std::vector<double> data_;
};

/// Writes `<stem>.bin` (little-endian float64, NCHW order) and
/// `<stem>.json` ({"shape": [n,c,h,w], "dtype": "float64"}).
void dump_tensor(const Tensor& t, const std::string& stem);

/// Reads a tensor written by dump_tensor.
Tensor load_tensor(const std::string& stem);

}  // namespace colordet
