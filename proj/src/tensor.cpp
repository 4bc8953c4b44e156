#include "colordet/tensor.hpp"

#include <bit>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "colordet/error.hpp"

namespace colordet {

std::string Shape::str() const {
  return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) +
         "x" + std::to_string(w);
}

namespace {
void check_shape(const Shape& s) {
  if (s.n < 1 || s.c < 1 || s.h < 1 || s.w < 1)
    throw InvalidInput("tensor dims must be >= 1, got " + s.str());
}
}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(shape) {
  check_shape(shape);
  data_.assign(shape.numel(), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  check_shape(shape);
  if (data_.size() != shape.numel())
    throw InvalidInput("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape.str());
}

Tensor Tensor::uniform(Shape shape, std::uint64_t seed, double lo, double hi) {
  Tensor t(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& v : t.data_) v = dist(rng);
  return t;
}

void dump_tensor(const Tensor& t, const std::string& stem) {
  static_assert(std::endian::native == std::endian::little,
                "tensor dumps assume a little-endian host");
  std::ofstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw DataError(stem + ".bin", 0, "cannot open for writing");
  auto data = t.data();
  bin.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size_bytes()));

  const auto& s = t.shape();
  nlohmann::json meta = {{"schema_version", 1},
                         {"shape", {s.n, s.c, s.h, s.w}},
                         {"dtype", "float64"}};
  std::ofstream js(stem + ".json");
  if (!js) throw DataError(stem + ".json", 0, "cannot open for writing");
  js << meta.dump(2) << '\n';
}

Tensor load_tensor(const std::string& stem) {
  std::ifstream js(stem + ".json");
  if (!js) throw DataError(stem + ".json", 0, "cannot open");
  nlohmann::json meta;
  try {
    js >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(stem + ".json", 0, e.what());
  }
  const auto dims = meta.at("shape").get<std::vector<int>>();
  if (dims.size() != 4) throw DataError(stem + ".json", 0, "shape must have 4 dims");
  Shape s{dims[0], dims[1], dims[2], dims[3]};
  std::vector<double> data(s.numel());
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw DataError(stem + ".bin", 0, "cannot open");
  bin.read(reinterpret_cast<char*>(data.data()),
           static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (bin.gcount() != static_cast<std::streamsize>(data.size() * sizeof(double)))
    throw DataError(stem + ".bin", 0, "truncated tensor payload");
  return Tensor(s, std::move(data));
}

}  // namespace colordet
