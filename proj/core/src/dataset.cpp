#include "preimage/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "preimage/errors.hpp"
#include "preimage/ppm.hpp"
#include "preimage/rng.hpp"

namespace preimage {

namespace {

constexpr double kBaseDiskRadius = 8.0;
constexpr double kBasePlusArm = 10.0;
constexpr double kPlusHalfWidth = 1.5;
constexpr double kBaseSquareHalf = 9.0;
constexpr double kSquareThickness = 2.5;
constexpr double kNoise = 0.05;

bool covers(ShapeClass cls, double dy, double dx, double size) {
  switch (cls) {
    case ShapeClass::disk:
      return dy * dy + dx * dx <= size * size;
    case ShapeClass::plus:
      return (std::abs(dy) <= kPlusHalfWidth && std::abs(dx) <= size) ||
             (std::abs(dx) <= kPlusHalfWidth && std::abs(dy) <= size);
    case ShapeClass::hollow_square: {
      const double m = std::max(std::abs(dy), std::abs(dx));
      return m <= size && m > size - kSquareThickness;
    }
  }
  return false;
}

double base_size(ShapeClass cls) {
  switch (cls) {
    case ShapeClass::disk:
      return kBaseDiskRadius;
    case ShapeClass::plus:
      return kBasePlusArm;
    case ShapeClass::hollow_square:
      return kBaseSquareHalf;
  }
  return 0.0;
}

Image draw(ShapeClass cls, Rng& rng) {
  const double center = (static_cast<double>(kCanvasSide) - 1.0) / 2.0;
  const double cy = center + static_cast<double>(rng.uniform_int(-4, 4));
  const double cx = center + static_cast<double>(rng.uniform_int(-4, 4));
  const double size = base_size(cls) + static_cast<double>(rng.uniform_int(-3, 3));
  const double intensity = rng.uniform(0.6, 1.0);
  Image img(kCanvasSide, kCanvasSide, 1);
  for (std::size_t y = 0; y < kCanvasSide; ++y) {
    for (std::size_t x = 0; x < kCanvasSide; ++x) {
      const double v = covers(cls, static_cast<double>(y) - cy, static_cast<double>(x) - cx, size) ? intensity : 0.0;
      img.at(y, x) = std::clamp(v + rng.uniform(-kNoise, kNoise), 0.0, 1.0);
    }
  }
  return img;
}

}  // namespace

Dataset synth_dataset(std::uint64_t seed, std::size_t n) {
  if (n == 0 || n % kNumClasses != 0) throw ParameterError("synth_dataset: n must be a positive multiple of 3");
  Rng rng(seed);
  Dataset out;
  out.seed = seed;
  out.images.reserve(n);
  out.labels.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int label = static_cast<int>(k % kNumClasses);
    out.images.push_back(draw(static_cast<ShapeClass>(label), rng));
    out.labels.push_back(label);
  }
  return out;
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json index;
  index["seed"] = data.seed;
  index["files"] = nlohmann::json::array();
  index["labels"] = data.labels;
  for (std::size_t i = 0; i < data.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img_%05zu.pgm", i);
    write_ppm(data.images[i], dir / name);
    index["files"].push_back(name);
  }
  std::ofstream f(dir / "labels.json");
  if (!f) throw FormatError("save_dataset: cannot write labels.json in " + dir.string());
  f << index.dump(2) << "\n";
}

Dataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream f(dir / "labels.json");
  if (!f) throw FormatError("load_dataset: missing labels.json in " + dir.string());
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("load_dataset: ") + e.what());
  }
  Dataset out;
  try {
    out.seed = index.at("seed").get<std::uint64_t>();
    const auto files = index.at("files").get<std::vector<std::string>>();
    out.labels = index.at("labels").get<std::vector<int>>();
    if (files.size() != out.labels.size()) throw FormatError("load_dataset: files/labels length mismatch");
    for (const auto& name : files) out.images.push_back(read_ppm(dir / name));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("load_dataset: ") + e.what());
  }
  for (int label : out.labels) {
    if (label < 0 || label >= static_cast<int>(kNumClasses)) throw FormatError("load_dataset: label out of range");
  }
  return out;
}

}  // namespace preimage
