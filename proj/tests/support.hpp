#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <json.hpp>

#include "fringe/grid.hpp"
#include "fringe/nn/tensor.hpp"

namespace fringe::test {

inline const nlohmann::json& oracles() {
  static const nlohmann::json j = [] {
    std::ifstream in(FRINGE_ORACLES);
    if (!in) throw std::runtime_error("cannot open oracle file " FRINGE_ORACLES);
    return nlohmann::json::parse(in);
  }();
  return j;
}

// Fresh, empty scratch directory below the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::path(FRINGE_SCRATCH) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// 100 + 10 u + 80 cos(2 pi f x / w + bump), u = 2x/(w-1) - 1, bump centred at (w/2, h/2).
inline Image bump_fringe(int w, int h, double f, double amp, double sigma, Image* phase = nullptr) {
  Image img(w, h);
  if (phase) *phase = Image(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double u = 2.0 * x / (w - 1) - 1.0;
      const double dx = x - w / 2.0, dy = y - h / 2.0;
      const double obj = amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      const double ph = kTwoPi * f * x / w + obj;
      img(x, y) = 100.0 + 10.0 * u + 80.0 * std::cos(ph);
      if (phase) (*phase)(x, y) = ph;
    }
  }
  return img;
}

template <typename T>
nn::Tensor<T> random_tensor(std::array<int, 4> dims, std::mt19937_64& rng, double scale = 1.0) {
  nn::Tensor<T> t(dims);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& v : t.values()) v = static_cast<T>(u(rng));
  return t;
}

inline Image random_image(int w, int h, std::mt19937_64& rng, double lo, double hi) {
  Image img(w, h);
  std::uniform_real_distribution<double> u(lo, hi);
  for (auto& v : img.values()) v = u(rng);
  return img;
}

inline double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace fringe::test
