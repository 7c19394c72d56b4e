#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fringe {

// Error categories. The CLI maps them onto exit codes 1 (validation and
// configuration), 2 (IO) and 3 (numeric failure).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : ValidationError {
  using ValidationError::ValidationError;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Row-major H x W grid. x indexes columns, y indexes rows.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw ValidationError("grid dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Grid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Image = Grid<double>;
using Mask = Grid<std::uint8_t>;

struct PhaseField {
  Image values;
  bool wrapped = true;
};

// Numerator/denominator pair of the arctangent, M = c B sin(phi), D = c B cos(phi).
struct PhasorField {
  Image numerator;
  Image denominator;
  double scale_c = 1.0;
};

template <typename T, typename U>
void require_same_shape(const Grid<T>& a, const Grid<U>& b, const std::string& what) {
  if (!a.same_shape(b)) {
    throw ValidationError(what + ": dimension mismatch (" + std::to_string(a.width()) + "x" +
                          std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                          std::to_string(b.height()) + ")");
  }
}

// Wraps an angle into (-pi, pi].
double wrap_phase(double phi);

Image wrap_phase(const Image& phi);

}  // namespace fringe
