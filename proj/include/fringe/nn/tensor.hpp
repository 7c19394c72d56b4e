#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fringe/grid.hpp"

namespace fringe::nn {

// Rank-4 NCHW tensor.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  Tensor(int n, int c, int h, int w, T fill = T{}) : dims_{n, c, h, w} {
    for (int d : dims_)
      if (d < 0) throw ValidationError("tensor dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(n) * c * h * w, fill);
  }
  explicit Tensor(std::array<int, 4> dims, T fill = T{}) : Tensor(dims[0], dims[1], dims[2], dims[3], fill) {}

  const std::array<int, 4>& dims() const { return dims_; }
  int batch() const { return dims_[0]; }
  int channels() const { return dims_[1]; }
  int height() const { return dims_[2]; }
  int width() const { return dims_[3]; }
  std::size_t size() const { return data_.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(dims_[2]) * dims_[3]; }
  std::size_t sample_size() const { return plane() * dims_[1]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& at(int n, int c, int y, int x) { return data_[index(n, c, y, x)]; }
  const T& at(int n, int c, int y, int x) const { return data_[index(n, c, y, x)]; }

  T* sample(int n) { return data_.data() + static_cast<std::size_t>(n) * sample_size(); }
  const T* sample(int n) const { return data_.data() + static_cast<std::size_t>(n) * sample_size(); }
  T* channel(int n, int c) { return sample(n) + static_cast<std::size_t>(c) * plane(); }
  const T* channel(int n, int c) const { return sample(n) + static_cast<std::size_t>(c) * plane(); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  bool same_dims(const Tensor& o) const { return dims_ == o.dims_; }
  bool operator==(const Tensor&) const = default;

  std::string shape_string() const {
    return std::to_string(dims_[0]) + "x" + std::to_string(dims_[1]) + "x" + std::to_string(dims_[2]) + "x" +
           std::to_string(dims_[3]);
  }

 private:
  std::size_t index(int n, int c, int y, int x) const {
    return ((static_cast<std::size_t>(n) * dims_[1] + c) * dims_[2] + y) * dims_[3] + x;
  }

  std::array<int, 4> dims_{0, 0, 0, 0};
  std::vector<T> data_;
};

// Trainable tensor with its gradient buffer.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  Parameter() = default;
  Parameter(std::string n, std::array<int, 4> dims) : name(std::move(n)), value(dims), grad(dims) {}
  void zero_grad() { grad.fill(T{}); }
};

template <typename T>
void require_same_dims(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (!a.same_dims(b)) throw ValidationError(std::string(what) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}

}  // namespace fringe::nn
