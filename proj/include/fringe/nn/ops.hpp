#pragma once

#include "fringe/nn/tensor.hpp"

namespace fringe::nn {

struct ConvGeometry {
  int stride = 1;
  int padding = 0;
};

// Output size of a convolution along one axis.
inline int conv_out_size(int in, int kernel, ConvGeometry g) { return (in + 2 * g.padding - kernel) / g.stride + 1; }

// Cross-correlation with zero padding. w: (out_ch, in_ch, k, k); b: (1, out_ch, 1, 1).
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, ConvGeometry g);

template <typename T>
struct ConvGrads {
  Tensor<T> x, w, b;
};

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& upstream, ConvGeometry g);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x);
// Gradient through relu given the forward output.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& upstream);

template <typename T>
Tensor<T> upsample_nearest2x(const Tensor<T>& x);
template <typename T>
Tensor<T> upsample_nearest2x_backward(const Tensor<T>& upstream);

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_channels(const Tensor<T>& x, int first_channels);

template <typename T>
struct LossResult {
  double loss = 0.0;
  Tensor<T> grad;
};

// Mean squared error over all elements; grad = 2 (pred - target) / count.
template <typename T>
LossResult<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target);

}  // namespace fringe::nn
