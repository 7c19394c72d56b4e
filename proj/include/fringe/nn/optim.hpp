#pragma once

#include <cstdint>
#include <vector>

#include "fringe/nn/tensor.hpp"

namespace fringe::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct OptimState {
  std::int64_t step = 0;
  AdamConfig config;
  std::vector<Tensor<T>> first_moment;
  std::vector<Tensor<T>> second_moment;
};

// Bias-corrected Adam update. Moments are allocated on first use.
template <typename T>
void adam_step(const std::vector<Parameter<T>*>& params, OptimState<T>& state);

}  // namespace fringe::nn
