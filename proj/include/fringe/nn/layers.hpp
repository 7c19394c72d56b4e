#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "fringe/nn/ops.hpp"
#include "fringe/nn/tensor.hpp"

namespace fringe::nn {

// Layer descriptor recorded in checkpoints.
struct LayerSpec {
  enum class Kind { conv, relu, residual_block, upsample2x, linear_output };
  Kind kind = Kind::conv;
  std::string name;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
  int padding = 1;
};

std::string to_string(LayerSpec::Kind kind);
nlohmann::json to_json(const LayerSpec& spec);

// A differentiable block. forward() caches what backward() needs;
// backward() accumulates parameter gradients and returns the input gradient.
template <typename T>
class Module {
 public:
  virtual ~Module() = default;
  virtual Tensor<T> forward(const Tensor<T>& x) = 0;
  virtual Tensor<T> backward(const Tensor<T>& upstream) = 0;
  // Forward pass without caching; safe to call concurrently on shared weights.
  virtual Tensor<T> infer(const Tensor<T>& x) const = 0;
  virtual void collect_parameters(std::vector<Parameter<T>*>& out) = 0;
  virtual void describe(std::vector<LayerSpec>& out) const = 0;

  std::vector<Parameter<T>*> parameters() {
    std::vector<Parameter<T>*> out;
    collect_parameters(out);
    return out;
  }
  void zero_grad() {
    for (auto* p : parameters()) p->zero_grad();
  }
};

enum class Activation { linear, relu };

// Square odd kernel, "same" padding for stride 1. Optional fused ReLU.
template <typename T>
class Conv2d final : public Module<T> {
 public:
  Conv2d(std::string name, int in_ch, int out_ch, int kernel = 3, int stride = 1, Activation act = Activation::relu);

  Tensor<T> forward(const Tensor<T>& x) override;
  Tensor<T> backward(const Tensor<T>& upstream) override;
  Tensor<T> infer(const Tensor<T>& x) const override;
  void collect_parameters(std::vector<Parameter<T>*>& out) override;
  void describe(std::vector<LayerSpec>& out) const override;

  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }
  ConvGeometry geometry() const { return geom_; }

 private:
  std::string name_;
  Parameter<T> weight_;
  Parameter<T> bias_;
  ConvGeometry geom_;
  Activation act_;
  Tensor<T> input_;
  Tensor<T> output_;
};

// y = x + conv2(relu(conv1(x))).
template <typename T>
class ResidualBlock final : public Module<T> {
 public:
  ResidualBlock(std::string name, int channels);

  Tensor<T> forward(const Tensor<T>& x) override;
  Tensor<T> backward(const Tensor<T>& upstream) override;
  Tensor<T> infer(const Tensor<T>& x) const override;
  void collect_parameters(std::vector<Parameter<T>*>& out) override;
  void describe(std::vector<LayerSpec>& out) const override;

  Conv2d<T>& first() { return conv1_; }
  Conv2d<T>& second() { return conv2_; }

 private:
  std::string name_;
  int channels_;
  Conv2d<T> conv1_;
  Conv2d<T> conv2_;
};

// Learned stride-2 convolution; needs even spatial dims.
template <typename T>
class Downsample2x final : public Module<T> {
 public:
  Downsample2x(std::string name, int in_ch, int out_ch);

  Tensor<T> forward(const Tensor<T>& x) override;
  Tensor<T> backward(const Tensor<T>& upstream) override;
  Tensor<T> infer(const Tensor<T>& x) const override;
  void collect_parameters(std::vector<Parameter<T>*>& out) override;
  void describe(std::vector<LayerSpec>& out) const override;

 private:
  Conv2d<T> conv_;
};

// Nearest-neighbour x2 followed by a 3x3 convolution.
template <typename T>
class Upsample2x final : public Module<T> {
 public:
  Upsample2x(std::string name, int in_ch, int out_ch);

  Tensor<T> forward(const Tensor<T>& x) override;
  Tensor<T> backward(const Tensor<T>& upstream) override;
  Tensor<T> infer(const Tensor<T>& x) const override;
  void collect_parameters(std::vector<Parameter<T>*>& out) override;
  void describe(std::vector<LayerSpec>& out) const override;

 private:
  std::string name_;
  Conv2d<T> conv_;
};

template <typename T>
class Sequential final : public Module<T> {
 public:
  Sequential& add(std::unique_ptr<Module<T>> m) {
    layers_.push_back(std::move(m));
    return *this;
  }
  std::size_t size() const { return layers_.size(); }
  Module<T>& operator[](std::size_t i) { return *layers_[i]; }

  Tensor<T> forward(const Tensor<T>& x) override;
  Tensor<T> backward(const Tensor<T>& upstream) override;
  Tensor<T> infer(const Tensor<T>& x) const override;
  void collect_parameters(std::vector<Parameter<T>*>& out) override;
  void describe(std::vector<LayerSpec>& out) const override;

 private:
  std::vector<std::unique_ptr<Module<T>>> layers_;
};

// Kaiming-uniform (fan-in) weights drawn in declaration order and zero biases.
// Residual second convolutions (".conv2") and the "output" layer start at zero.
template <typename T>
void kaiming_init(Module<T>& m, std::uint64_t seed);

}  // namespace fringe::nn
