#include "fringe/nn/layers.hpp"

#include <cmath>
#include <random>

namespace fringe::nn {

std::string to_string(LayerSpec::Kind kind) {
  switch (kind) {
    case LayerSpec::Kind::conv: return "conv";
    case LayerSpec::Kind::relu: return "relu";
    case LayerSpec::Kind::residual_block: return "residual_block";
    case LayerSpec::Kind::upsample2x: return "upsample2x";
    case LayerSpec::Kind::linear_output: return "linear_output";
  }
  return "conv";
}

nlohmann::json to_json(const LayerSpec& s) {
  return {{"kind", to_string(s.kind)}, {"name", s.name},     {"in_channels", s.in_channels},
          {"out_channels", s.out_channels}, {"kernel", s.kernel}, {"stride", s.stride},
          {"padding", s.padding}};
}

// --- Conv2d ---------------------------------------------------------------

template <typename T>
Conv2d<T>::Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, Activation act)
    : name_(std::move(name)),
      weight_(name_ + ".weight", {out_ch, in_ch, kernel, kernel}),
      bias_(name_ + ".bias", {1, out_ch, 1, 1}),
      geom_{stride, kernel / 2},
      act_(act) {
  if (kernel % 2 == 0) throw ValidationError("conv kernel must be odd-sized");
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x) {
  input_ = x;
  Tensor<T> y = conv2d_forward(x, weight_.value, bias_.value, geom_);
  if (act_ == Activation::relu) {
    for (auto& v : y.values()) v = v > T{} ? v : T{};
    output_ = y;
  }
  return y;
}

template <typename T>
Tensor<T> Conv2d<T>::infer(const Tensor<T>& x) const {
  Tensor<T> y = conv2d_forward(x, weight_.value, bias_.value, geom_);
  if (act_ == Activation::relu)
    for (auto& v : y.values()) v = v > T{} ? v : T{};
  return y;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& upstream) {
  const Tensor<T>& g = act_ == Activation::relu ? relu_backward(output_, upstream) : upstream;
  ConvGrads<T> gr = conv2d_backward(input_, weight_.value, g, geom_);
  for (std::size_t i = 0; i < gr.w.size(); ++i) weight_.grad[i] += gr.w[i];
  for (std::size_t i = 0; i < gr.b.size(); ++i) bias_.grad[i] += gr.b[i];
  return std::move(gr.x);
}

template <typename T>
void Conv2d<T>::collect_parameters(std::vector<Parameter<T>*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

template <typename T>
void Conv2d<T>::describe(std::vector<LayerSpec>& out) const {
  const auto& d = weight_.value.dims();
  const auto kind = act_ == Activation::linear ? LayerSpec::Kind::linear_output : LayerSpec::Kind::conv;
  out.push_back({kind, name_, d[1], d[0], d[2], geom_.stride, geom_.padding});
  if (act_ == Activation::relu) out.push_back({LayerSpec::Kind::relu, name_ + ".relu", d[0], d[0], 0, 1, 0});
}

// --- ResidualBlock -------------------------------------------------------

template <typename T>
ResidualBlock<T>::ResidualBlock(std::string name, int channels)
    : name_(name),
      channels_(channels),
      conv1_(name + ".conv1", channels, channels, 3, 1, Activation::relu),
      conv2_(name + ".conv2", channels, channels, 3, 1, Activation::linear) {}

template <typename T>
Tensor<T> ResidualBlock<T>::forward(const Tensor<T>& x) {
  if (x.channels() != channels_)
    throw ValidationError("residual block " + name_ + " expects " + std::to_string(channels_) + " channels, got " +
                          std::to_string(x.channels()));
  Tensor<T> y = conv2_.forward(conv1_.forward(x));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
  return y;
}

template <typename T>
Tensor<T> ResidualBlock<T>::infer(const Tensor<T>& x) const {
  if (x.channels() != channels_)
    throw ValidationError("residual block " + name_ + " expects " + std::to_string(channels_) + " channels, got " +
                          std::to_string(x.channels()));
  Tensor<T> y = conv2_.infer(conv1_.infer(x));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
  return y;
}

template <typename T>
Tensor<T> ResidualBlock<T>::backward(const Tensor<T>& upstream) {
  Tensor<T> g = conv1_.backward(conv2_.backward(upstream));
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += upstream[i];
  return g;
}

template <typename T>
void ResidualBlock<T>::collect_parameters(std::vector<Parameter<T>*>& out) {
  conv1_.collect_parameters(out);
  conv2_.collect_parameters(out);
}

template <typename T>
void ResidualBlock<T>::describe(std::vector<LayerSpec>& out) const {
  out.push_back({LayerSpec::Kind::residual_block, name_, channels_, channels_, 3, 1, 1});
}

// --- Downsample2x / Upsample2x ------------------------------------------

template <typename T>
Downsample2x<T>::Downsample2x(std::string name, int in_ch, int out_ch)
    : conv_(std::move(name), in_ch, out_ch, 3, 2, Activation::relu) {}

template <typename T>
Tensor<T> Downsample2x<T>::forward(const Tensor<T>& x) {
  if (x.height() % 2 || x.width() % 2)
    throw ValidationError("downsample2x needs even spatial dims, got " + x.shape_string());
  return conv_.forward(x);
}

template <typename T>
Tensor<T> Downsample2x<T>::infer(const Tensor<T>& x) const {
  if (x.height() % 2 || x.width() % 2)
    throw ValidationError("downsample2x needs even spatial dims, got " + x.shape_string());
  return conv_.infer(x);
}

template <typename T>
Tensor<T> Downsample2x<T>::backward(const Tensor<T>& upstream) {
  return conv_.backward(upstream);
}

template <typename T>
void Downsample2x<T>::collect_parameters(std::vector<Parameter<T>*>& out) {
  conv_.collect_parameters(out);
}

template <typename T>
void Downsample2x<T>::describe(std::vector<LayerSpec>& out) const {
  conv_.describe(out);
}

template <typename T>
Upsample2x<T>::Upsample2x(std::string name, int in_ch, int out_ch)
    : name_(name), conv_(name + ".conv", in_ch, out_ch, 3, 1, Activation::relu) {}

template <typename T>
Tensor<T> Upsample2x<T>::forward(const Tensor<T>& x) {
  return conv_.forward(upsample_nearest2x(x));
}

template <typename T>
Tensor<T> Upsample2x<T>::infer(const Tensor<T>& x) const {
  return conv_.infer(upsample_nearest2x(x));
}

template <typename T>
Tensor<T> Upsample2x<T>::backward(const Tensor<T>& upstream) {
  return upsample_nearest2x_backward(conv_.backward(upstream));
}

template <typename T>
void Upsample2x<T>::collect_parameters(std::vector<Parameter<T>*>& out) {
  conv_.collect_parameters(out);
}

template <typename T>
void Upsample2x<T>::describe(std::vector<LayerSpec>& out) const {
  out.push_back({LayerSpec::Kind::upsample2x, name_, 0, 0, 0, 1, 0});
  conv_.describe(out);
}

// --- Sequential -------------------------------------------------------------

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& x) {
  Tensor<T> h = x;
  for (auto& l : layers_) h = l->forward(h);
  return h;
}

template <typename T>
Tensor<T> Sequential<T>::infer(const Tensor<T>& x) const {
  Tensor<T> h = x;
  for (const auto& l : layers_) h = l->infer(h);
  return h;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& upstream) {
  Tensor<T> g = upstream;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

template <typename T>
void Sequential<T>::collect_parameters(std::vector<Parameter<T>*>& out) {
  for (auto& l : layers_) l->collect_parameters(out);
}

template <typename T>
void Sequential<T>::describe(std::vector<LayerSpec>& out) const {
  for (const auto& l : layers_) l->describe(out);
}

template <typename T>
void kaiming_init(Module<T>& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto* p : m.parameters()) {
    const auto& d = p->value.dims();
    if (p->name.ends_with(".bias")) {
      p->value.fill(T{});
      continue;
    }
    // Residual branches and the output layer start at zero so that every
    // block begins as the identity and the initial prediction is zero.
    if (p->name.ends_with(".conv2.weight") || p->name == "output.weight") {
      p->value.fill(T{});
      continue;
    }
    const double fan_in = static_cast<double>(d[1]) * d[2] * d[3];
    const double bound = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> uni(-bound, bound);
    for (auto& v : p->value.values()) v = static_cast<T>(uni(rng));
  }
}

#define FRINGE_NN_LAYERS(T)          \
  template class Conv2d<T>;          \
  template class ResidualBlock<T>;   \
  template class Downsample2x<T>;    \
  template class Upsample2x<T>;      \
  template class Sequential<T>;      \
  template void kaiming_init(Module<T>&, std::uint64_t);

FRINGE_NN_LAYERS(float)
FRINGE_NN_LAYERS(double)

}  // namespace fringe::nn
