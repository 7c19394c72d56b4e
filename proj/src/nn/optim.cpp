#include "fringe/nn/optim.hpp"

#include <cmath>

namespace fringe::nn {

template <typename T>
void adam_step(const std::vector<Parameter<T>*>& params, OptimState<T>& state) {
  if (state.first_moment.empty()) {
    for (const auto* p : params) {
      state.first_moment.emplace_back(p->value.dims());
      state.second_moment.emplace_back(p->value.dims());
    }
  }
  if (state.first_moment.size() != params.size()) throw ValidationError("optimizer state does not match parameters");
  ++state.step;
  const auto& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    auto& m = state.first_moment[k];
    auto& v = state.second_moment[k];
    require_same_dims(m, p.value, "adam moments");
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      const double mi = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      const double vi = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = c.learning_rate * (mi / bc1) / (std::sqrt(vi / bc2) + c.epsilon);
      p.value[i] = static_cast<T>(p.value[i] - update);
    }
  }
}

template void adam_step(const std::vector<Parameter<float>*>&, OptimState<float>&);
template void adam_step(const std::vector<Parameter<double>*>&, OptimState<double>&);

}  // namespace fringe::nn
