#include "fallcascade/net/adam.hpp"

#include <cmath>
#include <string>

#include "fallcascade/error.hpp"

namespace fallcascade::net {

AdamState AdamState::for_network(const Network& net) {
  AdamState state;
  for (auto tensor : net.parameters()) {
    state.first_moment.emplace_back(tensor.size(), 0.0);
    state.second_moment.emplace_back(tensor.size(), 0.0);
  }
  return state;
}

void adam_step(Network& net, const Gradients& grads, AdamState& state, double learning_rate) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  auto params = net.parameters();
  const auto grad_tensors = grads.tensors();
  if (params.size() != grad_tensors.size() || params.size() != state.first_moment.size()) {
    throw InternalError("adam: gradient/state layout does not match the network");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != grad_tensors[t].size() || params[t].size() != state.first_moment[t].size()) {
      throw InternalError("adam: tensor " + std::to_string(t) + " shape mismatch");
    }
    for (std::size_t k = 0; k < grad_tensors[t].size(); ++k) {
      if (!std::isfinite(grad_tensors[t][k])) {
        throw TrainingError("non-finite gradient in tensor " + std::to_string(t) + " at index " +
                            std::to_string(k) + " (step " + std::to_string(state.step + 1) + ")");
      }
    }
  }

  ++state.step;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& m = state.first_moment[t];
    auto& v = state.second_moment[t];
    for (std::size_t k = 0; k < params[t].size(); ++k) {
      const double g = grad_tensors[t][k];
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g;
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      params[t][k] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace fallcascade::net
