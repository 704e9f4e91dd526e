#pragma once

#include <cstdint>
#include <vector>

#include "fallcascade/net/network.hpp"

namespace fallcascade::net {

struct AdamState {
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // Zeroed accumulators shaped like the network's trainable tensors.
  static AdamState for_network(const Network& net);
};

// One bias-corrected Adam update. Gradients are checked for finiteness before
// any parameter is touched; a non-finite entry raises TrainingError.
void adam_step(Network& net, const Gradients& grads, AdamState& state, double learning_rate);

}  // namespace fallcascade::net
