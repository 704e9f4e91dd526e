#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "fallcascade/net/network.hpp"

namespace fallcascade::net {

struct TrainOptions {
  int epochs = 1;
  int batch_size = 32;
  double learning_rate = 1e-4;
  HeadWeights head_weights = kDefaultHeadWeights;
  std::uint64_t seed = 0;
};

struct EpochStats {
  int epoch = 0;          // 1-based
  double mean_loss = 0.0;  // sample-weighted over the epoch's minibatches
  std::int64_t steps = 0;
};

using EpochCallback = std::function<void(const EpochStats&, Network&)>;

// Copies the selected rows of a matrix.
Matrix gather_rows(const Matrix& source, std::span<const std::size_t> rows);

// Shuffled minibatch Adam. The trailing partial batch is kept, except a
// single-row remainder when the network has batchnorm. The callback runs after
// every epoch with the network switched to infer mode; training resumes in
// train mode afterwards. The network is left in infer mode.
void train_minibatch(Network& net, const Matrix& features, std::span<const int> targets, LossKind kind,
                     const TrainOptions& options, const EpochCallback& on_epoch = {});

}  // namespace fallcascade::net
