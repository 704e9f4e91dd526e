#include "fallcascade/net/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "fallcascade/error.hpp"
#include "fallcascade/net/adam.hpp"
#include "fallcascade/net/loss.hpp"

namespace fallcascade::net {

Matrix gather_rows(const Matrix& source, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), source.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = source.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

void train_minibatch(Network& net, const Matrix& features, std::span<const int> targets, LossKind kind,
                     const TrainOptions& options, const EpochCallback& on_epoch) {
  if (options.epochs < 1) throw ConfigError("epochs must be at least 1");
  if (options.batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (static_cast<std::size_t>(features.rows()) != targets.size()) {
    throw DataError("feature rows and targets differ in length");
  }
  const std::size_t n = targets.size();
  const bool drop_single = net.has_batchnorm();
  if (n == 0 || (n == 1 && drop_single)) throw TrainingError("not enough samples to form a training batch");

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  AdamState adam = AdamState::for_network(net);
  const auto batch = static_cast<std::size_t>(options.batch_size);

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    net.set_mode(Mode::train);
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    std::int64_t steps = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t size = std::min(batch, n - start);
      if (size == 1 && drop_single) continue;
      const std::span<const std::size_t> rows(order.data() + start, size);
      const Matrix x = gather_rows(features, rows);
      std::vector<int> y(size);
      for (std::size_t r = 0; r < size; ++r) y[r] = targets[rows[r]];

      const ForwardCache cache = net.forward(x);
      loss_sum += weighted_loss(kind, cache.heads, y, options.head_weights) * static_cast<double>(size);
      seen += size;
      const Gradients grads = net.backward(cache, y, kind, options.head_weights);
      net.commit_batch_statistics(cache);
      adam_step(net, grads, adam, options.learning_rate);
      ++steps;
    }
    net.set_mode(Mode::infer);
    if (on_epoch) on_epoch(EpochStats{epoch, loss_sum / static_cast<double>(seen), steps}, net);
  }
  net.set_mode(Mode::infer);
}

}  // namespace fallcascade::net
