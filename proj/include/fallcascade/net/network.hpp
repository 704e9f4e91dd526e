#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fallcascade/net/layer.hpp"

namespace fallcascade::net {

inline constexpr int kHeadCount = 3;
using HeadWeights = std::array<double, kHeadCount>;

// 1:1:2 normalized to sum 1.
inline constexpr HeadWeights kDefaultHeadWeights{0.25, 0.25, 0.5};

enum class Mode { train, infer };
enum class LossKind { binary, sparse_categorical };

struct ForwardCache;
struct Gradients;

struct ForwardResult {
  std::array<Matrix, kHeadCount> heads;
};

// Everything backward() needs from a train-mode forward pass.
struct ForwardCache {
  const void* owner = nullptr;
  Mode mode = Mode::train;
  Matrix input;
  std::vector<Matrix> layer_inputs;  // trunk input to each layer
  std::vector<Matrix> normalized;    // batchnorm x-hat, empty for other layers
  std::vector<RowVector> inv_std;
  std::vector<RowVector> batch_mean;
  std::vector<RowVector> batch_var;
  std::array<Matrix, kHeadCount> heads;
};

struct LayerGradients {
  Matrix weights;
  Vector bias;
  Vector gamma;
  Vector beta;
};

struct Gradients {
  std::vector<LayerGradients> layers;

  // Same order as Network::parameters().
  std::vector<std::span<const double>> tensors() const;
};

class Network {
 public:
  Network() = default;

  int input_width() const { return input_width_; }
  int class_count() const { return class_count_; }
  HeadActivation head_activation() const { return activation_; }
  const HeadWeights& head_weights() const { return head_weights_; }
  void set_head_weights(const HeadWeights& weights);

  Mode mode() const { return mode_; }
  void set_mode(Mode mode) { mode_ = mode; }

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }
  bool has_batchnorm() const;

  // Trainable tensors in a stable order: per layer weights, bias, gamma, beta.
  std::vector<std::span<double>> parameters();
  std::vector<std::span<const double>> parameters() const;
  std::size_t parameter_count() const;

  // Runs the batch through the network in the current mode. Train mode needs
  // at least two rows when batchnorm is present and never touches the
  // running statistics; see commit_batch_statistics().
  ForwardCache forward(const Matrix& batch) const;
  ForwardResult predict(const Matrix& batch) const;

  Gradients backward(const ForwardCache& cache, std::span<const int> targets, LossKind kind,
                     const HeadWeights& weights) const;

  // Folds the batch statistics of a train-mode pass into the running ones.
  void commit_batch_statistics(const ForwardCache& cache);

  friend Network build_network(int input_width, int class_count, const std::vector<LayerSpec>& arch,
                               std::uint64_t seed);
  friend Network assemble_network(int input_width, int class_count, HeadWeights head_weights,
                                  std::vector<Layer> layers);

 private:
  int input_width_ = 0;
  int class_count_ = 0;
  HeadActivation activation_ = HeadActivation::sigmoid;
  HeadWeights head_weights_ = kDefaultHeadWeights;
  Mode mode_ = Mode::train;
  std::vector<Layer> layers_;
};

// Validates the architecture and draws He-uniform dense weights; biases zero,
// batchnorm gamma 1 and beta 0.
Network build_network(int input_width, int class_count, const std::vector<LayerSpec>& arch,
                      std::uint64_t seed);

// Rebuilds a network from already-shaped layers (model loading). Performs the
// same structural validation as build_network and checks parameter shapes.
Network assemble_network(int input_width, int class_count, HeadWeights head_weights,
                         std::vector<Layer> layers);

HeadWeights normalize_head_weights(const HeadWeights& raw);

}  // namespace fallcascade::net
